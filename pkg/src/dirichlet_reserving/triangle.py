"""Run-off triangle data model and CSV ingestion.

A triangle holds earned premiums and incremental paid losses per accident
year (rows) and development year (columns). Only a staircase of cells is
observed at valuation; unobserved cells are NaN. Loss ratios are losses
divided by the accident year's premium.

Triangle CSV format: UTF-8, comma separated, header row
``accident_year,premium,dev_1,...,dev_n``, one data row per accident year
in ascending year order, unobserved cells left empty.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class TriangleError(ValueError):
    """Raised on malformed triangle files or invalid triangle data."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def _observed_counts(values: np.ndarray, what: str) -> np.ndarray:
    """Per-row count of observed cells, enforcing a prefix-shaped mask."""
    m, n = values.shape
    obs = ~np.isnan(values)
    k = obs.sum(axis=1)
    for i in range(m):
        if k[i] == 0:
            raise TriangleError(f"{what}: row {i + 1} has no observed cells")
        if not obs[i, : k[i]].all():
            raise TriangleError(
                f"{what}: row {i + 1} mask is not staircase-shaped "
                "(observed cells must form a prefix)"
            )
    return k


@dataclass(frozen=True)
class RunOffTriangle:
    """Premiums and incremental paid losses with an observed-cell mask.

    Parameters
    ----------
    years : sequence of int
        Accident year labels, ascending.
    premiums : array of shape (m,)
        Earned premium per accident year, strictly positive.
    losses : array of shape (m, n)
        Incremental paid losses; NaN marks unobserved cells. Observed
        cells must be strictly positive and form a prefix of each row.
    """

    years: tuple
    premiums: np.ndarray
    losses: np.ndarray
    k: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        object.__setattr__(self, "premiums", _freeze(self.premiums))
        object.__setattr__(self, "losses", _freeze(self.losses))
        m, n = self.losses.shape
        if len(self.years) != m or len(self.premiums) != m:
            raise TriangleError("years, premiums and losses disagree on row count")
        if np.any(self.premiums <= 0):
            bad = self.years[int(np.argmax(self.premiums <= 0))]
            raise TriangleError(f"nonpositive premium for accident year {bad}")
        k = _observed_counts(self.losses, "losses")
        with np.errstate(invalid="ignore"):
            if np.any(self.losses <= 0):
                i, j = np.argwhere(self.losses <= 0)[0]
                raise TriangleError(
                    f"nonpositive incremental loss at accident year {self.years[i]}, "
                    f"development year {j + 1}"
                )
        object.__setattr__(self, "k", _freeze(k).astype(int))

    @property
    def m(self) -> int:
        return self.losses.shape[0]

    @property
    def n(self) -> int:
        return self.losses.shape[1]


@dataclass(frozen=True)
class LossRatioTriangle:
    """Incremental loss ratios (losses over premium), same mask as the source."""

    years: tuple
    premiums: np.ndarray
    ratios: np.ndarray
    k: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "years", tuple(int(y) for y in self.years))
        object.__setattr__(self, "premiums", _freeze(self.premiums))
        object.__setattr__(self, "ratios", _freeze(self.ratios))
        if np.any(self.premiums <= 0):
            raise TriangleError("nonpositive premium")
        k = _observed_counts(self.ratios, "ratios")
        with np.errstate(invalid="ignore"):
            if np.any(self.ratios <= 0):
                raise TriangleError("nonpositive loss ratio")
        object.__setattr__(self, "k", _freeze(k).astype(int))

    @property
    def m(self) -> int:
        return self.ratios.shape[0]

    @property
    def n(self) -> int:
        return self.ratios.shape[1]

    def observed_cumulative(self) -> np.ndarray:
        """Cumulative observed loss ratio per accident year (through each
        row's last observed development year)."""
        return np.array([self.ratios[i, : self.k[i]].sum() for i in range(self.m)])


def _parse_cell(token: str, where: str) -> float:
    token = token.strip()
    if "," in token or " " in token or "'" in token:
        raise TriangleError(f"{where}: thousands separators are not accepted ({token!r})")
    try:
        return float(token)
    except ValueError:
        raise TriangleError(f"{where}: cannot parse number {token!r}") from None


def load_triangle(path) -> RunOffTriangle:
    """Read a wide-format triangle CSV and validate the canonical staircase.

    The expected mask is the standard valuation layout: row i observes all
    n cells when i <= m - n (fully developed historical years) and the
    first m + 1 - i cells otherwise.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise TriangleError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "accident_year" or header[1] != "premium":
        raise TriangleError(f"{path}: header must be accident_year,premium,dev_1,...,dev_n")
    n = len(header) - 2
    if header[2:] != [f"dev_{j}" for j in range(1, n + 1)]:
        raise TriangleError(f"{path}: development columns must be dev_1,...,dev_{n}")

    years, premiums, cells = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not any(tok.strip() for tok in row):
            continue
        if len(row) != n + 2:
            raise TriangleError(f"{path}:{lineno}: expected {n + 2} columns, got {len(row)}")
        where = f"{path}:{lineno}"
        years.append(int(_parse_cell(row[0], where)))
        premiums.append(_parse_cell(row[1], where))
        cells.append([
            _parse_cell(tok, where) if tok.strip() else np.nan for tok in row[2:]
        ])

    if not years:
        raise TriangleError(f"{path}: no data rows")
    if years != sorted(years):
        raise TriangleError(f"{path}: accident years must be ascending")
    tri = RunOffTriangle(years, np.array(premiums), np.array(cells))

    m = tri.m
    for i in range(m):
        expect = tri.n if i + 1 <= m - tri.n else m - i
        if tri.k[i] != expect:
            raise TriangleError(
                f"{path}: non-staircase mask: accident year {tri.years[i]} has "
                f"{tri.k[i]} observed cells, expected {expect}"
            )
    return tri


def to_loss_ratios(t: RunOffTriangle) -> LossRatioTriangle:
    """Divide each row of losses by its premium; the mask carries over."""
    return LossRatioTriangle(t.years, t.premiums, t.losses / t.premiums[:, None])


def cumulative(t: LossRatioTriangle, i: int, k: int, k2: int) -> float:
    """Partial sum of loss ratios for accident year index ``i`` (1-based)
    over development years ``k..k2`` (1-based, inclusive)."""
    if not 1 <= i <= t.m:
        raise IndexError(f"accident year index {i} out of range 1..{t.m}")
    if not 1 <= k <= k2 <= t.n:
        raise IndexError(f"need 1 <= k <= k2 <= {t.n}, got k={k}, k2={k2}")
    if k2 > t.k[i - 1]:
        raise TriangleError(
            f"development year {k2} of accident year {t.years[i - 1]} is unobserved"
        )
    return float(t.ratios[i - 1, k - 1 : k2].sum())


def restrict_years(t: RunOffTriangle, first_accident_year: int) -> RunOffTriangle:
    """Sub-triangle keeping accident years >= ``first_accident_year``."""
    keep = [i for i, y in enumerate(t.years) if y >= first_accident_year]
    if not keep:
        raise TriangleError(f"no accident years at or after {first_accident_year}")
    i0 = keep[0]
    return RunOffTriangle(t.years[i0:], t.premiums[i0:], t.losses[i0:])


def most_recent_years(t: RunOffTriangle, count: int) -> RunOffTriangle:
    """Sub-triangle of the most recent ``count`` accident years."""
    if not 1 <= count <= t.m:
        raise TriangleError(f"cannot select {count} of {t.m} accident years")
    return restrict_years(t, t.years[t.m - count])
