"""Hold-out evaluation of reserving predictions.

Actual outcomes come from a second wide-format CSV holding the cells that
were unobserved at valuation; joining it with the training triangle gives
each accident year's realized cumulative loss ratio at the final
development year. Metrics per accident year and method:

* rmse  - root of the mean (over insurers) squared deviation of the
  realized ratio from the point prediction;
* cov95 - share of insurers whose interval contains the realized ratio;
* len95 - mean interval length.

For a single insurer the rows reduce to the absolute deviation, a 0/1
containment flag, and the interval length.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import benchmarks, bootstrap, mle
from .triangle import (
    RunOffTriangle,
    TriangleError,
    load_triangle,
    most_recent_years,
    to_loss_ratios,
)


@dataclass(frozen=True)
class PredictionRecord:
    """One interval prediction keyed by insurer, accident year and method."""

    insurer: str
    accident_year: int
    method: str
    point: float
    lo: float
    hi: float


@dataclass(frozen=True)
class EvalRow:
    insurer: str
    accident_year: int
    method: str
    rmse: float
    cov95: float
    len95: float


@dataclass(frozen=True)
class EvalReport:
    """Per-insurer evaluation rows plus per-year aggregates over insurers
    (aggregate rows carry insurer label ``ALL``)."""

    rows: tuple
    aggregates: tuple
    failures: tuple  # (insurer, message) pairs for isolated per-insurer errors


def load_holdout(path) -> dict:
    """Read a holdout CSV; returns accident year -> (premium, {dev: loss})."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise TriangleError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[:2] != ["accident_year", "premium"]:
        raise TriangleError(f"{path}: header must be accident_year,premium,dev_1,...,dev_n")
    n = len(header) - 2
    out = {}
    for row in rows[1:]:
        if not any(tok.strip() for tok in row):
            continue
        year = int(float(row[0]))
        premium = float(row[1])
        cells = {}
        for j, tok in enumerate(row[2:], start=1):
            if tok.strip():
                cells[j] = float(tok)
                if cells[j] <= 0:
                    raise TriangleError(f"{path}: nonpositive holdout loss for year {year}")
        out[year] = (premium, cells)
    if not out:
        raise TriangleError(f"{path}: no data rows")
    return out


def realized_ultimates(t: RunOffTriangle, holdout: dict) -> dict:
    """Realized final-development cumulative loss ratio per accident year.

    Fully observed training rows need no holdout row; every partially
    observed row must have exactly its unobserved cells in the holdout.
    """
    # same elementwise-ratio-then-sum path as the triangle's observed
    # cumulative, so a zero-width interval at an exactly known ultimate
    # contains the realized value bit for bit
    ratios = t.losses / t.premiums[:, None]
    out = {}
    for i, year in enumerate(t.years):
        ki = int(t.k[i])
        paid_ratio = float(ratios[i, :ki].sum())
        if ki == t.n:
            out[year] = paid_ratio
            continue
        if year not in holdout:
            raise TriangleError(f"holdout data missing for accident year {year}")
        premium, cells = holdout[year]
        if premium != t.premiums[i]:
            raise TriangleError(f"holdout premium mismatch for accident year {year}")
        expect = set(range(ki + 1, t.n + 1))
        if set(cells) != expect:
            raise TriangleError(
                f"holdout cells for accident year {year} must cover development "
                f"years {min(expect)}..{t.n}"
            )
        out[year] = paid_ratio + sum(cells.values()) / float(t.premiums[i])
    return out


def evaluate(predictions, actuals) -> EvalReport:
    """Score interval predictions against realized outcomes.

    ``predictions`` is an iterable of :class:`PredictionRecord`;
    ``actuals`` maps (insurer, accident_year) to the realized ratio.
    Every prediction must have a matching actual.
    """
    preds = list(predictions)
    if not preds:
        raise ValueError("no predictions to evaluate")
    rows = []
    for p in preds:
        key = (p.insurer, p.accident_year)
        if key not in actuals:
            raise KeyError(f"no realized outcome for insurer {p.insurer!r}, year {p.accident_year}")
        actual = actuals[key]
        rows.append(
            EvalRow(
                p.insurer,
                p.accident_year,
                p.method,
                abs(actual - p.point),
                1.0 if p.lo <= actual <= p.hi else 0.0,
                p.hi - p.lo,
            )
        )
    groups = {}
    for p, r in zip(preds, rows):
        groups.setdefault((p.accident_year, p.method), []).append(
            (actuals[(p.insurer, p.accident_year)] - p.point, r.cov95, r.len95)
        )
    aggregates = []
    for (year, method), vals in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        dev = np.array([v[0] for v in vals])
        aggregates.append(
            EvalRow(
                "ALL",
                year,
                method,
                float(np.sqrt(np.mean(dev**2))),
                float(np.mean([v[1] for v in vals])),
                float(np.mean([v[2] for v in vals])),
            )
        )
    return EvalReport(tuple(rows), tuple(aggregates), ())


def _predict_insurer(tri: RunOffTriangle, name, methods, years, n_sim, seed, level, threads):
    if years is not None:
        tri = most_recent_years(tri, years)
    lr = to_loss_ratios(tri)
    preds = []
    for method in methods:
        if method == "dirichlet":
            fit = mle.fit_mle(lr)
            pd = bootstrap.bias_corrected_bootstrap(
                fit.theta_hat, lr, n_sim=n_sim, seed=seed, threads=threads
            )
            for rec in bootstrap.summarize(pd, level):
                preds.append(
                    PredictionRecord(
                        name, rec["accident_year"], "dirichlet",
                        rec["point"], rec["lo"], rec["hi"],
                    )
                )
        elif method == "cl":
            fit = benchmarks.cl_fit(lr)
            for rp in fit.predictions(level):
                preds.append(
                    PredictionRecord(name, rp.year, "cl", rp.ultimate, rp.lo, rp.hi)
                )
        else:
            raise ValueError(f"unknown panel method {method!r}")
    return preds


def run_panel(
    panel_dir,
    methods=("dirichlet", "cl"),
    years: int | None = None,
    n_sim: int = 400,
    seed: int = 0,
    level: float = 0.95,
    threads: int = 1,
) -> EvalReport:
    """Fit and score every insurer in a directory.

    The directory holds ``<name>.csv`` training triangles with matching
    ``<name>_holdout.csv`` files. A failing insurer is reported in the
    result's ``failures`` and does not stop the rest of the panel.
    """
    panel_dir = Path(panel_dir)
    train_files = sorted(
        p for p in panel_dir.glob("*.csv") if not p.stem.endswith("_holdout")
    )
    if not train_files:
        raise TriangleError(f"{panel_dir}: no triangle files found")
    predictions = []
    actuals = {}
    failures = []
    for path in train_files:
        name = path.stem
        try:
            tri = load_triangle(path)
            holdout = load_holdout(path.with_name(f"{name}_holdout.csv"))
            use = most_recent_years(tri, years) if years is not None else tri
            realized = realized_ultimates(use, holdout)
            preds = _predict_insurer(tri, name, methods, years, n_sim, seed, level, threads)
        except Exception as exc:  # isolate per-insurer failures
            failures.append((name, str(exc)))
            continue
        predictions.extend(preds)
        for year, val in realized.items():
            actuals[(name, year)] = val
    if not predictions:
        raise TriangleError("every insurer in the panel failed")
    report = evaluate(predictions, actuals)
    return EvalReport(report.rows, report.aggregates, tuple(failures))


def report_to_csv(report: EvalReport, path) -> None:
    """Write per-insurer rows then aggregate rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("insurer,accident_year,method,rmse,cov95,len95\n")
        for r in list(report.rows) + list(report.aggregates):
            fh.write(
                f"{r.insurer},{r.accident_year},{r.method},"
                f"{float(r.rmse)!r},{float(r.cov95)!r},{float(r.len95)!r}\n"
            )
