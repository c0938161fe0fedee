"""Bayesian hierarchical inference for the Dirichlet reserving model.

Priors: per-year scales iid uniform(0, phi_hyper) with a flat hyper prior
on phi_hyper, and flat priors on the development shapes and the tail
shape. The tail shape support is [1, inf), optionally raised to
alpha/(1-alpha) times the shape total when an expected-tail-quota lower
bound alpha is imposed. Flat priors on unbounded parameters are made
proper for sampling by configurable caps; draws near a cap are flagged.

Sampling is adaptive random-walk Metropolis within Gibbs on transformed
coordinates (log shapes, log tail-shape excess over its lower bound,
logit scales within their support interval, log hyper scale), with
per-block step adaptation during warmup only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import DirichletParams
from .special import log_gamma
from .triangle import LossRatioTriangle, RunOffTriangle, most_recent_years, to_loss_ratios


class McmcError(RuntimeError):
    """Sampler divergence or convergence-diagnostic failure."""


@dataclass(frozen=True)
class BayesSpec:
    """Configuration of one Bayesian run.

    years restricts to the most recent accident years when set.
    tail_alpha, when set, imposes the expected-tail-quota lower bound
    b_n/(a0 + b_n) >= tail_alpha on the support.
    """

    years: int | None = None
    tail_alpha: float | None = None
    iterations: int = 20000
    warmup: int = 5000
    chains: int = 4
    phi_hyper_cap: float = 10.0
    tail_shape_cap_mult: float = 10.0

    def __post_init__(self):
        if self.tail_alpha is not None and not 0.0 <= self.tail_alpha < 1.0:
            raise ValueError("tail_alpha must lie in [0, 1)")
        if self.iterations <= self.warmup:
            raise ValueError("iterations must exceed warmup")
        if self.warmup < 1 or self.chains < 1:
            raise ValueError("need warmup >= 1 and chains >= 1")

    @property
    def tail_ratio(self) -> float:
        if self.tail_alpha is None:
            return 0.0
        return self.tail_alpha / (1.0 - self.tail_alpha)


@dataclass(frozen=True)
class BayesState:
    """One point of the posterior's parameter space."""

    a: np.ndarray
    b_n: float
    phi: np.ndarray
    phi_hyper: float


@dataclass(frozen=True)
class PosteriorSample:
    """Post-warmup draws of all chains plus sampler diagnostics."""

    years: tuple
    seed: int
    spec: BayesSpec
    a: np.ndarray          # (chains, kept, n)
    b_n: np.ndarray        # (chains, kept)
    phi: np.ndarray        # (chains, kept, m)
    phi_hyper: np.ndarray  # (chains, kept)
    acceptance: dict
    rhat: dict
    warnings: tuple = field(default=())

    @property
    def n_draws(self) -> int:
        return self.a.shape[0] * self.a.shape[1]


class _Data:
    """Cached per-triangle arrays for fast likelihood evaluation."""

    def __init__(self, t: LossRatioTriangle):
        self.m, self.n = t.m, t.n
        self.k = t.k.astype(int)
        self.s = t.observed_cumulative()
        mask = np.arange(t.n)[None, :] < self.k[:, None]
        self.lnY = np.where(mask, np.log(np.where(mask, t.ratios, 1.0)), 0.0)
        self.row_lnY = self.lnY.sum(axis=1)
        self.uk, self.inv = np.unique(self.k, return_inverse=True)

    def row_logliks(self, a, b, phi):
        """Vector of per-row log densities (phi assumed inside support)."""
        c = np.cumsum(a)
        a0 = c[-1]
        lg = log_gamma(np.concatenate((a, [a0 + b], a0 + b - c[self.uk - 1])))
        G = np.concatenate(([0.0], np.cumsum(lg[: self.n])))
        ck = c[self.k - 1]
        close = a0 + b - ck
        D = self.lnY @ a - self.row_lnY
        return (
            lg[self.n]
            - G[self.k]
            - lg[self.n + 1 :][self.inv]
            + D
            - ck * np.log(phi)
            + (close - 1.0) * np.log1p(-self.s / phi)
        )


def _support_lower(a0: float, spec: BayesSpec) -> float:
    return max(1.0, spec.tail_ratio * a0)


def log_posterior(state: BayesState, t: LossRatioTriangle, spec: BayesSpec) -> float:
    """Log of the unnormalized posterior density; -inf outside support."""
    a = np.asarray(state.a, dtype=float)
    phi = np.asarray(state.phi, dtype=float)
    data = _Data(t)
    if a.size != t.n or phi.size != t.m:
        raise ValueError("state dimensions do not match the triangle")
    a0 = float(a.sum())
    if (
        np.any(a <= 0)
        or not np.isfinite(state.b_n)
        or state.b_n < _support_lower(a0, spec)
        or state.b_n > spec.tail_shape_cap_mult * a0
        or state.phi_hyper <= 0
        or state.phi_hyper > spec.phi_hyper_cap
        or np.any(phi <= data.s)
        or np.any(phi >= state.phi_hyper)
    ):
        return -np.inf
    ll = float(data.row_logliks(a, float(state.b_n), phi).sum())
    return ll - t.m * np.log(float(state.phi_hyper))


def _sample_truncated_beta(alpha, beta, lo, rng, rounds: int = 50):
    """Vector of Beta(alpha_i, beta_i) draws conditioned on u_i > lo_i.

    Plain rejection covers the common case where the truncation point sits
    below the Beta bulk; stubborn components fall back to inverse-CDF
    sampling by bisection on the regularized incomplete beta.
    """
    from .gof import regularized_incomplete_beta

    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0.0):
        raise McmcError("degenerate scale conditional: a shape prefix sum fell below 1")
    u = rng.beta(alpha, beta)
    bad = u <= lo
    for _ in range(rounds):
        if not bad.any():
            return u
        u[bad] = rng.beta(alpha[bad], beta[bad])
        bad = u <= lo
    for i in np.nonzero(bad)[0]:
        base = regularized_incomplete_beta(float(lo[i]), float(alpha[i]), float(beta[i]))
        target = base + rng.random() * (1.0 - base)
        a_lo, a_hi = float(lo[i]), 1.0
        for _ in range(200):
            mid = 0.5 * (a_lo + a_hi)
            if regularized_incomplete_beta(mid, float(alpha[i]), float(beta[i])) < target:
                a_lo = mid
            else:
                a_hi = mid
            if a_hi - a_lo < 1e-14:
                break
        u[i] = 0.5 * (a_lo + a_hi)
    return u


def _split_rhat(chains_draws: np.ndarray) -> float:
    """Potential scale reduction on split chains for one scalar parameter."""
    C, L = chains_draws.shape
    half = L // 2
    seqs = np.concatenate([chains_draws[:, :half], chains_draws[:, half : 2 * half]])
    W = seqs.var(axis=1, ddof=1).mean()
    B = half * seqs.mean(axis=1).var(ddof=1)
    if W == 0.0:
        return 1.0 if B == 0.0 else np.inf
    vhat = (half - 1) / half * W + B / half
    return float(np.sqrt(vhat / W))


def run_mcmc(t, spec: BayesSpec, seed: int = 0) -> PosteriorSample:
    """Sample the posterior with adaptive Metropolis-within-Gibbs chains.

    Accepts a run-off or loss-ratio triangle; the spec's ``years``
    restriction applies to a run-off triangle before conversion. Raises
    :class:`McmcError` when a block stops moving entirely or the
    split-chain diagnostic exceeds 1.05 for any parameter.
    """
    if isinstance(t, RunOffTriangle):
        if spec.years is not None:
            t = most_recent_years(t, spec.years)
        t = to_loss_ratios(t)
    elif spec.years is not None and spec.years != t.m:
        raise ValueError(f"spec.years={spec.years} but the triangle has {t.m} accident years")

    from . import mle  # deferred to avoid import cycles at module load

    data = _Data(t)
    m, n = data.m, data.n
    fit = mle.fit_mle(t)
    a_ref = fit.theta_hat.a

    kept = spec.iterations - spec.warmup
    A = np.empty((spec.chains, kept, n))
    B = np.empty((spec.chains, kept))
    PHI = np.empty((spec.chains, kept, m))
    HYP = np.empty((spec.chains, kept))
    # random-walk blocks: one per development shape, one joint rescaling of
    # the shape vector (which mixes the weakly identified concentration),
    # and the tail shape; the scales and the hyper scale are drawn exactly
    # from their full conditionals
    n_blocks = n + 3
    accepted = np.zeros((spec.chains, n_blocks))
    proposed = np.zeros((spec.chains, n_blocks))

    for chain in range(spec.chains):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(chain,)))
        a = a_ref * np.exp(0.05 * rng.standard_normal(n))
        a0 = a.sum()
        lower = _support_lower(a0, spec)
        b = lower * (1.05 + 0.05 * rng.random()) if lower > 1.0 else 1.0 + 0.1 + 0.1 * rng.random()
        c = np.cumsum(a)
        phi_prof = (a0 + b - 1.0) / c[data.k - 1] * data.s
        phi = data.s + (phi_prof - data.s) * np.exp(0.1 * rng.standard_normal(m))
        hyp = min(spec.phi_hyper_cap * 0.999, float(phi.max()) * 1.25)
        if hyp <= phi.max():
            raise McmcError("phi_hyper_cap is too low for the data's loss ratios")

        rows = data.row_logliks(a, b, phi)
        scales = np.full(n_blocks, 0.1)
        acc_win = np.zeros(n_blocks)
        prop_win = np.zeros(n_blocks)

        for it in range(spec.iterations):
            warm = it < spec.warmup
            # development shape blocks (full-likelihood updates)
            for j in range(n):
                step = scales[j] * rng.standard_normal()
                a_new = a.copy()
                a_new[j] = a[j] * np.exp(step)
                a0_new = a_new.sum()
                prop_win[j] += 1
                if not warm:
                    proposed[chain, j] += 1
                if b < _support_lower(a0_new, spec) or b > spec.tail_shape_cap_mult * a0_new:
                    continue
                rows_new = data.row_logliks(a_new, b, phi)
                logr = rows_new.sum() - rows.sum() + step  # step = log-scale Jacobian delta
                if logr >= 0 or np.log(rng.random()) < logr:
                    a, a0, rows = a_new, a0_new, rows_new
                    acc_win[j] += 1
                    if not warm:
                        accepted[chain, j] += 1
            # joint rescaling of the shape vector and the tail shape's
            # excess over its bound: scaling n+1 flat-prior coordinates
            # contributes a lambda^(n+1) volume term
            js = n
            step = scales[js] * rng.standard_normal()
            lam = np.exp(step)
            prop_win[js] += 1
            if not warm:
                proposed[chain, js] += 1
            a_new = a * lam
            a0_new = a0 * lam
            b_new = _support_lower(a0_new, spec) + lam * (b - _support_lower(a0, spec))
            if b_new <= spec.tail_shape_cap_mult * a0_new:
                rows_new = data.row_logliks(a_new, b_new, phi)
                logr = rows_new.sum() - rows.sum() + (n + 1) * step
                if logr >= 0 or np.log(rng.random()) < logr:
                    a, b, a0, rows = a_new, b_new, a0_new, rows_new
                    acc_win[js] += 1
                    if not warm:
                        accepted[chain, js] += 1
            # tail shape block, parameterized as log excess over its bound
            jb = n + 1
            lower = _support_lower(a0, spec)
            w = np.log(b - lower)
            step = scales[jb] * rng.standard_normal()
            b_new = lower + np.exp(w + step)
            prop_win[jb] += 1
            if not warm:
                proposed[chain, jb] += 1
            if b_new <= spec.tail_shape_cap_mult * a0:
                rows_new = data.row_logliks(a, b_new, phi)
                logr = rows_new.sum() - rows.sum() + step
                if logr >= 0 or np.log(rng.random()) < logr:
                    b, rows = b_new, rows_new
                    acc_win[jb] += 1
                    if not warm:
                        accepted[chain, jb] += 1
            # ridge block: the flat priors leave the posterior nearly flat
            # along the direction that grows the tail shape together with
            # every scale, so a dedicated reversible map traverses it:
            # b -> lam*b, each scale excess grows by the conditional-mean
            # ratio, the hyper scale by lam; the Jacobian is lam^2 times
            # the product of the per-row excess ratios
            jt = n + 2
            c = np.cumsum(a)
            ck = c[data.k - 1]
            step = scales[jt] * rng.standard_normal()
            lam = np.exp(step)
            prop_win[jt] += 1
            if not warm:
                proposed[chain, jt] += 1
            b_new = lam * b
            hyp_new = lam * hyp
            g = (a0 + b_new - ck) / (a0 + b - ck)
            phi_new = data.s + g * (phi - data.s)
            if (
                b_new >= _support_lower(a0, spec)
                and b_new <= spec.tail_shape_cap_mult * a0
                and hyp_new <= spec.phi_hyper_cap
                and np.all(phi_new < hyp_new)
            ):
                rows_new = data.row_logliks(a, b_new, phi_new)
                logr = (
                    rows_new.sum() - rows.sum()
                    - m * (np.log(hyp_new) - np.log(hyp))
                    + 2.0 * step
                    + np.log(g).sum()
                )
                if logr >= 0 or np.log(rng.random()) < logr:
                    b, phi, hyp, rows = b_new, phi_new, hyp_new, rows_new
                    acc_win[jt] += 1
                    if not warm:
                        accepted[chain, jt] += 1
            # per-year scales: the conditional of u_i = s_i / phi_i is a
            # Beta(c_k - 1, a0 + b - c_k) truncated to u_i > s_i / hyper,
            # drawn exactly (rejection with a bisected inverse-CDF fallback)
            close = a0 + b - ck
            lo_u = data.s / hyp
            u = _sample_truncated_beta(ck - 1.0, close, lo_u, rng)
            phi_new = data.s / u
            rows = rows - ck * (np.log(phi_new) - np.log(phi)) + (close - 1.0) * (
                np.log1p(-u) - np.log1p(-data.s / phi)
            )
            phi = phi_new
            # hyper scale: conditional density proportional to hyp^(-m) on
            # (max phi, cap], inverted in closed form
            top = float(phi.max())
            cap = spec.phi_hyper_cap
            v = rng.random()
            if m == 1:
                hyp = top * np.exp(v * (np.log(cap) - np.log(top)))
            else:
                q = 1.0 - m
                hyp = (top**q + v * (cap**q - top**q)) ** (1.0 / q)
            # warmup-only step adaptation toward 25-40% acceptance
            if warm and (it + 1) % 50 == 0:
                rates = acc_win / np.maximum(prop_win, 1.0)
                scales[rates > 0.40] *= 1.26
                scales[rates < 0.25] *= 0.79
                acc_win[:] = 0.0
                prop_win[:] = 0.0
            if not warm:
                kept_idx = it - spec.warmup
                A[chain, kept_idx] = a
                B[chain, kept_idx] = b
                PHI[chain, kept_idx] = phi
                HYP[chain, kept_idx] = hyp

    rates = accepted / np.maximum(proposed, 1.0)
    if np.any(rates.max(axis=0) == 0.0):
        block = int(np.argmax(rates.max(axis=0) == 0.0))
        raise McmcError(f"sampler diverged: block {block} accepted no proposals after warmup")

    rhat = {}
    for j in range(n):
        rhat[f"a_{j + 1}"] = _split_rhat(A[:, :, j])
    rhat["b_n"] = _split_rhat(B)
    for i in range(m):
        rhat[f"phi_{i + 1}"] = _split_rhat(PHI[:, :, i])
    rhat["phi_hyper"] = _split_rhat(HYP)
    worst = max(rhat, key=rhat.get)
    if spec.chains > 1 and rhat[worst] > 1.05:
        raise McmcError(f"split-chain diagnostic failed: rhat[{worst}] = {rhat[worst]:.3f}")

    warn = []
    if np.any(HYP > 0.99 * spec.phi_hyper_cap):
        warn.append("phi_hyper draws within 1% of the configured cap")
    if np.any(B > 0.99 * spec.tail_shape_cap_mult * A.sum(axis=2)):
        warn.append("tail shape draws within 1% of the configured cap")

    blocks = [f"a_{j + 1}" for j in range(n)] + ["a_scale", "b_n", "tail_scale"]
    acc_out = {name: rates[:, jj].tolist() for jj, name in enumerate(blocks)}
    return PosteriorSample(
        t.years, seed, spec, A, B, PHI, HYP, acc_out, rhat, tuple(warn)
    )


def posterior_predict(ps: PosteriorSample, t: LossRatioTriangle, seed: int = 0):
    """Posterior predictive distribution of the unpaid cells.

    For every retained draw, allocates each partial accident year's
    outstanding amount over its future development years and the tail.
    Returns the same predictive-distribution type as the bootstrap module.
    """
    from .bootstrap import PredictiveDistribution

    if ps.n_draws == 0:
        raise ValueError("no posterior draws")
    if ps.a.shape[2] != t.n or ps.phi.shape[2] != t.m:
        raise ValueError("posterior dimensions do not match the triangle")
    n_draws = ps.n_draws
    a = ps.a.reshape(n_draws, t.n)
    b = ps.b_n.reshape(n_draws)
    phi = ps.phi.reshape(n_draws, t.m)
    observed = t.observed_cumulative()
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(9,)))

    unpaid = np.full((n_draws, t.m, t.n), np.nan)
    ultimate = np.tile(observed, (n_draws, 1))
    for i in range(t.m):
        ki = int(t.k[i])
        if ki == t.n:
            continue
        shapes = np.column_stack([a[:, ki:], b])
        g = rng.gamma(shapes)
        frac = g[:, :-1] / g.sum(axis=1, keepdims=True)
        scale = phi[:, i] - observed[i]
        unpaid[:, i, ki:] = scale[:, None] * frac
        ultimate[:, i] += unpaid[:, i, ki:].sum(axis=1)
    return PredictiveDistribution(
        t.years, seed, n_draws, a, phi, unpaid, ultimate,
        ultimate - observed[None, :], observed, None, 0,
    )


def draws_to_csv(ps: PosteriorSample, path) -> None:
    """Write draws in long form: chain, post-warmup iteration, param, value."""
    names = (
        [f"a_{j + 1}" for j in range(ps.a.shape[2])]
        + ["b_n"]
        + [f"phi_{i + 1}" for i in range(ps.phi.shape[2])]
        + ["phi_hyper"]
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("chain,iteration,param,value\n")
        for chain in range(ps.a.shape[0]):
            for it in range(ps.a.shape[1]):
                row = np.concatenate(
                    (ps.a[chain, it], [ps.b_n[chain, it]], ps.phi[chain, it],
                     [ps.phi_hyper[chain, it]])
                )
                for name, val in zip(names, row):
                    fh.write(f"{chain + 1},{it + 1},{name},{float(val)!r}\n")
