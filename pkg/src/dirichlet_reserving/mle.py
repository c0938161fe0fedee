"""Maximum likelihood estimation for the Dirichlet reserving model.

The tail shape is fixed at its boundary optimum of 1, the per-year scales
are profiled out in closed form, and the development shapes are found by
Newton-Raphson on the profiled log-likelihood with an analytic gradient
and Hessian. Iterations run on log shapes to enforce positivity, with
backtracking step halving and a gradient-step fallback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DirichletParams
from .special import digamma, log_gamma, trigamma
from .triangle import LossRatioTriangle


class IdentificationError(ValueError):
    """A development year is never observed, leaving its shape parameter free."""


class ConvergenceError(RuntimeError):
    """Newton-Raphson failed to converge within the iteration budget."""


@dataclass(frozen=True)
class FitResult:
    """MLE output: parameter estimates and convergence diagnostics."""

    theta_hat: DirichletParams
    loglik: float
    iterations: int
    converged: bool
    gradient_norm: float
    years: tuple


class _Stats:
    """Sufficient statistics of one staircase dataset for the profiled
    likelihood. Rows are grouped by observed prefix length so that
    likelihood, gradient and Hessian evaluations are O(n) / O(n^2)."""

    def __init__(self, ratios: np.ndarray, k: np.ndarray):
        m, n = ratios.shape
        self.m, self.n = m, n
        self.k = np.asarray(k, dtype=int)
        mask = np.arange(n)[None, :] < self.k[:, None]
        vals = np.where(mask, ratios, 1.0)
        self.s = np.where(mask, ratios, 0.0).sum(axis=1)
        self.N = mask.sum(axis=0)
        if np.any(self.N == 0):
            j = int(np.argmax(self.N == 0)) + 1
            raise IdentificationError(f"development year {j} is never observed")
        lny = np.log(vals)
        self.L = lny.sum(axis=0)
        self.M = (mask * np.log(self.s)[:, None]).sum(axis=0)
        self.cnt = np.bincount(self.k, minlength=n + 1).astype(float)
        # distinct partial prefix lengths (complete rows contribute nothing
        # to the profile terms)
        self.kk = np.nonzero(self.cnt[1:n])[0] + 1
        self.ckk = self.cnt[self.kk]
        if not np.any(self.k == n):
            raise IdentificationError("development year n is never observed")
        self.mean_complete = float(self.s[self.k == n].mean())

    def loglik(self, a: np.ndarray) -> float:
        if not np.all(np.isfinite(a)) or np.any(a <= 0) or a.max() > 1e100:
            return -np.inf
        c = np.cumsum(a)
        a0 = c[-1]
        ck = c[self.kk - 1]
        tail = a0 - ck  # exact: cumulative sums are monotone
        if np.any(tail <= 0.0):
            return -np.inf  # later shapes vanished below float resolution
        lg = log_gamma(np.concatenate(([a0 + 1.0], a, tail + 1.0)))
        val = self.m * lg[0] - float(self.N @ lg[1 : self.n + 1])
        val += float((a - 1.0) @ self.L) - float(a @ self.M)
        val += float(
            self.ckk
            @ (
                -lg[self.n + 1 :]
                + ck * np.log(ck / a0)
                + (a0 - ck) * np.log((a0 - ck) / a0)
            )
        )
        return val

    def grad(self, a: np.ndarray) -> np.ndarray:
        n = self.n
        c = np.cumsum(a)
        a0 = c[-1]
        ck = c[self.kk - 1]
        dg = digamma(np.concatenate(([a0 + 1.0], a, (a0 - ck) + 1.0)))
        g = self.m * dg[0] - self.N * dg[1 : n + 1] + self.L - self.M
        t1 = np.zeros(n + 1)
        t1[self.kk] = self.ckk * np.log(ck / a0)
        t2 = np.zeros(n + 1)
        t2[self.kk] = self.ckk * (-dg[n + 1 :] + np.log((a0 - ck) / a0))
        # rows still developing at year j contribute t1; rows already closed
        # before j contribute t2
        g += np.cumsum(t1[::-1])[::-1][1:]
        g += np.concatenate(([0.0], np.cumsum(t2)[1:n]))
        return g

    def hess(self, a: np.ndarray) -> np.ndarray:
        n = self.n
        c = np.cumsum(a)
        a0 = c[-1]
        ck = c[self.kk - 1]
        tg = trigamma(np.concatenate(([a0 + 1.0], a, (a0 - ck) + 1.0)))
        t1 = np.zeros(n + 2)
        t1[self.kk] = self.ckk / ck
        t1[n] = self.cnt[n] / a0
        suf1 = np.cumsum(t1[::-1])[::-1]  # suf1[q] = sum over prefixes >= q
        t2 = np.zeros(n + 1)
        t2[self.kk] = self.ckk * (1.0 / (a0 - ck) - tg[n + 1 :])
        pre2 = np.cumsum(t2)  # pre2[q-1] = sum over prefixes < q
        idx = np.arange(1, n + 1)
        H = np.full((n, n), self.m * (tg[0] - 1.0 / a0))
        H += suf1[np.maximum.outer(idx, idx)]
        H += pre2[np.minimum.outer(idx, idx) - 1]
        H[np.diag_indices(n)] -= self.N * tg[1 : n + 1]
        return H


def _starting_values(ratios: np.ndarray, k: np.ndarray, stats: _Stats) -> np.ndarray:
    n = ratios.shape[1]
    mask = np.arange(n)[None, :] < np.asarray(k)[:, None]
    colmean = np.where(mask, ratios, 0.0).sum(axis=0) / mask.sum(axis=0)
    base = colmean / stats.mean_complete
    return 100.0 * base / base.sum()


def _newton(stats: _Stats, a0_vec: np.ndarray, max_iterations: int, step_tol: float, grad_tol: float):
    x = np.log(a0_vec)
    ll = stats.loglik(np.exp(x))
    iterations = 0
    converged = False
    for iterations in range(1, max_iterations + 1):
        a = np.exp(x)
        g = stats.grad(a)
        if np.max(np.abs(g)) < grad_tol:
            converged = True
            break
        gl = a * g
        Hl = np.outer(a, a) * stats.hess(a) + np.diag(a * g)
        step = None
        try:
            step = np.linalg.solve(Hl, -gl)
        except np.linalg.LinAlgError:
            pass
        if step is None or not np.all(np.isfinite(step)) or step @ gl <= 0.0:
            step = gl / np.linalg.norm(gl)
        accepted = False
        t = 1.0
        for _ in range(31):
            xn = x + t * step
            with np.errstate(over="ignore"):
                an = np.exp(xn)
            lln = stats.loglik(an)
            if np.isfinite(lln) and lln > ll:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        rel = float(np.max(np.abs(np.exp(xn) - a) / a))
        x, ll = xn, lln
        if rel < step_tol:
            converged = True
            break
    a = np.exp(x)
    gnorm = float(np.max(np.abs(stats.grad(a))))
    if gnorm < grad_tol:
        converged = True
    return a, ll, iterations, gnorm, converged


def _fit_arrays(ratios: np.ndarray, k: np.ndarray) -> DirichletParams:
    """Fit on dense arrays (cells beyond each row's prefix ignored); used
    by the resampling modules to avoid triangle re-validation per replicate."""
    stats = _Stats(ratios, k)
    a_start = _starting_values(ratios, k, stats)
    a, _, _, _, converged = _newton(stats, a_start, 200, 1e-8, 1e-6)
    if not converged:
        raise ConvergenceError("refit did not converge")
    phi = (a.sum() / np.cumsum(a)[np.asarray(k) - 1]) * stats.s
    return DirichletParams(a, 1.0, phi)


def profile_phi(a: np.ndarray, b_n: float, t: LossRatioTriangle) -> np.ndarray:
    """Closed-form maximizing scales given the shape parameters.

    For a fully developed row the scale is (a0 + b_n - 1)/a0 times the
    observed ultimate; for a partial row the denominator is the sum of
    shapes over its observed development years.
    """
    a = np.asarray(a, dtype=float)
    if a.size != t.n or np.any(a <= 0):
        raise ValueError(f"need {t.n} positive shape parameters")
    if b_n < 1.0:
        raise ValueError("the tail shape parameter must be >= 1")
    c = np.cumsum(a)
    s = t.observed_cumulative()
    return (c[-1] + b_n - 1.0) / c[t.k - 1] * s


def fit_mle(
    t: LossRatioTriangle,
    max_iterations: int = 200,
    step_tol: float = 1e-8,
    grad_tol: float = 1e-6,
) -> FitResult:
    """Fit the reserving model by profiled Newton-Raphson.

    Raises
    ------
    IdentificationError
        If some development year is observed by no accident year.
    ConvergenceError
        If the iteration budget is exhausted without meeting the step or
        gradient tolerance.
    """
    ratios = np.nan_to_num(t.ratios, nan=0.0)
    stats = _Stats(ratios, t.k)
    a_start = _starting_values(ratios, t.k, stats)
    a, ll, iterations, gnorm, converged = _newton(
        stats, a_start, max_iterations, step_tol, grad_tol
    )
    if not converged:
        raise ConvergenceError(
            f"no convergence after {iterations} iterations (gradient norm {gnorm:.3g})"
        )
    phi = profile_phi(a, 1.0, t)
    theta = DirichletParams(a, 1.0, phi)
    return FitResult(theta, float(ll), iterations, converged, gnorm, t.years)


def profiled_loglik(a: np.ndarray, t: LossRatioTriangle) -> float:
    """Log-likelihood at shapes ``a`` with the tail shape at 1 and the
    scales at their profiled optimum."""
    return _Stats(np.nan_to_num(t.ratios, nan=0.0), t.k).loglik(np.asarray(a, dtype=float))


def profiled_gradient(a: np.ndarray, t: LossRatioTriangle) -> np.ndarray:
    """Analytic gradient of :func:`profiled_loglik` in the shape parameters."""
    return _Stats(np.nan_to_num(t.ratios, nan=0.0), t.k).grad(np.asarray(a, dtype=float))


def profiled_hessian(a: np.ndarray, t: LossRatioTriangle) -> np.ndarray:
    """Analytic Hessian of :func:`profiled_loglik` in the shape parameters."""
    return _Stats(np.nan_to_num(t.ratios, nan=0.0), t.k).hess(np.asarray(a, dtype=float))
