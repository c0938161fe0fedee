"""Scalar special functions used by the reserving likelihood.

Log-gamma, digamma and trigamma on positive real arguments, implemented
by upward recurrence to a shift threshold followed by the Bernoulli
asymptotic expansion. Works elementwise on numpy arrays.
"""

import numpy as np

_SHIFT = 10.0

# Bernoulli-series coefficients of the asymptotic expansions, ordered by
# increasing power of 1/x.
_LGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)
_DIGAMMA_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_TRIGAMMA_COEF = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def _prepare(x, name):
    scalar = np.isscalar(x) or np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.size and np.any(arr <= 0.0):
        raise ValueError(f"{name} requires a positive argument")
    return arr, scalar


def _shift_up(arr):
    """Shift every element to >= _SHIFT, returning the shifted values and
    the list of intermediate values consumed by the recurrence."""
    x = arr.copy()
    steps = []
    while True:
        low = x < _SHIFT
        if not low.any():
            break
        steps.append((low, x[low].copy()))
        x[low] += 1.0
    return x, steps


def log_gamma(x):
    """Natural log of the gamma function for x > 0."""
    arr, scalar = _prepare(x, "log_gamma")
    y, steps = _shift_up(arr)
    inv2 = 1.0 / (y * y)
    tail = np.zeros_like(y)
    for c in reversed(_LGAMMA_COEF):
        tail = (tail + c) * inv2
    tail *= y  # series runs over odd powers 1/y, 1/y^3, ...
    out = (y - 0.5) * np.log(y) - y + _HALF_LOG_2PI + tail
    for low, vals in reversed(steps):
        out[low] -= np.log(vals)
    return float(out[0]) if scalar else out


def digamma(x):
    """Derivative of log_gamma for x > 0."""
    arr, scalar = _prepare(x, "digamma")
    y, steps = _shift_up(arr)
    inv2 = 1.0 / (y * y)
    tail = np.zeros_like(y)
    for c in reversed(_DIGAMMA_COEF):
        tail = (tail + c) * inv2
    out = np.log(y) - 0.5 / y - tail
    for low, vals in reversed(steps):
        out[low] -= 1.0 / vals
    return float(out[0]) if scalar else out


def trigamma(x):
    """Derivative of digamma for x > 0."""
    arr, scalar = _prepare(x, "trigamma")
    y, steps = _shift_up(arr)
    inv = 1.0 / y
    inv2 = inv * inv
    tail = np.zeros_like(y)
    for c in reversed(_TRIGAMMA_COEF):
        tail = (tail + c) * inv2
    out = inv + 0.5 * inv2 + tail * inv
    for low, vals in reversed(steps):
        out[low] += 1.0 / (vals * vals)
    return float(out[0]) if scalar else out
