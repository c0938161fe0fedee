"""Shared fixtures: the bundled insurer dataset, cached fits, and the
heavier resampling runs reused across test modules.

Reference values for the bundled triangle are frozen here once and used
wherever a test checks reproduction of the known results for this
dataset.
"""

import time

import numpy as np
import pytest

import dirichlet_reserving as dr

# ---------------------------------------------------------------------------
# frozen reference results for the bundled insurer (10-year fit = accident
# years 1997-2006; 18-year fit = 1989-2006)

REF_A_10 = np.array(
    [1293.81, 1006.78, 644.73, 497.13, 338.73, 249.80, 186.01, 138.62, 93.51, 63.16]
)
REF_A_18 = np.array(
    [347.61, 269.54, 166.12, 126.00, 82.46, 56.37, 38.40, 27.52, 17.63, 12.06]
)
REF_SE_A1_10 = 326.87

YEARS_LAST10 = list(range(1997, 2007))

REF_PHI_10 = np.array(
    [0.629, 0.719, 0.766, 0.774, 0.773, 0.745, 0.758, 0.725, 0.766, 0.682]
)
REF_PHI_18_LAST10 = np.array(
    [0.629, 0.716, 0.759, 0.761, 0.753, 0.720, 0.728, 0.691, 0.724, 0.643]
)

REF_GAMMA_DIR_10 = np.array([1.778, 1.280, 1.169, 1.098, 1.066, 1.046, 1.033, 1.021, 1.014])
REF_GAMMA_DIR_18 = np.array([1.775, 1.269, 1.161, 1.091, 1.057, 1.037, 1.025, 1.016, 1.011])
REF_GAMMA_MACK_10 = np.array([1.779, 1.281, 1.169, 1.098, 1.066, 1.046, 1.033, 1.022, 1.014])
REF_GAMMA_MACK_18 = np.array([1.781, 1.269, 1.160, 1.090, 1.057, 1.037, 1.025, 1.016, 1.010])

REF_PRED_DIR_10 = np.array([0.629, 0.718, 0.765, 0.774, 0.772, 0.745, 0.758, 0.725, 0.766, 0.681])
REF_PRED_DIR_18 = np.array([0.629, 0.715, 0.758, 0.761, 0.753, 0.719, 0.727, 0.691, 0.723, 0.642])
REF_PRED_MACK_10 = np.array([0.629, 0.719, 0.766, 0.774, 0.773, 0.745, 0.759, 0.726, 0.767, 0.683])
REF_PRED_MACK_18 = np.array([0.629, 0.716, 0.759, 0.761, 0.753, 0.720, 0.727, 0.690, 0.722, 0.644])

REF_INT_DIR_10 = [
    (0.629, 0.629), (0.714, 0.723), (0.758, 0.772), (0.765, 0.783), (0.760, 0.784),
    (0.730, 0.759), (0.742, 0.776), (0.704, 0.747), (0.734, 0.796), (0.638, 0.723),
]
REF_INT_DIR_18 = [
    (0.629, 0.629), (0.709, 0.720), (0.749, 0.765), (0.747, 0.772), (0.736, 0.767),
    (0.698, 0.739), (0.699, 0.752), (0.657, 0.723), (0.676, 0.771), (0.576, 0.708),
]

# realized cumulative loss ratios at the 10th development year
ACTUAL_LAST10 = np.array([0.629, 0.719, 0.763, 0.767, 0.765, 0.741, 0.722, 0.705, 0.729, 0.629])

# hierarchical run with the 19% expected-tail constraint: reference interval
# for accident year 2006 and the reference average interval length
REF_TAIL_INT_2006 = (0.603, 0.718)
REF_TAIL_AVG_LEN = 0.038

BOOT_SEED = 20240801
BOOT_NSIM = 1000


@pytest.fixture(scope="session")
def triangle18():
    return dr.load_triangle(dr.example_insurer_path())


@pytest.fixture(scope="session")
def lr18(triangle18):
    return dr.to_loss_ratios(triangle18)


@pytest.fixture(scope="session")
def triangle10(triangle18):
    return dr.most_recent_years(triangle18, 10)


@pytest.fixture(scope="session")
def lr10(triangle10):
    return dr.to_loss_ratios(triangle10)


@pytest.fixture(scope="session")
def fits(lr10, lr18):
    """Both MLE fits plus their wall time '(fit10, fit18, elapsed)'."""
    start = time.perf_counter()
    fit10 = dr.fit_mle(lr10)
    fit18 = dr.fit_mle(lr18)
    return fit10, fit18, time.perf_counter() - start


@pytest.fixture(scope="session")
def fit10(fits):
    return fits[0]


@pytest.fixture(scope="session")
def fit18(fits):
    return fits[1]


@pytest.fixture(scope="session")
def boot10(fit10, lr10):
    start = time.perf_counter()
    pd = dr.bias_corrected_bootstrap(fit10.theta_hat, lr10, n_sim=BOOT_NSIM, seed=BOOT_SEED)
    return pd, time.perf_counter() - start


@pytest.fixture(scope="session")
def boot18(fit18, lr18):
    start = time.perf_counter()
    pd = dr.bias_corrected_bootstrap(fit18.theta_hat, lr18, n_sim=BOOT_NSIM, seed=BOOT_SEED)
    return pd, time.perf_counter() - start


@pytest.fixture(scope="session")
def bayes_tail18(lr18):
    """Hierarchical run with the 19% expected-tail constraint at default
    sampler settings, plus its posterior predictive and wall time."""
    spec = dr.BayesSpec(tail_alpha=0.19)
    start = time.perf_counter()
    ps = dr.run_mcmc(lr18, spec, seed=5)
    pd = dr.posterior_predict(ps, lr18, seed=5)
    return ps, pd, time.perf_counter() - start


@pytest.fixture(scope="session")
def gof10(lr10):
    return dr.gof_test(lr10, alpha=0.05, n_boot=500, seed=1)


@pytest.fixture(scope="session")
def gof18(lr18):
    return dr.gof_test(lr18, alpha=0.05, n_boot=500, seed=1)


@pytest.fixture(scope="session")
def holdout():
    return dr.load_holdout(dr.example_holdout_path())
