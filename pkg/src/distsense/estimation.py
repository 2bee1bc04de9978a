"""Monte Carlo check that homodyne data plus maximum likelihood reach the bound.

Outcomes are drawn from the zero-mean normal model of per-mode homodyne
detection, and the phases are re-estimated by a local maximum-likelihood fit.
The fit only needs the second-moment statistic ``S = X^T X / nu``.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidArgument, NumericalFailure, UnsupportedInput
from .fisher import gaussian_cfim, homodyne_covariance, qcrb
from .gaussian_core import as_weights
from .optimizer import default_workers
from .schemes import COHERENT_PRODUCT, CUSTOM_TWO_MODE, build_probe, homodyne_angles

ALGORITHM = "philox4x64-cholesky"
MLE_XATOL = 1e-10
MLE_FATOL = 1e-15
MLE_STEP = 0.02


@dataclass(frozen=True)
class SampleBatch:
    """``nu`` homodyne shots, one quadrature value per mode and shot.

    Attributes:
        outcomes (array): ``nu x M`` outcomes.
        seed (int): 64-bit seed of the batch generator.
        scheme (SchemeSpec): strategy that prepared the probe.
        true_phases (array): phases used to generate the data.
        angles (array): local-oscillator phases of the measurement.
        algorithm (str): identifier of the sampler.
    """

    outcomes: np.ndarray
    seed: int
    scheme: object
    true_phases: np.ndarray
    angles: np.ndarray
    algorithm: str = ALGORITHM

    @property
    def nu(self):
        return self.outcomes.shape[0]

    def second_moment(self):
        x = self.outcomes
        return x.T @ x / x.shape[0]

    def mean_flags(self, n_sigma=5.0):
        """Columns whose sample mean is farther than ``n_sigma`` standard errors from zero."""
        x = self.outcomes
        if x.shape[0] < 2:
            return np.zeros(x.shape[1], dtype=bool)
        se = x.std(axis=0, ddof=1) / np.sqrt(x.shape[0])
        return np.abs(x.mean(axis=0)) > n_sigma * se


def _check_zero_mean(scheme):
    if scheme.kind in (COHERENT_PRODUCT, CUSTOM_TWO_MODE):
        raise UnsupportedInput(f"homodyne sampling needs a squeezed-vacuum scheme, got {scheme.kind}")


def measurement_model(scheme, true_phases):
    """Probe state and optimal homodyne angles for ``scheme`` at ``true_phases``."""
    _check_zero_mean(scheme)
    phases = np.asarray(true_phases, dtype=float)
    if phases.shape != (scheme.n_modes,):
        raise InvalidArgument(f"need {scheme.n_modes} phases, got shape {phases.shape}")
    return build_probe(scheme), homodyne_angles(scheme, phases)


def sample_homodyne(scheme, true_phases, nu, seed, angles=None):
    """Draw ``nu`` i.i.d. homodyne records.

    Args:
        scheme (SchemeSpec): zero-displacement strategy.
        true_phases (array): encoded phases.
        nu (int): number of shots, at least 1.
        seed (int): seed of the Philox generator.
        angles (array): local-oscillator phases; defaults to the optimal ones.

    Returns:
        SampleBatch
    """
    if int(nu) != nu or nu < 1:
        raise InvalidArgument(f"nu must be a positive integer, got {nu}")
    probe, best_angles = measurement_model(scheme, true_phases)
    angles = best_angles if angles is None else np.asarray(angles, dtype=float)
    phases = np.asarray(true_phases, dtype=float)
    cov, _ = homodyne_covariance(probe, phases, angles)
    chol = np.linalg.cholesky(cov)
    rng = np.random.Generator(np.random.Philox(int(seed)))
    z = rng.standard_normal((int(nu), cov.shape[0]))
    return SampleBatch(z @ chol.T, int(seed), scheme, phases.copy(), np.asarray(angles, dtype=float).copy())


def mean_log_likelihood(probe, angles, second_moment, phases):
    """Per-shot Gaussian log-likelihood, up to the constant ``-M log(2 pi) / 2``."""
    cov, _ = homodyne_covariance(probe, phases, angles)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        return -np.inf
    return -0.5 * (logdet + np.trace(np.linalg.solve(cov, second_moment)))


def fit_phases(probe, angles, second_moment, init):
    """Local maximum-likelihood phases for a given second-moment statistic.

    Raises:
        NumericalFailure: Nelder–Mead did not converge.
    """
    init = np.asarray(init, dtype=float)

    def objective(p):
        value = mean_log_likelihood(probe, angles, second_moment, p)
        return -value if np.isfinite(value) else 1e300

    simplex = init + np.vstack([np.zeros(init.size), MLE_STEP * np.eye(init.size)])
    res = minimize(
        objective,
        init,
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": MLE_XATOL, "fatol": MLE_FATOL, "maxiter": 20000},
    )
    if not res.success:
        raise NumericalFailure(f"likelihood maximisation failed: {res.message}", best=res.x)
    return res.x


def mle_phi_star(batch, w, init):
    """Estimate the global parameter ``w . phi`` from one batch.

    Args:
        batch (SampleBatch): homodyne data.
        w (WeightVector or sequence): weights of the global parameter.
        init (array): starting phases, assumed close to the truth.

    Returns:
        dict: ``phi_star_hat`` and ``phases_hat``.
    """
    w = as_weights(w)
    probe = build_probe(batch.scheme)
    phases_hat = fit_phases(probe, batch.angles, batch.second_moment(), init)
    return {"phi_star_hat": float(w.w @ phases_hat), "phases_hat": phases_hat}


def observed_information(batch, phases=None, step=1e-3):
    """Negative Hessian of the mean log-likelihood (central differences)."""
    probe = build_probe(batch.scheme)
    s = batch.second_moment()
    x0 = batch.true_phases if phases is None else np.asarray(phases, dtype=float)
    m = x0.size

    def f(x):
        return mean_log_likelihood(probe, batch.angles, s, x)

    h = np.empty((m, m))
    e = np.eye(m) * step
    for i in range(m):
        for j in range(i, m):
            val = (f(x0 + e[i] + e[j]) - f(x0 + e[i] - e[j]) - f(x0 - e[i] + e[j]) + f(x0 - e[i] - e[j])) / (
                4 * step**2
            )
            h[i, j] = h[j, i] = -val
    return h


@dataclass(frozen=True)
class MonteCarloReport:
    """Spread of ``phi*`` estimates over independent batches.

    ``var_ratio_to_crb`` is ``Var(phi*_hat) nu / crb`` and ``bias`` is the
    mean error ``mean(phi*_hat) - phi*``.
    """

    var_ratio_to_crb: float
    bias: float
    bias_stderr: float
    nu: int
    batches: int
    seed: int
    crb: float
    estimates: Optional[np.ndarray] = None

    def as_dict(self):
        return {
            "var_ratio_to_crb": self.var_ratio_to_crb,
            "bias": self.bias,
            "nu": self.nu,
            "batches": self.batches,
            "seed": self.seed,
            "crb": self.crb,
        }


def batch_seeds(seed, batches):
    """Independent 64-bit seeds derived from one root seed."""
    return [int(s) for s in np.random.SeedSequence(int(seed)).generate_state(batches, dtype=np.uint64)]


def _one_batch(args):
    scheme, phases, angles, nu, seed = args
    batch = sample_homodyne(scheme, phases, nu, seed, angles=angles)
    return mle_phi_star(batch, scheme.weights, phases)["phi_star_hat"]


def homodyne_crb(scheme, true_phases):
    """Homodyne bound on ``phi*`` at the optimal angles (per shot)."""
    probe, angles = measurement_model(scheme, true_phases)
    cov, dcov = homodyne_covariance(probe, np.asarray(true_phases, dtype=float), angles)
    return qcrb(gaussian_cfim(cov, dcov), scheme.weights)


def monte_carlo(scheme, nu, batches, seed=0, true_phases=None, workers=None):
    """Repeat sampling and estimation over ``batches`` independent batches.

    Every batch starts its fit at the true phases (local estimation).
    """
    if int(batches) != batches or batches < 2:
        raise InvalidArgument(f"need at least two batches, got {batches}")
    phases = np.zeros(scheme.n_modes) if true_phases is None else np.asarray(true_phases, dtype=float)
    _, angles = measurement_model(scheme, phases)
    crb = homodyne_crb(scheme, phases)
    jobs = [(scheme, phases, angles, int(nu), s) for s in batch_seeds(seed, int(batches))]
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        est = [_one_batch(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            est = list(pool.map(_one_batch, jobs))
    est = np.array(est)
    truth = float(scheme.weights.w @ phases)
    return MonteCarloReport(
        var_ratio_to_crb=float(est.var(ddof=1) * nu / crb),
        bias=float(est.mean() - truth),
        bias_stderr=float(est.std(ddof=1) / np.sqrt(est.size)),
        nu=int(nu),
        batches=int(batches),
        seed=int(seed),
        crb=float(crb),
        estimates=est,
    )
