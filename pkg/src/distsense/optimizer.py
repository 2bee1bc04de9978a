"""Numerical minimisation of the two-mode quantum bound over displaced squeezed
inputs mixed on one beam splitter.

The energy split between squeezing and displacement is fixed by ``squeeze_ratio``;
within each budget the split between the two modes is a ``sin^2`` fraction,
so every trial point satisfies the photon-number constraint exactly.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.stats import qmc

from .errors import InvalidArgument, NotEstimable, NumericalFailure
from .fisher import qcrb, qfim_matrix
from .gaussian_core import as_weights

SEED = 0x5EED
N_RESTARTS = 16
MAX_ITER = 5000
XATOL = 1e-9
FATOL = 1e-15
PENALTY = 1e6


@dataclass(frozen=True)
class TwoModeParams:
    r1: float
    r2: float
    varphi1: float
    varphi2: float
    a1_mag: float
    a1_arg: float
    a2_mag: float
    a2_arg: float
    theta: float

    @property
    def n_squeeze(self):
        return float(np.sinh(self.r1) ** 2 + np.sinh(self.r2) ** 2)

    @property
    def n_displace(self):
        return float(self.a1_mag**2 + self.a2_mag**2)


@dataclass
class TwoModeResult:
    """Best point of :func:`minimize_two_mode`.

    ``theta_effective`` is the smallest beam-splitter angle (folded into
    ``[-pi/4, pi/4]``) that disentangles the optimised probe; it is zero
    whenever the probe is a product state, even if the raw ``params.theta``
    is not (identical inputs make the splitter act trivially).
    """

    params: TwoModeParams
    qcrb: float
    theta_effective: float
    converged: bool
    restart_values: list = field(default_factory=list)
    restart_converged: list = field(default_factory=list)


class _Problem:
    """Maps the free coordinates to a two-mode probe for one energy budget."""

    def __init__(self, w, n_total, squeeze_ratio):
        self.w = as_weights(w)
        if self.w.n_modes != 2:
            raise InvalidArgument("two-mode optimisation needs exactly two weights")
        if not 0.0 <= squeeze_ratio <= 1.0:
            raise InvalidArgument(f"squeeze_ratio must lie in [0, 1], got {squeeze_ratio}")
        if n_total <= 0:
            raise InvalidArgument("n_total must be positive")
        self.n_s = squeeze_ratio * n_total
        self.n_d = (1.0 - squeeze_ratio) * n_total
        # coordinate names in order; budgets that are empty drop their coordinates
        names = []
        if self.n_s > 0:
            names += ["u", "varphi1", "varphi2"]
        if self.n_d > 0:
            names += ["v", "arg1", "arg2"]
        names.append("theta")
        self.names = names
        self.dim = len(names)

    def params(self, x):
        p = dict(zip(self.names, x))
        u, v = p.get("u", 0.0), p.get("v", 0.0)
        r1 = np.arcsinh(np.sqrt(self.n_s) * abs(np.sin(u)))
        r2 = np.arcsinh(np.sqrt(self.n_s) * abs(np.cos(u)))
        return TwoModeParams(
            r1=float(r1),
            r2=float(r2),
            varphi1=float(p.get("varphi1", 0.0)),
            varphi2=float(p.get("varphi2", 0.0)),
            a1_mag=float(np.sqrt(self.n_d) * abs(np.sin(v))),
            a1_arg=float(p.get("arg1", 0.0)),
            a2_mag=float(np.sqrt(self.n_d) * abs(np.cos(v))),
            a2_arg=float(p.get("arg2", 0.0)),
            theta=float(p["theta"]),
        )

    def bounds_box(self):
        span = {"u": np.pi / 2, "v": np.pi / 2, "theta": np.pi}
        return np.array([span.get(n, 2 * np.pi) for n in self.names])

    def objective(self, x):
        gamma, d = probe_moments(self.params(x))
        try:
            return qcrb(qfim_matrix(gamma, d), self.w)
        except (NotEstimable, np.linalg.LinAlgError):
            return PENALTY


def _squeeze_block(r, varphi):
    ch, sh = np.cosh(r), np.sinh(r)
    cp, sp = np.cos(varphi), np.sin(varphi)
    return np.array([[ch + sh * cp, sh * sp], [sh * sp, ch - sh * cp]])


def probe_moments(p):
    """Covariance and first moments of ``B(theta) D1 S1 D2 S2 |00>``.

    The splitter ``exp[i theta (a1 a2^dag - a1^dag a2)]`` mixes the modes as
    ``a1 -> a1 cos(theta) - a2 sin(theta)``.
    """
    s = np.zeros((4, 4))
    s[:2, :2] = _squeeze_block(p.r1, p.varphi1)
    s[2:, 2:] = _squeeze_block(p.r2, p.varphi2)
    gamma = 0.5 * s @ s.T
    d = np.sqrt(2.0) * np.array(
        [
            p.a1_mag * np.cos(p.a1_arg),
            p.a1_mag * np.sin(p.a1_arg),
            p.a2_mag * np.cos(p.a2_arg),
            p.a2_mag * np.sin(p.a2_arg),
        ]
    )
    b = _splitter(-p.theta)
    return b @ gamma @ b.T, b @ d


def _splitter(t):
    c, s = np.cos(t), np.sin(t)
    return np.kron(np.array([[c, s], [-s, c]]), np.eye(2))


def _inter_mode_norm(gamma, t):
    b = _splitter(t)
    g = b @ gamma @ b.T
    return float(np.linalg.norm(g[:2, 2:]))


def effective_theta(gamma, tol=1e-9):
    """Smallest splitter angle that removes the inter-mode covariance block.

    A pure two-mode Gaussian state is a product state exactly when that block
    vanishes, so a result of zero means the probe is unentangled.
    """
    scale = max(1.0, float(np.abs(gamma).max()))
    if _inter_mode_norm(gamma, 0.0) <= tol * scale:
        return 0.0
    grid = np.linspace(-np.pi / 4, np.pi / 4, 721)
    vals = np.array([_inter_mode_norm(gamma, t) for t in grid])
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(lambda t: _inter_mode_norm(gamma, t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x)


def _seeds(dim, n_restarts, box):
    sobol = qmc.Sobol(dim, scramble=True, seed=SEED)
    return sobol.random(n_restarts) * box


def _simplex_diameter(simplex):
    return float(np.max(np.abs(simplex[1:] - simplex[0]))) if len(simplex) > 1 else 0.0


def minimize_two_mode(w, n_total, squeeze_ratio, n_restarts=N_RESTARTS):
    """Minimise the two-mode quantum bound at a fixed squeezing share.

    Nelder–Mead runs from ``n_restarts`` scrambled-Sobol starting points; the
    best end point is returned.

    Raises:
        NumericalFailure: no restart converged; ``best`` holds the best
            :class:`TwoModeResult` found anyway.
    """
    prob = _Problem(w, n_total, squeeze_ratio)
    box = prob.bounds_box()
    values, flags, ends = [], [], []
    for x0 in _seeds(prob.dim, n_restarts, box):
        simplex = x0 + np.vstack([np.zeros(prob.dim), 0.25 * np.eye(prob.dim)])
        res = minimize(
            prob.objective,
            x0,
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": XATOL, "fatol": FATOL, "maxiter": MAX_ITER,
                     "maxfev": 4 * MAX_ITER},
        )
        diameter = _simplex_diameter(res.final_simplex[0])
        values.append(float(res.fun))
        flags.append(bool(diameter <= XATOL))
        ends.append(res.x)
    best = int(np.argmin(values))
    params = prob.params(ends[best])
    gamma, _ = probe_moments(params)
    result = TwoModeResult(
        params=params,
        qcrb=values[best],
        theta_effective=effective_theta(gamma),
        converged=any(flags),
        restart_values=values,
        restart_converged=flags,
    )
    if not result.converged:
        raise NumericalFailure("no Nelder-Mead restart converged", best=result)
    return result


@dataclass
class SweepRow:
    ratio: float
    qcrb: float
    params: TwoModeParams
    theta_effective: float
    converged: bool
    restart_values: list = field(default_factory=list)


def _sweep_point(args):
    w, n_total, ratio, n_restarts = args
    try:
        res = minimize_two_mode(w, n_total, ratio, n_restarts)
    except NumericalFailure as exc:
        res = exc.best
    return SweepRow(ratio, res.qcrb, res.params, res.theta_effective, res.converged, res.restart_values)


def default_workers():
    env = os.environ.get("DISTSENSE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep_ratio(w, n_total, grid, n_restarts=N_RESTARTS, workers=None):
    """One :func:`minimize_two_mode` per squeezing share in ``grid``.

    Non-converged points are returned with ``converged=False`` rather than
    aborting the sweep. Rows are in grid order regardless of ``workers``.
    """
    grid = [float(g) for g in grid]
    if any(not 0.0 <= g <= 1.0 for g in grid):
        raise InvalidArgument("sweep ratios must lie in [0, 1]")
    if grid != sorted(grid):
        raise InvalidArgument("sweep ratios must be sorted")
    w = as_weights(w)
    jobs = [(w.raw, n_total, g, n_restarts) for g in grid]
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [_sweep_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_sweep_point, jobs))
