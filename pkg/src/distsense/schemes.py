"""Named sensing strategies: how the probe is prepared and how well it does.

A :class:`SchemeSpec` only describes a strategy; :func:`build_probe` turns it
into a Gaussian state and :func:`evaluate_scheme` reports its quantum bound and,
for zero-mean probes, the bound reached by homodyne detection.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bounds
from .errors import InvalidArgument, UnsupportedInput
from .fisher import FisherMatrix, CLASSICAL, homodyne_covariance, gaussian_cfim, qcrb, qfim_pure
from .gaussian_core import (
    GaussianState,
    WeightVector,
    apply_symplectic,
    as_weights,
    beam_splitter,
    build_bsn_from_weights,
    displace,
    embed,
    squeezer,
    vacuum,
)

COHERENT_PRODUCT = "coherent-product"
PRODUCT_SQUEEZED = "product-squeezed"
TWO_GROUP = "two-group"
NAIVE_GLOBAL = "naive-global"
CUSTOM_TWO_MODE = "custom-two-mode"
KINDS = (COHERENT_PRODUCT, PRODUCT_SQUEEZED, TWO_GROUP, NAIVE_GLOBAL, CUSTOM_TWO_MODE)

ENERGY_TOL = 1e-8


@dataclass(frozen=True)
class CustomTwoMode:
    """Parameters of ``B(theta) D1(alpha1) S1(xi1) D2(alpha2) S2(xi2) |00>``.

    ``xi_k = r_k e^{i varphi_k}``; ``alpha_k`` are complex amplitudes.
    """

    r1: float
    varphi1: float
    r2: float
    varphi2: float
    alpha1: complex
    alpha2: complex
    theta: float

    @property
    def n_total(self):
        return float(np.sinh(self.r1) ** 2 + np.sinh(self.r2) ** 2 + abs(self.alpha1) ** 2 + abs(self.alpha2) ** 2)


@dataclass(frozen=True)
class SchemeSpec:
    """Declarative sensing strategy.

    Args:
        kind (str): one of :data:`KINDS`.
        weights (WeightVector or sequence): weights of the global parameter.
        n_total (float): total mean photon number in the probed modes. Optional
            for ``custom-two-mode``, where it follows from the parameters.
        custom_params (CustomTwoMode or tuple): only for ``custom-two-mode``.
    """

    kind: str
    weights: WeightVector
    n_total: Optional[float] = None
    custom_params: Optional[CustomTwoMode] = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown scheme kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "weights", as_weights(self.weights))
        if (self.custom_params is not None) != (self.kind == CUSTOM_TWO_MODE):
            raise InvalidArgument("custom_params must be given exactly for the custom-two-mode kind")
        if self.kind == CUSTOM_TWO_MODE:
            params = self.custom_params
            if not isinstance(params, CustomTwoMode):
                params = CustomTwoMode(*params)
                object.__setattr__(self, "custom_params", params)
            if self.weights.n_modes != 2:
                raise InvalidArgument("custom-two-mode scheme needs exactly two weights")
            if self.n_total is None:
                object.__setattr__(self, "n_total", params.n_total)
            elif abs(params.n_total - self.n_total) > ENERGY_TOL * max(1.0, self.n_total):
                raise InvalidArgument(
                    f"custom parameters carry {params.n_total} photons, spec says {self.n_total}"
                )
        if self.n_total is None or not np.isfinite(self.n_total) or self.n_total <= 0:
            raise InvalidArgument(f"n_total must be positive, got {self.n_total}")

    @property
    def n_modes(self):
        return self.weights.n_modes


@dataclass(frozen=True)
class SqueezeSource:
    """One squeezed vacuum and the modes its network feeds."""

    modes: tuple
    r: float


def squeeze_sources(spec):
    """Squeezed-vacuum inputs of a zero-mean scheme, one per independent network."""
    w = spec.weights
    if spec.kind == PRODUCT_SQUEEZED:
        n_i = bounds.allocate_product(w, spec.n_total).n_bar
        return [SqueezeSource((k,), float(np.arcsinh(np.sqrt(n)))) for k, n in enumerate(n_i)]
    if spec.kind == TWO_GROUP:
        n_groups = bounds.allocate_groups(w, spec.n_total).n_bar
        return [
            SqueezeSource(w.group_modes(sign), float(np.arcsinh(np.sqrt(n))))
            for sign, n in zip((1, -1), n_groups)
            if w.group_modes(sign)
        ]
    if spec.kind == NAIVE_GLOBAL:
        return [SqueezeSource(tuple(range(w.n_modes)), float(np.arcsinh(np.sqrt(spec.n_total))))]
    raise UnsupportedInput(f"{spec.kind} scheme is not a squeezed-vacuum scheme")


def build_probe(spec):
    """Prepare the probe state (before phase encoding) described by ``spec``."""
    m = spec.n_modes
    w = spec.weights
    if spec.kind == COHERENT_PRODUCT:
        state = vacuum(m)
        for k, wk in enumerate(w.w):
            state = displace(state, k, np.sqrt(abs(wk) * spec.n_total), 0.0)
        return state
    if spec.kind == CUSTOM_TWO_MODE:
        p = spec.custom_params
        state = vacuum(2)
        for mode, (r, varphi, alpha) in enumerate(((p.r1, p.varphi1, p.alpha1), (p.r2, p.varphi2, p.alpha2))):
            state = apply_symplectic(state, squeezer(r, varphi, mode, 2))
            state = displace(state, mode, complex(alpha).real, complex(alpha).imag)
        # exp[i theta (a1 a2^dag - a1^dag a2)] is the splitter with angle -theta
        return apply_symplectic(state, beam_splitter(-p.theta, 0, 1, 2))

    state = vacuum(m)
    for source in squeeze_sources(spec):
        lead = source.modes[0]
        state = apply_symplectic(state, squeezer(source.r, 0.0, lead, m))
        if len(source.modes) > 1:
            bsn = build_bsn_from_weights(np.abs(w.w[list(source.modes)]))
            state = apply_symplectic(state, embed(bsn, source.modes, m))
    return state


def _ccrb(probe, phases, angles, w):
    cov, dcov = homodyne_covariance(probe, phases, angles)
    try:
        return qcrb(gaussian_cfim(cov, dcov), w)
    except Exception:  # singular outcome model or weights outside support
        return np.inf


def _golden_section(f, lo, hi, tol=1e-12, max_iter=200):
    inv_phi = (np.sqrt(5.0) - 1) / 2
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _offset_candidates(r):
    t = np.tanh(2 * r)
    base = [np.arccos(t), 0.5 * np.arccos(t)]
    cands = []
    for c in base:
        for sgn in (1, -1):
            for shift in (0.0, np.pi / 2):
                cands.append(sgn * c + shift)
    return cands


def homodyne_offsets(spec):
    """Optimal net rotation ``phase - angle`` for each squeeze source.

    Each source's offset is seeded from the analytic optimal-angle formulas
    (main-text and appendix variants, both squeezing-axis orientations),
    then refined by golden-section search on the homodyne bound. Only the
    net rotation enters the outcome model, so the offsets are found at zero
    phase and do not depend on the encoded phases.

    Returns:
        list[float]: one offset per entry of :func:`squeeze_sources`.
    """
    sources = squeeze_sources(spec)
    probe = build_probe(spec)
    phases = np.zeros(spec.n_modes)
    w = spec.weights.w
    offsets = [np.pi / 4] * len(sources)

    def angles_for(offs):
        angles = np.zeros(spec.n_modes)
        for src, c in zip(sources, offs):
            angles[list(src.modes)] = -c
        return angles

    for k, src in enumerate(sources):
        if src.r == 0:
            continue

        def objective(c, k=k):
            trial = list(offsets)
            trial[k] = c
            return _ccrb(probe, phases, angles_for(trial), w)

        seed = min(_offset_candidates(src.r), key=objective)
        # stay clear of the stationary points of the quadrature variance
        frac = np.mod(seed, np.pi / 2)
        half = 0.5 * min(frac, np.pi / 2 - frac)
        offsets[k] = _golden_section(objective, seed - half, seed + half)
    return offsets


def homodyne_angles(spec, phases=None):
    """Local-oscillator phases that make homodyne detection optimal."""
    m = spec.n_modes
    phases = np.zeros(m) if phases is None else np.asarray(phases, dtype=float)
    offsets = homodyne_offsets(spec)
    angles = np.array(phases, dtype=float)
    for src, c in zip(squeeze_sources(spec), offsets):
        angles[list(src.modes)] = phases[list(src.modes)] - c
    return angles


@dataclass(frozen=True)
class SchemeReport:
    qcrb: float
    homodyne_ccrb: Optional[float]
    angles: Optional[np.ndarray] = None


def homodyne_fisher(spec, phases=None):
    """Homodyne CFIM of a scheme at its optimal angles."""
    m = spec.n_modes
    phases = np.zeros(m) if phases is None else np.asarray(phases, dtype=float)
    angles = homodyne_angles(spec, phases)
    cov, dcov = homodyne_covariance(build_probe(spec), phases, angles)
    return gaussian_cfim(cov, dcov), angles


def evaluate_scheme(spec, phases=None, w=None):
    """Quantum bound of the scheme's probe and, if zero-mean, the homodyne bound.

    Args:
        spec (SchemeSpec): strategy to evaluate.
        phases (array): encoded phases; bounds of zero-mean probes do not depend on them.
        w (WeightVector): weights to bound; defaults to ``spec.weights``.
    """
    w = spec.weights if w is None else as_weights(w)
    probe = build_probe(spec)
    q = qcrb(qfim_pure(probe), w)
    if not probe.is_zero_mean() or spec.kind == CUSTOM_TWO_MODE:
        return SchemeReport(q, None)
    f, angles = homodyne_fisher(spec, phases)
    return SchemeReport(q, qcrb(f, w), angles)


def naive_global(weights, n_total):
    """Sign-blind scheme: one squeezed vacuum spread over all modes by ``|w|``."""
    return SchemeSpec(NAIVE_GLOBAL, weights, n_total)
