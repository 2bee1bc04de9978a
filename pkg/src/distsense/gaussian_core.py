r"""Multimode Gaussian states and the symplectic gate algebra acting on them.

Conventions used throughout the package:

* quadratures are interleaved, :math:`Q = (x_1, p_1, \dots, x_M, p_M)` with
  :math:`[Q_j, Q_k] = i\Omega_{jk}` and :math:`\Omega = 1_M \otimes [[0, 1], [-1, 0]]`;
* the vacuum covariance is :math:`\Gamma = 1/2`, so a coherent amplitude
  :math:`\alpha` sits at :math:`d = \sqrt{2}(\mathrm{Re}\,\alpha, \mathrm{Im}\,\alpha)`;
* a gate ``S`` acts as :math:`\Gamma \to S\Gamma S^T`, :math:`d \to Sd`, where ``S``
  is the Heisenberg action :math:`U^\dagger Q U = SQ` of the gate unitary ``U``.

Phases are encoded by :math:`e^{-i\phi \hat N}`, whose symplectic block is
``[[cos, sin], [-sin, cos]]``. Individual quadrature signs depend on this
choice; every bound computed from the states does not.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, UnsupportedInput

SYMMETRY_TOL = 1e-12
UNCERTAINTY_TOL = 1e-10
PURITY_TOL = 1e-9
SYMPLECTIC_TOL = 1e-10

OMEGA2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def omega(n_modes):
    """Symplectic form for ``n_modes`` modes in interleaved ordering."""
    return np.kron(np.eye(n_modes), OMEGA2)


def rotation2(phi):
    """2x2 phase-space rotation produced by :math:`e^{-i\\phi\\hat N}`."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]])


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state given by its quadrature covariance and first moments.

    Args:
        gamma (array): ``2M x 2M`` real symmetric covariance matrix.
        d (array): length ``2M`` first-moment vector. Defaults to zero.
    """

    gamma: np.ndarray
    d: np.ndarray = field(default=None)

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1] or gamma.shape[0] % 2:
            raise InvalidArgument(f"covariance must be 2M x 2M, got shape {gamma.shape}")
        if gamma.shape[0] == 0:
            raise InvalidArgument("a state needs at least one mode")
        if not np.allclose(gamma, gamma.T, rtol=0, atol=SYMMETRY_TOL):
            raise InvalidArgument("covariance matrix is not symmetric")
        d = np.zeros(gamma.shape[0]) if self.d is None else np.asarray(self.d, dtype=float)
        if d.shape != (gamma.shape[0],):
            raise InvalidArgument(f"first moments must have length {gamma.shape[0]}, got {d.shape}")
        object.__setattr__(self, "gamma", _frozen(0.5 * (gamma + gamma.T)))
        object.__setattr__(self, "d", _frozen(d))

    @property
    def n_modes(self):
        return self.gamma.shape[0] // 2

    def block(self, i, j):
        """The 2x2 covariance block between modes ``i`` and ``j``."""
        return self.gamma[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]

    def is_physical(self, tol=UNCERTAINTY_TOL):
        """Check the uncertainty relation :math:`\\Gamma + i\\Omega/2 \\geq 0`."""
        herm = self.gamma + 0.5j * omega(self.n_modes)
        return bool(np.linalg.eigvalsh(herm).min() >= -tol)

    def purity_det(self):
        """:math:`\\det(2\\Gamma)`, equal to one for pure states."""
        return float(np.linalg.det(2.0 * self.gamma))

    def is_pure(self, tol=PURITY_TOL):
        return abs(self.purity_det() - 1.0) <= tol

    def is_zero_mean(self, tol=1e-12):
        return float(np.linalg.norm(self.d)) < tol

    def total_photon_number(self):
        return float((np.trace(self.gamma) - self.n_modes) / 2 + self.d @ self.d / 2)


@dataclass(frozen=True)
class WeightVector:
    """Signed weights of the global parameter, L1-normalised at construction.

    Args:
        raw (sequence of float): the weights as given by the user. Every entry
            must be nonzero; ``w`` holds ``raw / ||raw||_1``.
    """

    raw: np.ndarray
    w: np.ndarray = field(init=False)
    pos_modes: tuple = field(init=False)
    neg_modes: tuple = field(init=False)

    ZERO_TOL = 1e-14

    def __post_init__(self):
        raw = np.atleast_1d(np.asarray(self.raw, dtype=float))
        if raw.ndim != 1 or raw.size == 0:
            raise InvalidArgument("weights must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(raw)):
            raise InvalidArgument("weights must be finite")
        if np.any(np.abs(raw) < self.ZERO_TOL):
            bad = [int(k) for k in np.flatnonzero(np.abs(raw) < self.ZERO_TOL)]
            raise InvalidArgument(f"weights must be nonzero; zero entries at {bad}")
        object.__setattr__(self, "raw", _frozen(raw))
        object.__setattr__(self, "w", _frozen(raw / np.abs(raw).sum()))
        object.__setattr__(self, "pos_modes", tuple(int(k) for k in np.flatnonzero(raw > 0)))
        object.__setattr__(self, "neg_modes", tuple(int(k) for k in np.flatnonzero(raw < 0)))

    def __len__(self):
        return self.w.size

    @property
    def n_modes(self):
        return self.w.size

    @property
    def mixed_signs(self):
        return bool(self.pos_modes and self.neg_modes)

    def group(self, sign):
        """Normalised weights of the ``+1`` or ``-1`` group (not renormalised)."""
        return self.w[list(self.group_modes(sign))]

    def group_modes(self, sign):
        if sign not in (1, -1):
            raise InvalidArgument("sign must be +1 or -1")
        return self.pos_modes if sign > 0 else self.neg_modes

    def group_norms(self):
        """``(||w_+||_1, ||w_-||_1)`` of the normalised weights."""
        return (float(np.abs(self.group(1)).sum()), float(np.abs(self.group(-1)).sum()))


def as_weights(w):
    return w if isinstance(w, WeightVector) else WeightVector(w)


def _check_mode(mode, n_modes):
    if not 0 <= mode < n_modes:
        raise InvalidArgument(f"mode {mode} out of range for {n_modes} modes")


def _check_n_modes(n_modes):
    if int(n_modes) != n_modes or n_modes < 1:
        raise InvalidArgument(f"n_modes must be a positive integer, got {n_modes}")


def embed(block, modes, n_modes):
    """Embed a symplectic acting on ``modes`` (in that order) into ``n_modes`` modes."""
    s = np.eye(2 * n_modes)
    idx = np.ravel([[2 * m, 2 * m + 1] for m in modes])
    s[np.ix_(idx, idx)] = block
    return s


def is_symplectic(s, tol=SYMPLECTIC_TOL):
    s = np.asarray(s, dtype=float)
    om = omega(s.shape[0] // 2)
    return bool(np.allclose(s @ om @ s.T, om, rtol=0, atol=tol))


def vacuum(n_modes):
    _check_n_modes(n_modes)
    return GaussianState(0.5 * np.eye(2 * n_modes))


def phase_shifter(phi, mode, n_modes):
    """Symplectic of :math:`e^{-i\\phi\\hat N}` on ``mode``."""
    _check_n_modes(n_modes)
    _check_mode(mode, n_modes)
    return embed(rotation2(phi), [mode], n_modes)


def beam_splitter(theta, i, j, n_modes):
    """Symplectic of :math:`\\exp[\\theta(a_i^\\dagger a_j - a_i a_j^\\dagger)]`.

    In the Heisenberg picture ``a_i -> a_i cos(theta) + a_j sin(theta)`` and
    ``a_j -> a_j cos(theta) - a_i sin(theta)``; ``theta = pi/4`` is balanced.
    """
    _check_n_modes(n_modes)
    _check_mode(i, n_modes)
    _check_mode(j, n_modes)
    if i == j:
        raise InvalidArgument("beam splitter needs two distinct modes")
    c, s = np.cos(theta), np.sin(theta)
    return embed(np.kron(np.array([[c, s], [-s, c]]), np.eye(2)), [i, j], n_modes)


def squeezer(r, varphi, mode, n_modes):
    """Single-mode squeezing symplectic.

    The gate is :math:`\\exp[\\tfrac{r}{2}(e^{i\\varphi}a^{\\dagger 2} - e^{-i\\varphi}a^2)]`,
    i.e. ``a -> a cosh r + e^{i varphi} a^dag sinh r``. From vacuum at
    ``varphi = 0`` it yields the covariance ``diag(e^{2r}, e^{-2r}) / 2``.
    """
    _check_n_modes(n_modes)
    _check_mode(mode, n_modes)
    if not np.isfinite(r) or not np.isfinite(varphi):
        raise InvalidArgument("squeezing parameters must be finite")
    ch, sh = np.cosh(r), np.sinh(r)
    cp, sp = np.cos(varphi), np.sin(varphi)
    block = np.array([[ch + sh * cp, sh * sp], [sh * sp, ch - sh * cp]])
    return embed(block, [mode], n_modes)


def apply_symplectic(state, s):
    s = np.asarray(s, dtype=float)
    if s.shape != state.gamma.shape:
        raise InvalidArgument(f"symplectic of shape {s.shape} does not act on {state.n_modes} modes")
    return GaussianState(s @ state.gamma @ s.T, s @ state.d)


def displace(state, mode, alpha_re, alpha_im):
    """Displace ``mode`` by :math:`\\alpha`; ``d`` gains :math:`\\sqrt2(\\mathrm{Re}\\,\\alpha, \\mathrm{Im}\\,\\alpha)`."""
    _check_mode(mode, state.n_modes)
    d = np.array(state.d)
    d[2 * mode] += np.sqrt(2.0) * alpha_re
    d[2 * mode + 1] += np.sqrt(2.0) * alpha_im
    return GaussianState(state.gamma, d)


def mode_photon_number(state, mode):
    _check_mode(mode, state.n_modes)
    g = state.block(mode, mode)
    dm = state.d[2 * mode : 2 * mode + 2]
    return float((np.trace(g) - 1.0) / 2 + dm @ dm / 2)


def photon_number_variance(state, mode):
    """Variance of :math:`\\hat N` on one mode.

    Uses ``(2 Tr[G^2] - 1)/4 + d^T G d`` with ``G`` the mode's covariance block.
    """
    _check_mode(mode, state.n_modes)
    g = state.block(mode, mode)
    dm = state.d[2 * mode : 2 * mode + 2]
    return float((2 * np.trace(g @ g) - 1.0) / 4 + dm @ g @ dm)


def photon_correlation(state, i, j):
    """Photon-number covariance :math:`\\langle N_iN_j\\rangle - \\langle N_i\\rangle\\langle N_j\\rangle`
    of a zero-mean Gaussian state, for two distinct modes.

    By Isserlis' theorem this is half the squared Frobenius norm of the
    off-diagonal covariance block, hence never negative.
    """
    _check_mode(i, state.n_modes)
    _check_mode(j, state.n_modes)
    if i == j:
        raise InvalidArgument("use photon_number_variance for the diagonal")
    if not state.is_zero_mean():
        raise UnsupportedInput("photon_correlation requires a zero-mean state")
    b = state.block(i, j)
    return float(0.5 * np.sum(b * b))


def _bsn_angles(w):
    w = np.abs(np.asarray(w, dtype=float))
    frac = w / w.sum()
    angles = []
    remaining = 1.0  # product of sin^2 of previous angles, theta_0 = pi/2
    for wj in frac[:-1]:
        c2 = min(1.0, wj / remaining)
        theta = np.arccos(np.sqrt(c2))
        angles.append(theta)
        remaining *= np.sin(theta) ** 2
    return angles


def bsn_angles(w):
    """Beam-splitter angles of the chain feeding the first mode to all modes."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    _check_one_sign(w)
    return _bsn_angles(w)


def _check_one_sign(w):
    if w.size == 0:
        raise InvalidArgument("need at least one weight")
    if np.any(np.abs(w) < WeightVector.ZERO_TOL):
        raise InvalidArgument("weights must be nonzero")
    if not (np.all(w > 0) or np.all(w < 0)):
        raise InvalidArgument("weights of one BSN must share a sign")


def build_bsn_from_weights(w):
    """Passive network sending mode 0 to mode ``i`` with power fraction ``|w_i| / ||w||_1``.

    The network is the chain ``B_{M-1,M}(theta_{M-1}) ... B_{1,2}(theta_1)`` with
    ``cos^2 theta_j = |w_j| / (||w||_1 prod_{k<j} sin^2 theta_k)``.

    Args:
        w (sequence of float): one-sign weights of the group.

    Returns:
        array: ``2M x 2M`` symplectic matrix.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    _check_one_sign(w)
    m = w.size
    s = np.eye(2 * m)
    for j, theta in enumerate(_bsn_angles(w)):
        s = beam_splitter(theta, j, j + 1, m) @ s
    return s


def passive_orthogonal(s):
    """The real ``M x M`` mode-mixing matrix of a passive symplectic built from
    beam splitters (x and p transform identically)."""
    return np.asarray(s)[0::2, 0::2]


def _log_overlap(a, b):
    """log |<a|b>| for pure Gaussian states."""
    sigma = a.gamma + b.gamma
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0:
        raise UnsupportedInput("covariance sum is not positive definite")
    delta = a.d - b.d
    quad = delta @ np.linalg.solve(sigma, delta)
    return -0.25 * logdet - 0.25 * quad


def pure_state_overlap(a, b):
    """:math:`|\\langle\\psi_a|\\psi_b\\rangle|` for two pure Gaussian states.

    Uses :math:`\\mathrm{Tr}[\\rho_a\\rho_b] = \\det(\\Gamma_a+\\Gamma_b)^{-1/2}
    \\exp[-\\delta^T(\\Gamma_a+\\Gamma_b)^{-1}\\delta/2]` and takes the square root.
    """
    if a.n_modes != b.n_modes:
        raise InvalidArgument("states have different mode counts")
    if not (a.is_pure() and b.is_pure()):
        raise UnsupportedInput("overlap formula is only valid for pure states")
    return float(min(1.0, np.exp(_log_overlap(a, b))))
