"""Quantum and classical Fisher information matrices and the weighted Cramér–Rao bound."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import InvalidArgument, NotEstimable, NumericalFailure, UnsupportedInput
from .gaussian_core import (
    OMEGA2,
    GaussianState,
    _log_overlap,
    rotation2,
    WeightVector,
)

SUPPORT_TOL = 1e-10
SUPPORT_RESIDUAL_TOL = 1e-8

QUANTUM = "quantum"
CLASSICAL = "classical"


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric positive-semidefinite information matrix.

    Args:
        h (array): ``M x M`` matrix.
        kind (str): ``"quantum"`` or ``"classical"``.
    """

    h: np.ndarray
    kind: str = QUANTUM

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h, dtype=float))
        if h.shape[0] != h.shape[1]:
            raise InvalidArgument(f"Fisher matrix must be square, got {h.shape}")
        if self.kind not in (QUANTUM, CLASSICAL):
            raise InvalidArgument(f"unknown Fisher matrix kind {self.kind!r}")
        scale = max(1.0, float(np.abs(h).max(initial=0.0)))
        if not np.allclose(h, h.T, rtol=0, atol=1e-10 * scale):
            raise InvalidArgument("Fisher matrix is not symmetric")
        h = 0.5 * (h + h.T)
        ev = np.linalg.eigvalsh(h)
        if ev.size and ev.min() < -1e-9 * max(ev.max(), 0.0) - 1e-12:
            raise InvalidArgument(f"Fisher matrix is not positive semidefinite (min eigenvalue {ev.min():.3e})")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def n_params(self):
        return self.h.shape[0]


def _as_matrix(m):
    return m.h if isinstance(m, FisherMatrix) else np.asarray(m, dtype=float)


def _weights_array(w):
    if isinstance(w, WeightVector):
        return w.w
    return np.atleast_1d(np.asarray(w, dtype=float))


def qfim_matrix(gamma, d):
    """Pure-state QFIM for phases generated by the mode photon numbers.

    ``H_ij = 2 Tr[G_ij G_ji] - delta_ij + (Om d_i)^T [G^-1]_ij (Om d_j)``,
    with ``G_ij`` the 2x2 covariance blocks. Unchecked inner routine.
    """
    m = gamma.shape[0] // 2
    blocks = gamma.reshape(m, 2, m, 2)
    h = 2.0 * np.einsum("iajb,iajb->ij", blocks, blocks) - np.eye(m)
    if np.any(d):
        # one factorisation of the full covariance serves every (i, j) pair
        ub = d.reshape(m, 2) @ OMEGA2.T
        ginv = np.linalg.inv(gamma).reshape(m, 2, m, 2)
        h = h + np.einsum("ia,iajb,jb->ij", ub, ginv, ub)
    return h


def qfim_pure(probe):
    """Quantum Fisher information matrix of a pure Gaussian probe.

    Args:
        probe (GaussianState): pure state before the phase encoding.

    Returns:
        FisherMatrix: the (parameter-independent) QFIM.
    """
    if not probe.is_pure():
        raise UnsupportedInput("qfim_pure requires a pure probe")
    if np.linalg.cond(probe.gamma) > 1e14:
        raise NumericalFailure("covariance matrix is numerically singular")
    return FisherMatrix(qfim_matrix(probe.gamma, probe.d), QUANTUM)


def _phase_rotated(probe, phases):
    m = probe.n_modes
    t = np.zeros((2 * m, 2 * m))
    for k, phi in enumerate(phases):
        t[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = rotation2(phi)
    return GaussianState(t @ probe.gamma @ t.T, t @ probe.d)


def qfi_finite_difference_oracle(probe, direction, epsilon=1e-3):
    """Directional QFI ``u^T H u`` from the fidelity between the probe and its
    phase-shifted copy: ``8 (1 - |<psi(0)|psi(eps u)>|) / eps^2``.
    """
    if not 1e-5 <= epsilon <= 1e-2:
        raise InvalidArgument("epsilon must lie in [1e-5, 1e-2]")
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (probe.n_modes,):
        raise InvalidArgument("direction must have one entry per mode")
    if not probe.is_pure():
        raise UnsupportedInput("fidelity oracle requires a pure probe")
    shifted = _phase_rotated(probe, epsilon * direction)
    # expm1 keeps the tiny infidelity accurate
    return float(-8.0 * np.expm1(_log_overlap(probe, shifted)) / epsilon**2)


def qfim_finite_difference(probe, epsilon=1e-3):
    """Full QFIM from the fidelity oracle, off-diagonals by polarisation."""
    m = probe.n_modes
    eye = np.eye(m)
    diag = np.array([qfi_finite_difference_oracle(probe, eye[i], epsilon) for i in range(m)])
    h = np.diag(diag)
    for i in range(m):
        for j in range(i + 1, m):
            q = qfi_finite_difference_oracle(probe, eye[i] + eye[j], epsilon)
            h[i, j] = h[j, i] = 0.5 * (q - diag[i] - diag[j])
    return h


def pinv_on_support(m, tol=SUPPORT_TOL):
    """Pseudo-inverse restricted to the support of a symmetric PSD matrix.

    Eigenvalues below ``tol * lambda_max`` count as zero.

    Returns:
        tuple[array, array]: the pseudo-inverse and the orthogonal projector
        onto the support.
    """
    h = _as_matrix(m)
    ev, vec = np.linalg.eigh(0.5 * (h + h.T))
    lam_max = ev.max(initial=0.0)
    if lam_max <= 0:
        z = np.zeros_like(h)
        return z, z.copy()
    keep = ev > tol * lam_max
    v = vec[:, keep]
    return (v / ev[keep]) @ v.T, v @ v.T


def qcrb(m, w, tol=SUPPORT_TOL):
    """Weighted Cramér–Rao bound ``w^T m^+ w``.

    Raises:
        NotEstimable: ``w`` has a component outside the support of ``m``.
    """
    w = _weights_array(w)
    h = _as_matrix(m)
    if w.shape != (h.shape[0],):
        raise InvalidArgument(f"weights of length {w.size} for a {h.shape[0]}-parameter matrix")
    pinv, proj = pinv_on_support(h, tol)
    residual = float(np.linalg.norm(w - proj @ w))
    if residual >= SUPPORT_RESIDUAL_TOL:
        raise NotEstimable(f"weights lie outside the Fisher-matrix support (residual {residual:.3e})", residual)
    return float(w @ pinv @ w)


def gaussian_cfim(cov, dcov):
    """Classical Fisher information of a zero-mean normal outcome model.

    ``F_ij = Tr[C^-1 dC_i C^-1 dC_j] / 2``.

    Args:
        cov (array): ``n x n`` positive-definite outcome covariance.
        dcov (sequence of array): derivative of ``cov`` per parameter.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    try:
        factor = cho_factor(cov)
    except LinAlgError as exc:
        raise NumericalFailure("outcome covariance is not positive definite") from exc
    solved = [cho_solve(factor, np.atleast_2d(np.asarray(dc, dtype=float))) for dc in dcov]
    k = len(solved)
    f = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            f[i, j] = f[j, i] = 0.5 * np.sum(solved[i] * solved[j].T)
    return FisherMatrix(f, CLASSICAL)


def homodyne_covariance(probe, phases, angles):
    """Covariance of the homodyne outcomes and its derivatives in each phase.

    Mode ``i`` is measured along local-oscillator phase ``angles[i]``, using the
    same sign convention as the encoding: the measured quadrature is ``x``
    after the net rotation by ``phases[i] - angles[i]``.

    Returns:
        tuple[array, list[array]]: ``Gamma_HD`` and ``d Gamma_HD / d phi_k``.
    """
    m = probe.n_modes
    phases = np.broadcast_to(np.asarray(phases, dtype=float), (m,))
    angles = np.broadcast_to(np.asarray(angles, dtype=float), (m,))
    eff = phases - angles
    c, s = np.cos(eff), np.sin(eff)
    # x row of each rotation block and its derivative
    rows = np.zeros((m, 2 * m))
    drows = np.zeros((m, 2 * m))
    for k in range(m):
        rows[k, 2 * k : 2 * k + 2] = (c[k], s[k])
        drows[k, 2 * k : 2 * k + 2] = (-s[k], c[k])
    g = probe.gamma
    cov = rows @ g @ rows.T
    cross = drows @ g @ rows.T
    dcov = []
    for k in range(m):
        dk = np.zeros((m, m))
        dk[k, :] = cross[k, :]
        dk = dk + dk.T
        dcov.append(dk)
    return cov, dcov


def homodyne_cfim(probe, phases=None, angles=None):
    """Classical Fisher information of per-mode homodyne detection.

    Args:
        probe (GaussianState or SchemeSpec): zero-mean probe, or a scheme that builds one.
        phases (array): encoded phases, default zero.
        angles (array): local-oscillator phases, default zero.
    """
    if not isinstance(probe, GaussianState):
        from .schemes import build_probe

        probe = build_probe(probe)
    if not probe.is_zero_mean():
        raise UnsupportedInput("homodyne CFIM model assumes a zero-displacement probe")
    m = probe.n_modes
    phases = np.zeros(m) if phases is None else phases
    angles = np.zeros(m) if angles is None else angles
    cov, dcov = homodyne_covariance(probe, phases, angles)
    return gaussian_cfim(cov, dcov)


def _closed_form_coefficients(r):
    sh2 = np.sinh(r) ** 2
    t2 = np.tanh(2 * r) ** 2
    alpha = t2 * (8 * sh2**2 + 6 * sh2 + 1)
    beta = t2 * np.cosh(2 * r)
    return alpha, beta


def _one_sign_fraction(w):
    w = np.atleast_1d(np.asarray(w.w if isinstance(w, WeightVector) else w, dtype=float))
    if w.size == 0 or not (np.all(w > 0) or np.all(w < 0)):
        raise InvalidArgument("closed form needs nonzero weights of a single sign")
    return w, np.abs(w) / np.abs(w).sum()


def homodyne_cfim_closed_form(w, r):
    """Rank-one-plus-diagonal homodyne CFIM ``alpha u u^T + beta diag(u)``.

    ``u = |w| / ||w||_1`` is the power split of the group's network, with
    ``alpha = tanh^2(2r) (8 sinh^4 r + 6 sinh^2 r + 1)`` and
    ``beta = tanh^2(2r) cosh(2r)``.
    """
    _, u = _one_sign_fraction(w)
    alpha, beta = _closed_form_coefficients(r)
    return FisherMatrix(alpha * np.outer(u, u) + beta * np.diag(u), CLASSICAL)


def homodyne_closed_form_bound(w, r):
    """``w^T F^-1 w`` for the closed-form CFIM, evaluated with Sherman–Morrison.

    Works with the raw (un-normalised) one-sign weights, so the result is
    ``||w||_1^2 / (8 N (N + 1))`` with ``N = sinh^2 r``.
    """
    w, u = _one_sign_fraction(w)
    alpha, beta = _closed_form_coefficients(r)
    if beta == 0:
        return float("inf")
    # B = beta diag(u); <w|B^-1|w> and the rank-one correction
    b_inv_w = w / (beta * u)
    wbw = float(w @ b_inv_w)
    ubw = float(u @ b_inv_w)
    return wbw - alpha * ubw**2 / (1.0 + alpha * float(u @ (u / (beta * u))))


__all__ = [
    "FisherMatrix",
    "qfim_pure",
    "qfim_matrix",
    "qfi_finite_difference_oracle",
    "qfim_finite_difference",
    "pinv_on_support",
    "qcrb",
    "gaussian_cfim",
    "homodyne_covariance",
    "homodyne_cfim",
    "homodyne_cfim_closed_form",
    "homodyne_closed_form_bound",
]
