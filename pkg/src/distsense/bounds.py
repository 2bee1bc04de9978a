"""Analytic error bounds for distributed phase sensing and the photon-number
allocation problems behind them.

All bounds are variances of the estimate of ``phi* = w . phi`` for a total
mean photon number ``N`` spread over the probed modes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericalFailure
from .gaussian_core import as_weights

MAX_ITER = 200


@dataclass(frozen=True)
class AllocationResult:
    """Optimal photon numbers per mode (or per sign group).

    Attributes:
        n_bar (array): mean photon number of each slot; sums to the total.
        lagrange_multiplier (float): common value of ``g(N_k) / a_k^2``.
        residual (float): ``|sum(n_bar) - N|`` at termination.
    """

    n_bar: np.ndarray
    lagrange_multiplier: float
    residual: float


def g(n):
    """``N^2 (N+1)^2 / (2N+1)``, strictly increasing on ``N >= 0``."""
    n = np.asarray(n, dtype=float)
    return n**2 * (n + 1) ** 2 / (2 * n + 1)


def _g_inverse(y, upper):
    """Vectorised bisection for ``g(N) = y`` with ``N`` in ``[0, upper]``."""
    y = np.asarray(y, dtype=float)
    lo = np.zeros_like(y)
    hi = np.full_like(y, upper)
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        below = g(mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(hi, 1e-300)):
            break
    return 0.5 * (lo + hi)


def _check_total(n_total):
    if not np.isfinite(n_total) or n_total <= 0:
        raise InvalidArgument(f"total photon number must be positive, got {n_total}")


def allocate(amplitudes, n_total):
    """Minimise ``sum a_k^2 / (8 N_k (N_k+1))`` subject to ``sum N_k = N``.

    The stationarity condition is ``g(N_k) = lambda a_k^2``. The inner
    bisection inverts ``g`` per slot, the outer one finds ``lambda`` so that the
    photon numbers add up to ``n_total``. Slots with ``a_k = 0`` get nothing.

    Raises:
        NumericalFailure: the outer bisection did not meet the total within
            ``MAX_ITER`` iterations.
    """
    _check_total(n_total)
    a2 = np.asarray(amplitudes, dtype=float) ** 2
    if a2.ndim != 1 or a2.size == 0 or not np.any(a2 > 0):
        raise InvalidArgument("need at least one nonzero amplitude")
    active = a2 > 0
    if np.count_nonzero(active) == 1:
        n_bar = np.where(active, float(n_total), 0.0)
        return AllocationResult(n_bar, float(g(n_total) / a2[active][0]), 0.0)

    def total(lam):
        return _g_inverse(lam * a2[active], n_total).sum()

    lo, hi = 0.0, float(g(n_total) / a2[active].min())
    diff = np.inf
    for _ in range(MAX_ITER):
        lam = 0.5 * (lo + hi)
        diff = total(lam) - n_total
        if abs(diff) <= 1e-12 or not lo < lam < hi:
            break
        if diff < 0:
            lo = lam
        else:
            hi = lam
    if abs(diff) > 1e-10 * max(1.0, n_total):
        raise NumericalFailure(f"allocation bisection did not converge (residual {abs(diff):.3e})")
    n_bar = np.zeros_like(a2)
    n_bar[active] = _g_inverse(lam * a2[active], n_total)
    return AllocationResult(n_bar, float(lam), float(abs(n_bar.sum() - n_total)))


def sql_bound(w, n_total):
    """Coherent-probe limit with ``N_i = |w_i| N``: ``sum w_i^2 / (4 N_i) = 1/(4N)``."""
    _check_total(n_total)
    w = as_weights(w).w
    n_i = np.abs(w) * n_total
    return float(np.sum(w**2 / (4 * n_i)))


def allocate_product(w, n_total):
    return allocate(as_weights(w).w, n_total)


def product_squeezed_bound(w, n_total):
    """Product of single-mode squeezed vacua at the optimal allocation."""
    w = as_weights(w).w
    n_i = allocate(w, n_total).n_bar
    return float(np.sum(w**2 / (8 * n_i * (n_i + 1))))


def group_bound(w_group, n_group):
    """Optimal error for one same-sign group: ``||w||_1^2 / (8 N (N+1))``."""
    _check_total(n_group)
    norm = float(np.abs(np.atleast_1d(np.asarray(w_group, dtype=float))).sum())
    return norm**2 / (8 * n_group * (n_group + 1))


def allocate_groups(w, n_total):
    """Split the photons between the positive and negative groups."""
    return allocate(np.array(as_weights(w).group_norms()), n_total)


def proposed_bound(w, n_total):
    """Two independent squeezed-vacuum networks, one per sign group."""
    w = as_weights(w)
    norms = w.group_norms()
    n_groups = allocate_groups(w, n_total).n_bar
    return float(sum(group_bound([a], n) for a, n in zip(norms, n_groups) if a > 0))


def heisenberg_envelope(w, n_total):
    """``||(||w_+||_1, ||w_-||_1)||_{2/3}^2 / (8 N^2)``, never above ``1/(4N^2)``."""
    _check_total(n_total)
    norms = np.array([a for a in as_weights(w).group_norms() if a > 0])
    p_norm = np.sum(norms ** (2.0 / 3.0)) ** 1.5
    return float(p_norm**2 / (8 * n_total**2))


def appendix_d_triple(m_modes, n_per_mode):
    """Bounds for ``w_i = +1/M`` on the first half and ``-1/M`` on the second.

    Returns:
        tuple[float, float, float]: (sign-blind global network, optimal
        product squeezing, two-group scheme), each evaluated in closed form
        with ``N = M n``.
    """
    if int(m_modes) != m_modes or m_modes < 2 or m_modes % 2:
        raise InvalidArgument(f"m_modes must be a positive even integer, got {m_modes}")
    _check_total(n_per_mode)
    m, n = int(m_modes), float(n_per_mode)
    big_n = m * n
    naive = 1.0 / (4 * big_n)
    product = 1.0 / (8 * m * n * (n + 1))
    # two groups of norm 1/2, N/2 photons each
    proposed = 1.0 / (4 * big_n * (big_n + 2))
    return naive, product, proposed
