"""Two-mode Fock-space states with bounded photon number (NOON / NNOO).

Small exact oracle for photon-number correlations and the QFIM of
number-generated phases, ``H_ij = 4 Cov(N_i, N_j)`` for pure states.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .fisher import FisherMatrix, QUANTUM, qcrb

NOON = "noon"
NNOO = "nnoo"


@dataclass(frozen=True)
class FockStateTwoMode:
    """Pure state ``sum c[n1, n2] |n1, n2>`` with ``n1, n2 <= cutoff``."""

    cutoff: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.cutoff + 1, self.cutoff + 1):
            raise InvalidArgument(f"amplitudes must be {(self.cutoff + 1,) * 2}, got {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise InvalidArgument(f"state is not normalised (norm {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def probabilities(self):
        # renormalising removes the rounding of |1/sqrt2|^2, so GHZ moments come out exact
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()


def fock_product(n1, n2):
    """The number state ``|n1, n2>``."""
    cutoff = max(n1, n2)
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    amps[n1, n2] = 1.0
    return FockStateTwoMode(cutoff, amps)


def ghz_state(kind, n):
    """``(|N0> + |0N>)/sqrt2`` for ``"noon"`` or ``(|NN> + |00>)/sqrt2`` for ``"nnoo"``."""
    if int(n) != n or n < 1:
        raise InvalidArgument(f"photon number must be a positive integer, got {n}")
    n = int(n)
    amps = np.zeros((n + 1, n + 1), dtype=complex)
    if kind == NOON:
        amps[n, 0] = amps[0, n] = 1 / np.sqrt(2)
    elif kind == NNOO:
        amps[n, n] = amps[0, 0] = 1 / np.sqrt(2)
    else:
        raise InvalidArgument(f"unknown GHZ kind {kind!r}")
    return FockStateTwoMode(n, amps)


def _moments(state):
    p = state.probabilities
    n = np.arange(state.cutoff + 1, dtype=float)
    n1 = float(np.sum(p.sum(axis=1) * n))
    n2 = float(np.sum(p.sum(axis=0) * n))
    n11 = float(np.sum(p.sum(axis=1) * n**2))
    n22 = float(np.sum(p.sum(axis=0) * n**2))
    n12 = float(n @ p @ n)
    return n1, n2, n11, n22, n12


def mean_photon_numbers(state):
    n1, n2, *_ = _moments(state)
    return n1, n2


def fock_photon_correlation(state):
    """``<N1 N2> - <N1><N2>`` by direct summation."""
    n1, n2, _, _, n12 = _moments(state)
    return n12 - n1 * n2


def fock_qfim(state):
    """``4 x`` the photon-number covariance matrix."""
    n1, n2, n11, n22, n12 = _moments(state)
    cov = np.array([[n11 - n1 * n1, n12 - n1 * n2], [n12 - n1 * n2, n22 - n2 * n2]])
    return FisherMatrix(4 * cov, QUANTUM)


def fock_bound(state, w):
    """``w^T H^+ w`` on the QFIM support; raises ``NotEstimable`` off support."""
    return qcrb(fock_qfim(state), w)
