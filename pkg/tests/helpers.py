"""Shared test utilities: random Gaussian states and an independent Fock-space oracle."""

import numpy as np
from scipy.sparse import diags, identity, kron
from scipy.sparse.linalg import expm_multiply

from distsense.gaussian_core import (
    apply_symplectic,
    beam_splitter,
    displace,
    phase_shifter,
    squeezer,
    vacuum,
)


def random_pure_state(rng, n_modes, max_r=0.8, max_alpha=0.0, layers=2):
    """Squeezed (optionally displaced) vacua mixed by random passive layers."""
    state = vacuum(n_modes)
    for k in range(n_modes):
        state = apply_symplectic(state, squeezer(rng.uniform(0, max_r), rng.uniform(0, 2 * np.pi), k, n_modes))
        if max_alpha > 0:
            state = displace(state, k, *rng.uniform(-max_alpha, max_alpha, 2))
    for _ in range(layers):
        for k in range(n_modes):
            state = apply_symplectic(state, phase_shifter(rng.uniform(0, 2 * np.pi), k, n_modes))
        for i in range(n_modes - 1):
            state = apply_symplectic(state, beam_splitter(rng.uniform(0, np.pi), i, i + 1, n_modes))
    return state


def random_signed_weights(rng, m, mixed=True):
    mags = rng.uniform(0.05, 1.0, m)
    if mixed and m >= 2:
        signs = rng.permutation(np.r_[1.0, -1.0, rng.choice([-1.0, 1.0], m - 2)])
    else:
        signs = np.ones(m)
    return mags * signs


class FockTwoMode:
    """Two truncated oscillators; states are prepared by exponentiating ladder-operator generators."""

    def __init__(self, cutoff):
        self.cutoff = cutoff
        n = cutoff + 1
        a = diags(np.sqrt(np.arange(1, n)), 1, format="csr")
        eye = identity(n, format="csr")
        self.a1 = kron(a, eye, format="csr")
        self.a2 = kron(eye, a, format="csr")
        self.n1 = (self.a1.T @ self.a1).tocsr()
        self.n2 = (self.a2.T @ self.a2).tocsr()
        vac = np.zeros(n * n, dtype=complex)
        vac[0] = 1.0
        self.vac = vac

    @staticmethod
    def _apply(gen, psi):
        return expm_multiply(gen, psi)

    def squeeze(self, psi, which, r, varphi):
        """``exp[(r/2)(e^{i varphi} a^dag^2 - e^{-i varphi} a^2)]``."""
        a = self.a1 if which == 0 else self.a2
        ad = a.T.conj()
        gen = 0.5 * r * (np.exp(1j * varphi) * ad @ ad - np.exp(-1j * varphi) * a @ a)
        return self._apply(gen.tocsc(), psi)

    def displace(self, psi, which, alpha):
        a = self.a1 if which == 0 else self.a2
        gen = alpha * a.T.conj() - np.conj(alpha) * a
        return self._apply(gen.tocsc(), psi)

    def split(self, psi, theta):
        """``exp[theta (a1^dag a2 - a1 a2^dag)]``."""
        gen = theta * (self.a1.T @ self.a2 - self.a1 @ self.a2.T)
        return self._apply(gen.tocsc().astype(complex), psi)

    def moments(self, psi):
        """Mean photon numbers and their covariance matrix."""
        n1 = self.n1 @ psi
        n2 = self.n2 @ psi
        e1 = np.vdot(psi, n1).real
        e2 = np.vdot(psi, n2).real
        cov = np.array(
            [
                [np.vdot(n1, n1).real - e1**2, np.vdot(n1, n2).real - e1 * e2],
                [np.vdot(n2, n1).real - e1 * e2, np.vdot(n2, n2).real - e2**2],
            ]
        )
        return np.array([e1, e2]), cov
