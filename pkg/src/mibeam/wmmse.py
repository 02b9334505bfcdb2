"""Weighted-MMSE surrogate: MSE matrix, closed-form W and G responses.

The surrogate rewrites the log-det mutual information as a maximization over
a PD weight matrix W and a linear postcoder G; both inner maximizations have
closed forms (matrix inversion lemma territory), which is what makes the
precoder subproblem a convex QCQP.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import check_hermitian, hermitianize, logdet_pd
from .model import BeamformerSet, NetworkModel, effective_channel, noise_covariance

# Relative eigenvalue floor applied to the MSE matrix before inversion.
MSE_FLOOR = 1e-12


@dataclass
class WmmseState:
    """Auxiliary blocks of the surrogate: weight W (K x K PD), postcoder G (M x K)."""

    W: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=complex)
        self.G = np.asarray(self.G, dtype=complex)
        check_hermitian(self.W, "W")
        if np.linalg.eigvalsh(hermitianize(self.W))[0] <= 0:
            raise ValueError("W must be positive definite")


def mse_matrix(m: NetworkModel, f: BeamformerSet, G: np.ndarray) -> np.ndarray:
    """Weighted-MSE kernel E(G) = (I - G^H Heff) Sigma_s (.)^H + G^H Sigma_n G."""
    heff = effective_channel(m, f)
    sn = noise_covariance(m, f)
    a = np.eye(m.K, dtype=complex) - G.conj().T @ heff
    return hermitianize(a @ m.Sigma_s @ a.conj().T + G.conj().T @ sn @ G)


def update_G(m: NetworkModel, f: BeamformerSet) -> np.ndarray:
    """Optimal postcoder (generalized Wiener filter).

    G* = [Heff Sigma_s Heff^H + Sigma_n]^{-1} Heff Sigma_s; minimizes
    Tr{W E(G)} for every PD W.
    """
    heff = effective_channel(m, f)
    sn = noise_covariance(m, f)
    lhs = hermitianize(heff @ m.Sigma_s @ heff.conj().T + sn)
    return np.linalg.solve(lhs, heff @ m.Sigma_s)


def update_W(m: NetworkModel, f: BeamformerSet, G: np.ndarray) -> np.ndarray:
    """Optimal weight W* = E(G)^{-1}, re-symmetrized after inversion.

    E(G) inherits positive definiteness from Sigma_s; a relative eigenvalue
    floor guards against pathological round-off before the inversion.
    """
    e = mse_matrix(m, f, G)
    lam = np.linalg.eigvalsh(e)
    floor = MSE_FLOOR * max(float(lam[-1]), 0.0)
    if lam[0] < floor:
        e = e + floor * np.eye(m.K)
    return hermitianize(np.linalg.inv(e))


def wmmse_state(m: NetworkModel, f: BeamformerSet) -> WmmseState:
    """Closed-form responses to the current precoders: G first, then W."""
    g = update_G(m, f)
    return WmmseState(W=update_W(m, f, g), G=g)


def surrogate_objective(m: NetworkModel, f: BeamformerSet, s: WmmseState) -> float:
    """Surrogate value log det W - Tr{W E(G)} + K + log det Sigma_s.

    Equals the mutual information when (W, G) are the closed-form responses,
    and lower-bounds it otherwise.
    """
    e = mse_matrix(m, f, s.G)
    trace = float(np.real(np.trace(s.W @ e)))
    return logdet_pd(s.W) - trace + m.K + logdet_pd(m.Sigma_s)
