"""System model: network parameters, received-signal statistics and power.

A network instance is L multi-antenna sensors observing a common Gaussian
source s ~ CN(0, Sigma_s) through independent sensing noise n_i ~ CN(0,
Sigma_i), each applying a linear precoder F_i before a coherent MAC to an
M-antenna fusion center with white receiver noise of power sigma0_sq.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import check_hermitian, hermitianize, inv_sqrt_pd, logdet_pd

DEFAULT_FEASIBILITY_SLACK = 1e-8


@dataclass(frozen=True)
class NetworkModel:
    """Immutable network description.

    Attributes:
        K: source dimension.
        L: number of sensors.
        M: fusion-center antenna count.
        N: per-sensor antenna counts, length L.
        H: channel matrices, H[i] of shape (M, N[i]).
        Sigma_s: source covariance, K x K Hermitian PD.
        Sigma_i: sensing-noise covariances, each K x K Hermitian PSD.
        sigma0_sq: receiver noise power, > 0.
        P: per-sensor transmit power budgets, each > 0.
    """

    K: int
    L: int
    M: int
    N: tuple[int, ...]
    H: tuple[np.ndarray, ...]
    Sigma_s: np.ndarray
    Sigma_i: tuple[np.ndarray, ...]
    sigma0_sq: float
    P: tuple[float, ...]

    def __post_init__(self):
        if self.K < 1 or self.L < 1 or self.M < 1:
            raise ValueError("K, L, M must be positive")
        if not (len(self.N) == len(self.H) == len(self.Sigma_i) == len(self.P) == self.L):
            raise ValueError("N, H, Sigma_i, P must all have length L")
        if self.sigma0_sq <= 0:
            raise ValueError("sigma0_sq must be positive")
        if any(p <= 0 for p in self.P):
            raise ValueError("all power budgets must be positive")
        for i, h in enumerate(self.H):
            if h.shape != (self.M, self.N[i]):
                raise ValueError(f"H[{i}] has shape {h.shape}, expected {(self.M, self.N[i])}")
            if not np.all(np.isfinite(h)):
                raise ValueError(f"H[{i}] has non-finite entries")
        ss = check_hermitian(np.asarray(self.Sigma_s, dtype=complex), "Sigma_s")
        if ss.shape != (self.K, self.K):
            raise ValueError("Sigma_s must be K x K")
        if np.linalg.eigvalsh(ss)[0] <= 0:
            raise ValueError("Sigma_s must be positive definite")
        for i, s in enumerate(self.Sigma_i):
            s = check_hermitian(np.asarray(s, dtype=complex), f"Sigma_i[{i}]")
            if s.shape != (self.K, self.K):
                raise ValueError(f"Sigma_i[{i}] must be K x K")
            lam = np.linalg.eigvalsh(s)
            if lam[0] < -1e-10 * max(lam[-1], 1e-300):
                raise ValueError(f"Sigma_i[{i}] must be PSD")

    def sensor_shaping(self, i: int) -> np.ndarray:
        """Sigma_s + Sigma_i, the PD matrix shaping sensor i's transmit power."""
        return hermitianize(self.Sigma_s + self.Sigma_i[i])


def make_model(H, Sigma_s, Sigma_i, sigma0_sq, P) -> NetworkModel:
    """Construct a NetworkModel, inferring dimensions from the channel list."""
    H = tuple(np.asarray(h, dtype=complex) for h in H)
    L = len(H)
    M = H[0].shape[0]
    N = tuple(h.shape[1] for h in H)
    Sigma_s = np.asarray(Sigma_s, dtype=complex)
    K = Sigma_s.shape[0]
    return NetworkModel(
        K=K,
        L=L,
        M=M,
        N=N,
        H=H,
        Sigma_s=Sigma_s,
        Sigma_i=tuple(np.asarray(s, dtype=complex) for s in Sigma_i),
        sigma0_sq=float(sigma0_sq),
        P=tuple(float(p) for p in P),
    )


@dataclass
class BeamformerSet:
    """The precoders {F_i}, F[i] of shape (N_i, K)."""

    F: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.F = [np.asarray(f, dtype=complex) for f in self.F]
        for i, f in enumerate(self.F):
            if not np.all(np.isfinite(f)):
                raise ValueError(f"F[{i}] has non-finite entries")

    def copy(self) -> "BeamformerSet":
        return BeamformerSet([f.copy() for f in self.F])


def zero_beamformers(m: NetworkModel) -> BeamformerSet:
    return BeamformerSet([np.zeros((n, m.K), dtype=complex) for n in m.N])


def _check_shapes(m: NetworkModel, f: BeamformerSet):
    if len(f.F) != m.L:
        raise ValueError(f"expected {m.L} beamformers, got {len(f.F)}")
    for i, fi in enumerate(f.F):
        if fi.shape != (m.N[i], m.K):
            raise ValueError(f"F[{i}] has shape {fi.shape}, expected {(m.N[i], m.K)}")


def effective_channel(m: NetworkModel, f: BeamformerSet) -> np.ndarray:
    """Compound source-to-receiver channel: sum_i H_i F_i, shape (M, K)."""
    _check_shapes(m, f)
    out = np.zeros((m.M, m.K), dtype=complex)
    for hi, fi in zip(m.H, f.F):
        out += hi @ fi
    return out


def noise_covariance(m: NetworkModel, f: BeamformerSet) -> np.ndarray:
    """Covariance of the compound receiver noise.

    sigma0_sq * I_M + sum_i H_i F_i Sigma_i F_i^H H_i^H; PD whenever
    sigma0_sq > 0.
    """
    _check_shapes(m, f)
    out = m.sigma0_sq * np.eye(m.M, dtype=complex)
    for hi, fi, si in zip(m.H, f.F, m.Sigma_i):
        hf = hi @ fi
        out += hf @ si @ hf.conj().T
    return hermitianize(out)


def mutual_information(m: NetworkModel, f: BeamformerSet) -> float:
    """End-to-end mutual information in nats.

    log det(I_M + Heff Sigma_s Heff^H Sigma_n^{-1}), evaluated as the
    log det of the PD matrix I + Sn^{-1/2} Heff Sigma_s Heff^H Sn^{-1/2}
    for numerical stability at high SNR.
    """
    heff = effective_channel(m, f)
    sn_isqrt = inv_sqrt_pd(noise_covariance(m, f))
    b = sn_isqrt @ heff
    s = b @ m.Sigma_s @ b.conj().T
    return logdet_pd(np.eye(m.M, dtype=complex) + hermitianize(s))


def transmit_power(m: NetworkModel, f: BeamformerSet, i: int) -> float:
    """Average transmit power of sensor i: Tr{F_i (Sigma_s + Sigma_i) F_i^H}."""
    _check_shapes(m, f)
    if not 0 <= i < m.L:
        raise IndexError(f"sensor index {i} out of range [0, {m.L})")
    fi = f.F[i]
    return float(np.real(np.trace(fi @ m.sensor_shaping(i) @ fi.conj().T)))


def is_feasible(m: NetworkModel, f: BeamformerSet, slack: float = DEFAULT_FEASIBILITY_SLACK) -> bool:
    """True iff every sensor respects its power budget within relative slack."""
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    return all(transmit_power(m, f, i) <= m.P[i] * (1.0 + slack) for i in range(m.L))


def whiten_receiver_noise(m: NetworkModel, Sigma0: np.ndarray) -> NetworkModel:
    """Fold a colored receiver-noise covariance Sigma0 into the channels.

    Returns the equivalent white-noise model with H_i <- Sigma0^{-1/2} H_i and
    sigma0_sq = 1. Sigma0 replaces the receiver noise covariance wholesale;
    mutual information is preserved.
    """
    s0 = check_hermitian(np.asarray(Sigma0, dtype=complex), "Sigma0")
    if s0.shape != (m.M, m.M):
        raise ValueError("Sigma0 must be M x M")
    w = inv_sqrt_pd(s0)
    return replace(m, H=tuple(w @ h for h in m.H), sigma0_sq=1.0)
