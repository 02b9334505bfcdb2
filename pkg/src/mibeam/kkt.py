"""First-order optimality machinery: MI gradient, KKT residuals, identities.

The conjugate-coordinate gradient of the mutual information and the
stationarity system of the power-constrained problem are used to certify
empirically that converged iterates are KKT points, and to cross-check the
closed-form W/G responses through two matrix identities they satisfy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import hermitianize
from .model import (
    BeamformerSet,
    NetworkModel,
    effective_channel,
    mutual_information,
    noise_covariance,
    transmit_power,
)
from .wmmse import WmmseState, update_G

# Constraint counts as active for multiplier recovery above this occupancy.
ACTIVE_FRACTION = 1.0 - 1e-6


@dataclass
class KktReport:
    """Per-sensor first-order residuals at a candidate solution.

    stationarity[i] is ||grad_i - lambda_i F_i (Sigma_s + Sigma_i)||_F
    normalized by (1 + ||grad_i||_F); complementarity[i] is
    |lambda_i (power_i - P_i)|; feasibility[i] is the relative constraint
    violation. max_residual aggregates all of them.
    """

    stationarity: list[float] = field(default_factory=list)
    multipliers: list[float] = field(default_factory=list)
    complementarity: list[float] = field(default_factory=list)
    feasibility: list[float] = field(default_factory=list)
    max_residual: float = 0.0

    def as_dict(self) -> dict:
        return {
            "stationarity": list(self.stationarity),
            "multipliers": list(self.multipliers),
            "complementarity": list(self.complementarity),
            "feasibility": list(self.feasibility),
            "max_residual": self.max_residual,
        }


def mi_gradient(m: NetworkModel, f: BeamformerSet, i: int) -> np.ndarray:
    """Conjugate gradient dMI/dF_i^* (N_i x K).

    H_i^H [Sigma_n + Heff Sigma_s Heff^H]^{-1} Heff Sigma_s
        [I - Heff^H Sigma_n^{-1} H_i F_i Sigma_i],
    under the convention dMI = 2 Re Tr{(dMI/dF^*)^H dF}.
    """
    if not 0 <= i < m.L:
        raise IndexError(f"sensor index {i} out of range [0, {m.L})")
    heff = effective_channel(m, f)
    sn = noise_covariance(m, f)
    total = hermitianize(sn + heff @ m.Sigma_s @ heff.conj().T)
    left = m.H[i].conj().T @ np.linalg.solve(total, heff @ m.Sigma_s)
    y = np.linalg.solve(sn, m.H[i] @ f.F[i] @ m.Sigma_i[i])
    right = np.eye(m.K, dtype=complex) - heff.conj().T @ y
    return left @ right


def mi_gradient_fd(m: NetworkModel, f: BeamformerSet, i: int, step: float = 1e-5) -> np.ndarray:
    """Central-difference estimate of dMI/dF_i^* (test oracle for the above)."""
    base = f.copy()
    ni, k = m.N[i], m.K
    grad = np.zeros((ni, k), dtype=complex)
    for a in range(ni):
        for b in range(k):
            for direction in (1.0, 1j):
                delta = np.zeros((ni, k), dtype=complex)
                delta[a, b] = direction * step
                base.F[i] = f.F[i] + delta
                hi = mutual_information(m, base)
                base.F[i] = f.F[i] - delta
                lo = mutual_information(m, base)
                # dMI = 2 Re{conj(grad[a,b]) * d} per coordinate: the real
                # perturbation reads off 2 Re(grad), the imaginary 2 Im(grad).
                slope = (hi - lo) / (2.0 * step)
                if direction == 1.0:
                    grad[a, b] += 0.5 * slope
                else:
                    grad[a, b] += 0.5j * slope
    base.F[i] = f.F[i]
    return grad


def kkt_residual_p0(m: NetworkModel, f: BeamformerSet, s: WmmseState | None = None) -> KktReport:
    """KKT residuals of the power-constrained MI maximization at (f).

    Multipliers are recovered per sensor by a nonnegative least-squares fit
    of the MI gradient against F_i (Sigma_s + Sigma_i) on active constraints
    (lambda_i = 0 on inactive ones). The WmmseState argument is accepted for
    interface uniformity with the solver traces; the gradient form depends
    on the precoders alone.
    """
    report = KktReport()
    for i in range(m.L):
        grad = mi_gradient(m, f, i)
        direction = f.F[i] @ m.sensor_shaping(i)
        power = transmit_power(m, f, i)
        active = power >= m.P[i] * ACTIVE_FRACTION
        denom = float(np.real(np.vdot(direction, direction)))
        lam = 0.0
        if active and denom > 0:
            lam = max(0.0, float(np.real(np.vdot(direction, grad))) / denom)
        gnorm = float(np.linalg.norm(grad))
        report.stationarity.append(float(np.linalg.norm(grad - lam * direction)) / (1.0 + gnorm))
        report.multipliers.append(lam)
        report.complementarity.append(abs(lam * (power - m.P[i])))
        report.feasibility.append(max(0.0, power - m.P[i]) / m.P[i])
    report.max_residual = max(
        max(report.stationarity), max(report.complementarity), max(report.feasibility)
    )
    return report


def verify_identities(m: NetworkModel, f: BeamformerSet, tol: float = 1e-8) -> bool:
    """Check the two closed-form-response identities used by the KKT argument.

    With G-bar the Wiener response and W-bar = Heff^H Sigma_n^{-1} Heff +
    Sigma_s^{-1}:
        G W (I - G^H Heff)  ==  (Heff Sigma_s Heff^H + Sigma_n)^{-1} Heff
        G W G^H             ==  (...)^{-1} Heff Sigma_s Heff^H Sigma_n^{-1}
    both within tol relative Frobenius error.
    """
    heff = effective_channel(m, f)
    sn = noise_covariance(m, f)
    gbar = update_G(m, f)
    wbar = hermitianize(
        heff.conj().T @ np.linalg.solve(sn, heff) + np.linalg.inv(m.Sigma_s)
    )
    total = hermitianize(heff @ m.Sigma_s @ heff.conj().T + sn)

    lhs1 = gbar @ wbar @ (np.eye(m.K, dtype=complex) - gbar.conj().T @ heff)
    rhs1 = np.linalg.solve(total, heff)
    ok1 = np.linalg.norm(lhs1 - rhs1) <= tol * (1.0 + np.linalg.norm(rhs1))

    lhs2 = gbar @ wbar @ gbar.conj().T
    x = np.linalg.solve(total, heff @ m.Sigma_s @ heff.conj().T)
    rhs2 = np.linalg.solve(sn, x.conj().T).conj().T
    ok2 = np.linalg.norm(lhs2 - rhs2) <= tol * (1.0 + np.linalg.norm(rhs2))
    return bool(ok1 and ok2)
