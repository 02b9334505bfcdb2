"""Convex trust-region subproblem with certified KKT solutions.

Minimize x^H Q x - 2 Re{q^H x} over the ball ||x||_2 <= rho, with Q Hermitian
PSD. The solution dichotomy: if q is orthogonal to the null space of Q and the
min-norm unconstrained solution Q^+ q already fits in the ball, that is the
(least-energy) optimum with multiplier mu = 0; otherwise the optimum is unique,
sits on the boundary, and is (Q + mu* I)^{-1} q with mu* > 0 the root of the
secular equation sum_k |p_k|^2 (lambda_k + mu)^{-2} = rho^2, p = U^H q.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import RANK_TOL, inv_sqrt_pd, psd_eig

# |p_k| <= NULL_PROJ_TOL * ||q|| counts as "no component" on a null direction.
NULL_PROJ_TOL = 1e-9
SECULAR_REL_TOL = 1e-10
SECULAR_WIDTH_TOL = 1e-12
SECULAR_MAX_ITER = 200


class TrsCase(enum.Enum):
    MIN_NORM_INTERIOR = "min_norm_interior"
    BOUNDARY_UNIQUE = "boundary_unique"


@dataclass(frozen=True)
class TrsProblem:
    """Data (Q, q, rho) of one ball-constrained convex quadratic."""

    Q: np.ndarray
    q: np.ndarray
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=complex).reshape(-1))
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if not np.all(np.isfinite(self.q)):
            raise ValueError("q has non-finite entries")
        if self.Q.shape != (self.q.size, self.q.size):
            raise ValueError("Q and q dimensions disagree")


@dataclass(frozen=True)
class TrsSolution:
    x: np.ndarray
    mu: float
    case: TrsCase
    kkt_residual: float


def trs_objective(Q: np.ndarray, q: np.ndarray, x: np.ndarray) -> float:
    """Objective x^H Q x - 2 Re{q^H x} (real by construction)."""
    return float(np.real(x.conj() @ (Q @ x)) - 2.0 * np.real(q.conj() @ x))


def secular_value(lambdas: np.ndarray, p: np.ndarray, mu: float) -> float:
    """f(mu) = sum_k |p_k|^2 (lambda_k + mu)^{-2}; strictly decreasing for mu > 0.

    Terms with p_k = 0 contribute nothing regardless of lambda_k + mu; a pole
    (lambda_k + mu = 0 with p_k != 0) raises.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    w = np.abs(np.asarray(p)) ** 2
    active = w > 0.0
    denom = lambdas[active] + mu
    if np.any(denom == 0.0):
        raise ValueError("secular_value pole: lambda_k + mu = 0 with p_k != 0")
    return float(np.sum(w[active] / denom**2))


def solve_secular(lambdas: np.ndarray, p: np.ndarray, rho: float) -> float:
    """Unique positive root of f(mu) = rho^2 by bracketed bisection.

    Requires lim_{mu->0+} f(mu) > rho^2 (otherwise the interior branch of
    solve_trs applies and this raises). The lower bracket is 0; the upper
    bracket starts at the analytic bound ||p|| / rho (where f <= rho^2 holds
    mathematically) and is doubled until f < rho^2 in floating point too.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    p = np.asarray(p)
    rho2 = rho * rho
    pnorm = float(np.linalg.norm(p))
    if pnorm == 0.0:
        raise ValueError("solve_secular requires p != 0")
    # Supremum check: a pole at 0 means f -> inf; otherwise evaluate f(0).
    try:
        f0 = secular_value(lambdas, p, 0.0)
    except ValueError:
        f0 = np.inf
    if f0 <= rho2:
        raise ValueError("secular equation has no positive root; take the interior branch")

    lo = 0.0
    hi = pnorm / rho
    while secular_value(lambdas, p, hi) >= rho2:
        hi *= 2.0
    for _ in range(SECULAR_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # bracket collapsed to adjacent floats
        val = secular_value(lambdas, p, mid)
        if abs(val - rho2) <= SECULAR_REL_TOL * rho2:
            return mid
        if val > rho2:
            lo = mid
        else:
            hi = mid
        if hi - lo <= SECULAR_WIDTH_TOL * (1.0 + hi) and abs(
            secular_value(lambdas, p, hi) - rho2
        ) <= SECULAR_REL_TOL * rho2:
            return hi
    return 0.5 * (lo + hi)


def solve_trs(prob: TrsProblem) -> TrsSolution:
    """Solve the ball-constrained convex quadratic with a KKT certificate.

    Raises ValueError if Q is indefinite beyond the PSD tolerance.
    """
    dec = psd_eig(prob.Q, RANK_TOL, "TRS quadratic")
    lam = dec.lambdas
    q = prob.q
    rho = prob.rho
    n = q.size
    p = dec.U.conj().T @ q
    qnorm = float(np.linalg.norm(q))

    maxeig = float(lam[0]) if n else 0.0
    rank = int(np.sum(lam > RANK_TOL * maxeig)) if maxeig > 0 else 0

    if qnorm == 0.0:
        x = np.zeros(n, dtype=complex)
        return TrsSolution(x=x, mu=0.0, case=TrsCase.MIN_NORM_INTERIOR, kkt_residual=0.0)

    orth = bool(np.all(np.abs(p[rank:]) <= NULL_PROJ_TOL * qnorm))
    interior_norm_sq = float(np.sum(np.abs(p[:rank]) ** 2 / lam[:rank] ** 2)) if rank else 0.0

    if orth and interior_norm_sq <= rho * rho * (1.0 + 1e-10):
        coeff = np.zeros(n, dtype=complex)
        coeff[:rank] = p[:rank] / lam[:rank]
        x = dec.U @ coeff
        mu = 0.0
        case = TrsCase.MIN_NORM_INTERIOR
    else:
        mu = solve_secular(lam, p, rho)
        x = dec.U @ (p / (lam + mu))
        case = TrsCase.BOUNDARY_UNIQUE

    resid = float(np.linalg.norm(prob.Q @ x + mu * x - q))
    return TrsSolution(x=x, mu=mu, case=case, kkt_residual=resid)


def whitened_trs(Q: np.ndarray, lin: np.ndarray, E: np.ndarray, budget: float):
    """Map an ellipsoid-constrained quadratic onto a TrsProblem.

    min f^H Q f - 2 Re{lin^H f}  s.t.  f^H E f <= budget, E PD, turns into a
    ball problem in x = E^{1/2} f. Returns (problem, E^{-1/2}) so callers can
    map the solution back via f = E^{-1/2} x.
    """
    e_isqrt = inv_sqrt_pd(E)
    q_w = e_isqrt @ np.asarray(Q, dtype=complex) @ e_isqrt
    lin_w = e_isqrt @ np.asarray(lin, dtype=complex).reshape(-1)
    prob = TrsProblem(Q=0.5 * (q_w + q_w.conj().T), q=lin_w, rho=float(np.sqrt(budget)))
    return prob, e_isqrt
