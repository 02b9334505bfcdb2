"""Cyclic multi-block coordinate ascent: one precoder at a time.

Each sensor's subproblem is a convex quadratic over the ellipsoid
f_i^H E_i f_i <= P_i; whitening by E_i^{-1/2} turns it into a ball-constrained
trust-region subproblem solved in closed form (up to one bisection). For a
scalar source the quadratic is rank one and the whole update collapses to an
analytic expression with no eigendecomposition at all. The postcoder and the
weight matrix are refreshed after every single block update.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .kkt import kkt_residual_p0
from .linalg import hermitianize, kron, vec
from .model import (
    BeamformerSet,
    NetworkModel,
    effective_channel,
    is_feasible,
    mutual_information,
)
from .qcqp import QcqpData
from .trace import BcaOptions, IterationTrace
from .trs import solve_trs, whitened_trs
from .wmmse import WmmseState, surrogate_objective, update_G, update_W, wmmse_state


@dataclass(frozen=True)
class SensorSubproblem:
    """Block-i data: min f^H Qi f - 2 Re{lin^H f} s.t. f^H Ei f <= Pi."""

    i: int
    Qi: np.ndarray
    lin: np.ndarray
    Ei: np.ndarray
    Pi: float


def build_subproblem(d: QcqpData, fvec: np.ndarray, i: int) -> SensorSubproblem:
    """Extract sensor i's subproblem from the assembled batch QCQP.

    The coupling to the other blocks enters only through the shifted linear
    term lin = B_i^H g - q_i, q_i = sum_{j != i} A_ij f_j.
    """
    if not 0 <= i < d.L:
        raise IndexError(f"sensor index {i} out of range [0, {d.L})")
    s, e = d.starts[i], d.starts[i + 1]
    fvec = np.asarray(fvec, dtype=complex).reshape(-1)
    qi = (d.A @ fvec)[s:e] - d.A[s:e, s:e] @ fvec[s:e]
    lin = (d.B[:, s:e].conj().T @ d.g) - qi
    quad = hermitianize(d.A[s:e, s:e] + d.C[s:e, s:e])
    return SensorSubproblem(i=i, Qi=quad, lin=lin, Ei=d.E(i), Pi=d.P[i])


def sensor_subproblem(
    m: NetworkModel, s: WmmseState, f: BeamformerSet, i: int
) -> SensorSubproblem:
    """Build sensor i's subproblem directly from model quantities.

    Equivalent to build_subproblem(assemble_qcqp(m, s), ...) but O(L) instead
    of O(L^2); this is what the cyclic driver uses.
    """
    t = hermitianize(s.G @ s.W @ s.G.conj().T)
    heff_rest = effective_channel(m, f) - m.H[i] @ f.F[i]
    hi_h = m.H[i].conj().T
    shaping = m.sensor_shaping(i)
    quad = kron(shaping.conj(), hermitianize(hi_h @ t @ m.H[i]))
    lin = vec(hi_h @ (s.G @ s.W - t @ heff_rest) @ m.Sigma_s)
    ei = kron(shaping.conj(), np.eye(m.N[i]))
    return SensorSubproblem(i=i, Qi=quad, lin=lin, Ei=ei, Pi=m.P[i])


def solve_subproblem(sp: SensorSubproblem) -> np.ndarray:
    """Whiten the ellipsoid to a ball, solve the TRS, map back."""
    prob, e_isqrt = whitened_trs(sp.Qi, sp.lin, sp.Ei, sp.Pi)
    sol = solve_trs(prob)
    return e_isqrt @ sol.x


def solve_subproblem_scalar(
    m: NetworkModel, g: np.ndarray, f: BeamformerSet, i: int
) -> np.ndarray:
    """Fully analytic block update for a scalar source (K = 1).

    The quadratic H_i^H g g^H H_i has rank one, so the secular equation has a
    closed-form root and the boundary inverse reduces to Sherman-Morrison:
    (mu I + c h h^H)^{-1} h = h / (mu + c ||h||^2). If the interference-
    adjusted linear term fits inside the power ball the interior (least-norm)
    solution applies instead.
    """
    if m.K != 1:
        raise ValueError("scalar path requires K = 1")
    if not 0 <= i < m.L:
        raise IndexError(f"sensor index {i} out of range [0, {m.L})")
    g = np.asarray(g, dtype=complex).reshape(-1)
    sig_s = float(np.real(m.Sigma_s[0, 0]))
    sig_i = float(np.real(m.Sigma_i[i][0, 0]))
    c = sig_s + sig_i
    pbar = m.P[i] / c

    q_rest = np.zeros(m.M, dtype=complex)
    for j in range(m.L):
        if j != i:
            q_rest += m.H[j] @ f.F[j][:, 0]
    a = 1.0 - np.vdot(g, q_rest)
    hg = m.H[i].conj().T @ g
    hg2 = float(np.real(np.vdot(hg, hg)))
    if hg2 == 0.0:
        return np.zeros(m.N[i], dtype=complex)

    if sig_s**4 * abs(a) ** 2 > c**2 * pbar * hg2:
        mu = sig_s**2 * abs(a) * np.sqrt(hg2) / np.sqrt(pbar) - c * hg2
        return sig_s**2 * a * hg / (mu + c * hg2)
    return sig_s**2 * a * hg / (c * hg2)


def run_cyclic_bca(
    m: NetworkModel, f0: BeamformerSet, opts: BcaOptions | None = None
) -> tuple[BeamformerSet, WmmseState, IterationTrace]:
    """Run the cyclic algorithm from a feasible initial beamformer set.

    Blocks are visited in fixed order 0..L-1; G and W are refreshed after
    every block. Convergence of this variant is checked empirically: with
    check_surrogate on, any surrogate decrease beyond tolerance raises.
    """
    opts = opts or BcaOptions()
    if not is_feasible(m, f0, opts.feasibility_slack):
        raise ValueError("initial beamformers violate a power constraint")

    f = f0.copy()
    state = wmmse_state(m, f)
    mi = mutual_information(m, f)
    trace = IterationTrace(algorithm="cyclic", mi_nats=[mi], wall_s=[0.0])
    if opts.check_surrogate:
        sval = surrogate_objective(m, f, state)

    for _ in range(opts.max_outer):
        t0 = time.perf_counter()
        for i in range(m.L):
            if m.K == 1:
                fi = solve_subproblem_scalar(m, state.G, f, i)
            else:
                fi = solve_subproblem(sensor_subproblem(m, state, f, i))
            f.F[i] = fi.reshape(m.N[i], m.K, order="F")
            if opts.check_surrogate:
                sval = _checked_surrogate(m, f, state, sval, opts, f"F[{i}] update")
            g = update_G(m, f)
            state = WmmseState(W=update_W(m, f, g), G=g)
            if opts.check_surrogate:
                sval = _checked_surrogate(m, f, state, sval, opts, f"G/W refresh after block {i}")
        mi_new = mutual_information(m, f)
        trace.wall_s.append(time.perf_counter() - t0)
        trace.mi_nats.append(mi_new)
        if mi_new - mi < opts.mi_tol:
            mi = mi_new
            break
        mi = mi_new

    if opts.compute_kkt:
        trace.kkt = kkt_residual_p0(m, f, state)
    return f, state, trace


def _checked_surrogate(m, f, state, previous, opts, what):
    value = surrogate_objective(m, f, state)
    if value < previous - opts.surrogate_tol * (1.0 + abs(previous)):
        raise RuntimeError(
            f"surrogate objective decreased after {what}: {previous!r} -> {value!r}"
        )
    return value
