"""Batch-mode precoder subproblem: QCQP assembly, APG solve, SOCP export.

With the weight matrix and postcoder fixed, the joint precoder update is the
convex QCQP

    min_f  f^H (A + C) f - 2 Re{g^H B f} + c
    s.t.   f^H D_i f <= P_i,   i = 0..L-1,

over the stacked vector f = [vec(F_0); ...; vec(F_{L-1})]. Each D_i is the
block-diagonal embedding of E_i = (Sigma_s + Sigma_i)^* (x) I_{N_i}, so a
per-block change of variables x_i = E_i^{1/2} f_i turns every constraint into
a Euclidean ball; the whitened problem is solved by the accelerated projected
gradient kernel. The equivalent standard SOCP form can be exported for
external conic solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._apg import apg_ball_qp, project_blocks
from .linalg import hermitianize, inv_sqrt_pd, kron, sqrt_psd, vec
from .model import BeamformerSet, NetworkModel
from .wmmse import WmmseState

# A + C must be PSD (it is, analytically); tolerated asymmetry of the spectrum.
PSD_TOL = 1e-10
ACTIVE_TOL = 1e-6


@dataclass(frozen=True)
class QcqpData:
    """Assembled batch QCQP. Blocks are ordered by sensor.

    A: coupling quadratic, blocks Sigma_s^* (x) (H_i^H G W G^H H_j).
    B: linear-term matrix [B_0, ..., B_{L-1}], B_i = (W Sigma_s)^* (x) H_i.
    C: block-diagonal quadratic, blocks Sigma_i^* (x) (H_i^H G W G^H H_i).
    g: vec(G). c: constant term. P: power budgets.
    shaping: per-sensor Sigma_s + Sigma_i (K x K), defining E_i and D_i.
    starts: block boundaries into the stacked vector (length L + 1).
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    g: np.ndarray
    c: float
    P: tuple[float, ...]
    K: int
    N: tuple[int, ...]
    shaping: tuple[np.ndarray, ...]
    starts: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def L(self) -> int:
        return len(self.P)

    def quadratic(self) -> np.ndarray:
        """A + C, symmetrized."""
        return hermitianize(self.A + self.C)

    def lin(self) -> np.ndarray:
        """b = B^H g, so the linear term reads -2 Re{b^H f}."""
        return self.B.conj().T @ self.g

    def E(self, i: int) -> np.ndarray:
        """Constraint quadratic of sensor i in its own block coordinates."""
        return kron(self.shaping[i].conj(), np.eye(self.N[i]))

    def D(self, i: int) -> np.ndarray:
        """Full-size constraint quadratic (zero outside block i)."""
        out = np.zeros((self.n, self.n), dtype=complex)
        s, e = self.starts[i], self.starts[i + 1]
        out[s:e, s:e] = self.E(i)
        return out

    def block(self, x: np.ndarray, i: int) -> np.ndarray:
        return x[self.starts[i] : self.starts[i + 1]]


def block_starts(m: NetworkModel) -> np.ndarray:
    sizes = [m.K * n for n in m.N]
    return np.concatenate([[0], np.cumsum(sizes)]).astype(np.intp)


def stack_beamformers(f: BeamformerSet) -> np.ndarray:
    return np.concatenate([vec(fi) for fi in f.F])


def unstack_beamformers(m: NetworkModel, fvec: np.ndarray) -> BeamformerSet:
    starts = block_starts(m)
    mats = []
    for i in range(m.L):
        mats.append(fvec[starts[i] : starts[i + 1]].reshape(m.N[i], m.K, order="F"))
    return BeamformerSet(mats)


def assemble_qcqp(m: NetworkModel, s: WmmseState) -> QcqpData:
    """Build the QCQP whose objective equals the weighted-MSE trace objective."""
    G, W = s.G, s.W
    if G.shape != (m.M, m.K) or W.shape != (m.K, m.K):
        raise ValueError("WmmseState shapes do not conform to the model")
    t = hermitianize(G @ W @ G.conj().T)
    th = [t @ h for h in m.H]  # T H_j, reused across the block row
    starts = block_starts(m)
    n = int(starts[-1])

    a = np.zeros((n, n), dtype=complex)
    c_mat = np.zeros((n, n), dtype=complex)
    ss_conj = m.Sigma_s.conj()
    for i in range(m.L):
        hi_h = m.H[i].conj().T
        for j in range(m.L):
            a[starts[i] : starts[i + 1], starts[j] : starts[j + 1]] = kron(ss_conj, hi_h @ th[j])
        c_mat[starts[i] : starts[i + 1], starts[i] : starts[i + 1]] = kron(
            m.Sigma_i[i].conj(), hi_h @ th[i]
        )

    ws_conj = (W @ m.Sigma_s).conj()
    b = np.concatenate([kron(ws_conj, m.H[i]) for i in range(m.L)], axis=1)

    const = float(np.real(np.trace(W @ m.Sigma_s))) + m.sigma0_sq * float(np.real(np.trace(t)))
    return QcqpData(
        A=a,
        B=b,
        C=c_mat,
        g=vec(G),
        c=const,
        P=m.P,
        K=m.K,
        N=m.N,
        shaping=tuple(m.sensor_shaping(i) for i in range(m.L)),
        starts=starts,
    )


def qcqp_objective(d: QcqpData, fvec: np.ndarray) -> float:
    """f^H (A+C) f - 2 Re{g^H B f} + c."""
    quad = float(np.real(fvec.conj() @ ((d.A + d.C) @ fvec)))
    lin = 2.0 * float(np.real(d.g.conj() @ (d.B @ fvec)))
    return quad - lin + d.c


def constraint_value(d: QcqpData, fvec: np.ndarray, i: int) -> float:
    """f^H D_i f, evaluated on block i only."""
    fi = d.block(fvec, i)
    return float(np.real(fi.conj() @ (d.E(i) @ fi)))


@dataclass
class QcqpResult:
    """Solution of one batch QCQP with its KKT certificate."""

    f: np.ndarray
    objective: float
    converged: bool
    iterations: int
    grad_map_norm: float
    multipliers: np.ndarray
    stationarity: float
    complementarity: np.ndarray
    feasibility: np.ndarray


def _whitening(d: QcqpData):
    """Block-diagonal E^{1/2} and E^{-1/2} from the K x K shaping matrices."""
    half = np.zeros((d.n, d.n), dtype=complex)
    inv_half = np.zeros((d.n, d.n), dtype=complex)
    for i in range(d.L):
        s, e = d.starts[i], d.starts[i + 1]
        eye = np.eye(d.N[i])
        half[s:e, s:e] = kron(sqrt_psd(d.shaping[i]).conj(), eye)
        inv_half[s:e, s:e] = kron(inv_sqrt_pd(d.shaping[i]).conj(), eye)
    return half, inv_half


def solve_qcqp(
    d: QcqpData,
    f0: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 50_000,
    backend: str | None = None,
) -> QcqpResult:
    """Solve the batch QCQP by APG in whitened coordinates.

    f0 is projected onto the feasible set if needed (warm starts from the
    previous outer iterate are the common case). Raises ValueError if A + C
    is indefinite beyond tolerance; an exhausted iteration budget is reported
    through converged=False with the best iterate retained.
    """
    half, inv_half = _whitening(d)
    quad = hermitianize(inv_half @ d.quadratic() @ inv_half)
    lin = inv_half @ d.lin()
    lam = np.linalg.eigvalsh(quad)
    maxeig = float(lam[-1])
    if lam[0] < -PSD_TOL * max(maxeig, 1e-300):
        raise ValueError("A + C is not PSD within tolerance")

    radii = np.sqrt(np.asarray(d.P, dtype=float))
    if maxeig <= 1e-300:
        # Purely linear objective: each block goes full power along its
        # linear coefficient (or stays at zero).
        x = np.zeros(d.n, dtype=complex)
        for i in range(d.L):
            s, e = d.starts[i], d.starts[i + 1]
            nrm = np.linalg.norm(lin[s:e])
            if nrm > 0:
                x[s:e] = radii[i] * lin[s:e] / nrm
        iters, gm, converged = 0, 0.0, True
    else:
        x0 = half @ np.asarray(f0, dtype=complex).reshape(-1)
        scale = 1.0 + float(np.linalg.norm(lin))
        x, iters, gm, converged = apg_ball_qp(
            quad, lin, d.starts, radii, x0, maxeig, tol * scale, max_iter, backend=backend
        )

    # Multiplier recovery and KKT certificate, reported in the original
    # coordinates (multipliers are invariant under the whitening).
    grad = quad @ x - lin
    mults = np.zeros(d.L)
    for i in range(d.L):
        s, e = d.starts[i], d.starts[i + 1]
        xi = x[s:e]
        if np.linalg.norm(xi) >= radii[i] * (1.0 - ACTIVE_TOL):
            mults[i] = max(0.0, -float(np.real(xi.conj() @ grad[s:e])) / d.P[i])

    fvec = inv_half @ x
    b = d.lin()
    resid = d.quadratic() @ fvec - b
    comp = np.zeros(d.L)
    feas = np.zeros(d.L)
    for i in range(d.L):
        s, e = d.starts[i], d.starts[i + 1]
        val = float(np.real(x[s:e].conj() @ x[s:e]))  # equals f^H D_i f
        resid[s:e] += mults[i] * (half[s:e, s:e] @ x[s:e])  # lambda_i D_i f
        comp[i] = abs(mults[i] * (val - d.P[i]))
        feas[i] = max(0.0, val - d.P[i]) / d.P[i]
    stationarity = float(np.linalg.norm(resid)) / (1.0 + float(np.linalg.norm(b)))

    return QcqpResult(
        f=fvec,
        objective=qcqp_objective(d, fvec),
        converged=converged,
        iterations=iters,
        grad_map_norm=float(gm),
        multipliers=mults,
        stationarity=stationarity,
        complementarity=comp,
        feasibility=feas,
    )


def project_feasible(d: QcqpData, fvec: np.ndarray) -> np.ndarray:
    """Exact Euclidean-in-whitened-coordinates projection onto the constraints."""
    half, inv_half = _whitening(d)
    x = half @ np.asarray(fvec, dtype=complex).reshape(-1)
    project_blocks(x, d.starts, np.sqrt(np.asarray(d.P)))
    return inv_half @ x


@dataclass(frozen=True)
class SocpExport:
    """Data of the standard second-order-cone form of the batch QCQP.

    Variables (f, t, s): minimize t subject to
        s - 2 Re{linear^H f} + c <= t,
        || [sqrtAC f; (s-1)/2] ||_2 <= (s+1)/2,
        || [sqrtD_i f; (P_i-1)/2] ||_2 <= (P_i+1)/2  for each i.
    """

    sqrtAC: np.ndarray
    sqrtD: tuple[np.ndarray, ...]
    linear: np.ndarray
    c: float
    P: tuple[float, ...]


def export_socp(d: QcqpData) -> SocpExport:
    """Emit the SOCP-standard-form data of the assembled QCQP."""
    sqrt_ac = sqrt_psd(d.quadratic())
    sqrt_d = []
    for i in range(d.L):
        full = np.zeros((d.n, d.n), dtype=complex)
        s, e = d.starts[i], d.starts[i + 1]
        full[s:e, s:e] = kron(sqrt_psd(d.shaping[i]).conj(), np.eye(d.N[i]))
        sqrt_d.append(full)
    return SocpExport(sqrtAC=sqrt_ac, sqrtD=tuple(sqrt_d), linear=d.lin(), c=d.c, P=d.P)


def _write_complex_matrix(fh, name: str, a: np.ndarray):
    a = np.atleast_2d(a)
    fh.write(f"matrix {name} {a.shape[0]} {a.shape[1]}\n")
    for row in a:
        fh.write(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row) + "\n")


def write_socp(exp: SocpExport, path):
    """Serialize an SocpExport to the documented plain-text format.

    Layout: a header, the scalar data, then each matrix/vector as dense
    complex entries written as "re im" pairs, then the cone list. See the
    README for the full grammar.
    """
    n = exp.sqrtAC.shape[0]
    with open(path, "w") as fh:
        fh.write("MIBEAM-SOCP v1\n")
        fh.write(f"n {n}\n")
        fh.write(f"L {len(exp.P)}\n")
        fh.write(f"c {float(exp.c)!r}\n")
        fh.write("P " + " ".join(repr(float(p)) for p in exp.P) + "\n")
        _write_complex_matrix(fh, "sqrtAC", exp.sqrtAC)
        fh.write(f"vector linear {n}\n")
        fh.write(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in exp.linear) + "\n")
        for i, mat in enumerate(exp.sqrtD):
            _write_complex_matrix(fh, f"sqrtD[{i}]", mat)
        fh.write("cones\n")
        fh.write("objective soc [sqrtAC*f; (s-1)/2] <= (s+1)/2 with epigraph t >= s - 2*Re(linear^H f) + c\n")
        for i, p in enumerate(exp.P):
            fh.write(f"power {i} soc [sqrtD[{i}]*f; ({float(p)!r}-1)/2] <= ({float(p)!r}+1)/2\n")
