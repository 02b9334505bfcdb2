"""Shared test fixtures and the independent first-order oracles.

The oracles here deliberately avoid the solution paths they check: the
trust-region reference is a fixed-step projected gradient loop (no
eigendecomposition, no secular equation), and the QCQP reference is the same
loop with per-block projections (no acceleration, no restart logic).
"""

import numpy as np
import pytest

from mibeam import stack_beamformers, wmmse_state
from mibeam.qcqp import _whitening, assemble_qcqp


def trs_pgd_oracle(Q, q, rho, tol=1e-10, max_iter=400_000):
    """Projected gradient on the ball, step 1/(2 maxeig + 1).

    Runs until the gradient-mapping norm falls below tol; returns (x, obj).
    """
    q = np.asarray(q, dtype=complex).reshape(-1)
    n = q.size
    maxeig = float(np.linalg.eigvalsh(Q)[-1]) if n else 0.0
    t = 1.0 / (2.0 * maxeig + 1.0)
    x = np.zeros(n, dtype=complex)
    for _ in range(max_iter):
        step = x - t * 2.0 * (Q @ x - q)
        nrm = np.linalg.norm(step)
        if nrm > rho:
            step *= rho / nrm
        if np.linalg.norm(x - step) <= tol * t:
            x = step
            break
        x = step
    obj = float(np.real(x.conj() @ (Q @ x)) - 2.0 * np.real(q.conj() @ x))
    return x, obj


def blockball_pgd_oracle(M, b, starts, radii, x0, tol=1e-12, max_iter=1_000_000):
    """Plain long-run projected gradient for the whitened batch QCQP."""
    maxeig = float(np.linalg.eigvalsh(M)[-1])
    t = 1.0 / (2.0 * maxeig + 1.0)
    x = np.array(x0, dtype=complex)
    for _ in range(max_iter):
        step = x - t * 2.0 * (M @ x - b)
        for i in range(len(radii)):
            blk = step[starts[i] : starts[i + 1]]
            nrm = np.linalg.norm(blk)
            if nrm > radii[i]:
                blk *= radii[i] / nrm
        if np.linalg.norm(x - step) <= tol * t:
            x = step
            break
        x = step
    obj = float(np.real(x.conj() @ (M @ x)) - 2.0 * np.real(b.conj() @ x))
    return x, obj


def qcqp_pgd_reference(model, f0, state=None, tol=1e-12, max_iter=1_000_000):
    """Long-run first-order reference for solve_qcqp, in original coordinates."""
    state = state or wmmse_state(model, f0)
    data = assemble_qcqp(model, state)
    half, inv_half = _whitening(data)
    quad = inv_half @ data.quadratic() @ inv_half
    quad = 0.5 * (quad + quad.conj().T)
    lin = inv_half @ data.lin()
    x0 = half @ stack_beamformers(f0)
    radii = np.sqrt(np.asarray(data.P))
    x, _ = blockball_pgd_oracle(quad, lin, data.starts, radii, x0, tol=tol, max_iter=max_iter)
    fvec = inv_half @ x
    return data, fvec


def rel_err(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / (
        1.0 + float(np.linalg.norm(np.asarray(b)))
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
