"""Accelerated projected gradient for block-ball quadratic programs.

Minimizes phi(x) = Re(x^H M x) - 2 Re(b^H x) subject to per-block Euclidean
ball constraints ||x[s_i:e_i]|| <= r_i, with M Hermitian PSD. This is the
inner loop of the batch-mode precoder update (every power constraint becomes
a ball after per-block whitening), and the hot path of the whole batch
algorithm, so a compiled twin of the pure-numpy loop is used when available.

Backend selection happens at import: the Cython extension if it built,
otherwise the numpy implementation. Set MIBEAM_PURE_PYTHON=1 to force the
fallback.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from . import _apg_cy

    HAVE_COMPILED = True
except ImportError:
    _apg_cy = None
    HAVE_COMPILED = False

_FORCE_PY = os.environ.get("MIBEAM_PURE_PYTHON", "") not in ("", "0")
BACKEND = "compiled" if (HAVE_COMPILED and not _FORCE_PY) else "python"


def project_blocks(x: np.ndarray, starts: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Radially project each block of x onto its ball, in place."""
    for i in range(len(radii)):
        blk = x[starts[i] : starts[i + 1]]
        nrm = np.linalg.norm(blk)
        if nrm > radii[i]:
            blk *= radii[i] / nrm
    return x


def _phi(x, mx, b):
    return float(np.real(x.conj() @ mx) - 2.0 * np.real(b.conj() @ x))


# Momentum steps may raise the objective by this relative amount before a
# restart fires; without the slack, rounding noise near convergence disables
# the acceleration entirely (every comparison restarts).
RESTART_SLACK = 1e-14


def apg_ball_qp_py(M, b, starts, radii, x0, maxeig, tol, max_iter):
    """Pure-numpy APG with restart-on-nonmonotone momentum.

    Returns (x, iterations, grad_map_norm, converged). The stationarity test
    runs at each new iterate z itself (its gradient mapping is an O(n)
    by-product of the tracked matvec), so the reported norm belongs to the
    returned point. The returned objective never exceeds the one at
    project(x0) beyond rounding slack: a strictly-best iterate is kept as
    the fallback and a converged z must match it to within RESTART_SLACK.
    """
    x = project_blocks(np.array(x0, dtype=complex), starts, radii)
    inv_me = 1.0 / maxeig
    mx = M @ x
    fx = _phi(x, mx, b)
    x_best, mx_best, f_best = x.copy(), mx.copy(), fx
    y = x.copy()
    my = mx.copy()
    theta = 1.0
    iters = 0
    while iters < max_iter:
        iters += 1
        z = project_blocks(y - (my - b) * inv_me, starts, radii)
        mz = M @ z
        fz = _phi(z, mz, b)
        step = project_blocks(z - (mz - b) * inv_me, starts, radii)
        gm = 2.0 * maxeig * np.linalg.norm(z - step)
        slack = RESTART_SLACK * (1.0 + abs(f_best))
        if fz < f_best:
            x_best, mx_best, f_best = z.copy(), mz.copy(), fz
        if gm <= tol and fz <= f_best + slack:
            return z, iters, float(gm), True
        if fz > fx + RESTART_SLACK * (1.0 + abs(fx)):
            theta = 1.0
            y = x.copy()
            my = mx.copy()
            continue
        theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        beta = (theta - 1.0) / theta_new
        y = z + beta * (z - x)
        my = mz + beta * (mz - mx)
        x, mx, fx = z, mz, fz
        theta = theta_new
    step = project_blocks(x_best - (mx_best - b) * inv_me, starts, radii)
    gm = 2.0 * maxeig * np.linalg.norm(x_best - step)
    return x_best, iters, float(gm), bool(gm <= tol)


def apg_ball_qp(M, b, starts, radii, x0, maxeig, tol, max_iter, backend=None):
    """Dispatch to the compiled kernel when available (see BACKEND)."""
    which = backend or BACKEND
    starts = np.ascontiguousarray(starts, dtype=np.intp)
    radii = np.ascontiguousarray(radii, dtype=float)
    b = np.ascontiguousarray(b, dtype=complex)
    x0 = np.ascontiguousarray(x0, dtype=complex)
    if which == "compiled":
        if _apg_cy is None:
            raise RuntimeError("compiled kernel requested but not built")
        mf = np.asfortranarray(M, dtype=complex)
        return _apg_cy.apg_ball_qp(mf, b, starts, radii, x0, float(maxeig), float(tol), int(max_iter))
    return apg_ball_qp_py(np.asarray(M, dtype=complex), b, starts, radii, x0, float(maxeig), float(tol), int(max_iter))
