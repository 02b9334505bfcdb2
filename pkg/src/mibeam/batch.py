"""Batch-mode block coordinate ascent: all precoders updated jointly.

Each outer loop solves the assembled convex QCQP for the full precoder stack
(warm-started from the previous iterate, so the weighted-MSE objective never
degrades), then refreshes the postcoder and the weight matrix by their
closed forms. The MI sequence this generates is non-decreasing and its limit
points are KKT points of the constrained MI problem.
"""

from __future__ import annotations

import time

from .model import BeamformerSet, NetworkModel, is_feasible, mutual_information
from .kkt import kkt_residual_p0
from .qcqp import assemble_qcqp, solve_qcqp, stack_beamformers, unstack_beamformers
from .trace import BcaOptions, IterationTrace
from .wmmse import WmmseState, wmmse_state


def run_batch_bca(
    m: NetworkModel, f0: BeamformerSet, opts: BcaOptions | None = None
) -> tuple[BeamformerSet, WmmseState, IterationTrace]:
    """Run the batch algorithm from a feasible initial beamformer set.

    Returns the final beamformers, the matching (G, W) state, and the trace
    with MI recorded at iteration 0 and after every outer loop.
    """
    opts = opts or BcaOptions()
    if not is_feasible(m, f0, opts.feasibility_slack):
        raise ValueError("initial beamformers violate a power constraint")

    f = f0.copy()
    state = wmmse_state(m, f)
    mi = mutual_information(m, f)
    trace = IterationTrace(algorithm="batch", mi_nats=[mi], wall_s=[0.0])

    fvec = stack_beamformers(f)
    for _ in range(opts.max_outer):
        t0 = time.perf_counter()
        data = assemble_qcqp(m, state)
        result = solve_qcqp(
            data, fvec, tol=opts.inner_tol, max_iter=opts.inner_max_iter, backend=opts.backend
        )
        fvec = result.f
        f = unstack_beamformers(m, fvec)
        state = wmmse_state(m, f)
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
