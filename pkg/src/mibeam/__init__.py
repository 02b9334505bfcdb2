"""Beamformer design maximizing end-to-end mutual information in a coherent
multi-sensor MIMO network, via a weighted-MMSE surrogate and two block
coordinate ascent strategies: a batch mode that updates all precoders jointly
through a convex QCQP (with SOCP export), and a cyclic mode that solves one
closed-form trust-region subproblem per sensor.
"""

from ._apg import BACKEND as kernel_backend
from .batch import run_batch_bca
from .cyclic import (
    SensorSubproblem,
    build_subproblem,
    run_cyclic_bca,
    sensor_subproblem,
    solve_subproblem,
    solve_subproblem_scalar,
)
from .experiments import (
    ScenarioConfig,
    benchmark_per_loop,
    build_model,
    heterogeneous_network,
    homogeneous_network,
    random_baseline_mi,
    random_feasible_initial,
    run_experiment,
    stable_seed,
    write_traces_csv,
    write_traces_json,
)
from .kkt import KktReport, kkt_residual_p0, mi_gradient, mi_gradient_fd, verify_identities
from .model import (
    BeamformerSet,
    NetworkModel,
    effective_channel,
    is_feasible,
    make_model,
    mutual_information,
    noise_covariance,
    transmit_power,
    whiten_receiver_noise,
    zero_beamformers,
)
from .qcqp import (
    QcqpData,
    QcqpResult,
    SocpExport,
    assemble_qcqp,
    export_socp,
    qcqp_objective,
    solve_qcqp,
    stack_beamformers,
    unstack_beamformers,
    write_socp,
)
from .trace import BcaOptions, IterationTrace
from .trs import TrsCase, TrsProblem, TrsSolution, secular_value, solve_secular, solve_trs
from .wmmse import WmmseState, mse_matrix, surrogate_objective, update_G, update_W, wmmse_state

__version__ = "0.1.0"

__all__ = [
    "BcaOptions",
    "BeamformerSet",
    "IterationTrace",
    "KktReport",
    "NetworkModel",
    "QcqpData",
    "QcqpResult",
    "ScenarioConfig",
    "SensorSubproblem",
    "SocpExport",
    "TrsCase",
    "TrsProblem",
    "TrsSolution",
    "WmmseState",
    "assemble_qcqp",
    "benchmark_per_loop",
    "build_model",
    "build_subproblem",
    "effective_channel",
    "export_socp",
    "heterogeneous_network",
    "homogeneous_network",
    "is_feasible",
    "kernel_backend",
    "kkt_residual_p0",
    "make_model",
    "mi_gradient",
    "mi_gradient_fd",
    "mse_matrix",
    "mutual_information",
    "noise_covariance",
    "qcqp_objective",
    "random_baseline_mi",
    "random_feasible_initial",
    "run_batch_bca",
    "run_cyclic_bca",
    "run_experiment",
    "secular_value",
    "sensor_subproblem",
    "solve_qcqp",
    "solve_secular",
    "solve_subproblem",
    "solve_subproblem_scalar",
    "solve_trs",
    "stable_seed",
    "stack_beamformers",
    "surrogate_objective",
    "transmit_power",
    "unstack_beamformers",
    "update_G",
    "update_W",
    "verify_identities",
    "whiten_receiver_noise",
    "wmmse_state",
    "write_socp",
    "write_traces_csv",
    "write_traces_json",
    "zero_beamformers",
]
