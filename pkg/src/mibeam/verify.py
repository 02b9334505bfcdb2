"""Self-contained invariant battery behind the `verify` CLI subcommand.

Each check draws seeded random instances, exercises one of the package's
mathematical guarantees, and returns (name, passed, detail). The random
generators here are also reused by the test suite so failures reproduce.
"""

from __future__ import annotations

import inspect

import numpy as np

from .batch import run_batch_bca
from .cyclic import run_cyclic_bca, sensor_subproblem, solve_subproblem, solve_subproblem_scalar
from .experiments import build_model, complex_gaussian, random_feasible_initial, stable_seed
from .experiments import ScenarioConfig
from .kkt import mi_gradient, mi_gradient_fd, verify_identities
from .model import BeamformerSet, NetworkModel, mutual_information
from .qcqp import assemble_qcqp, qcqp_objective, stack_beamformers
from .trace import BcaOptions
from .trs import TrsCase, TrsProblem, secular_value, solve_trs
from .wmmse import mse_matrix, surrogate_objective, wmmse_state


def random_scenario(seed: int, kmax: int = 4, lmax: int = 4, dmax: int = 5,
                    snr_lo: float = -5.0, snr_hi: float = 15.0) -> ScenarioConfig:
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, kmax + 1))
    l = int(rng.integers(1, lmax + 1))
    m = int(rng.integers(1, dmax + 1))
    n = tuple(int(rng.integers(1, dmax + 1)) for _ in range(l))
    return ScenarioConfig(
        K=k,
        L=l,
        M=m,
        N=n,
        snr_sensor_db=tuple(float(rng.uniform(snr_lo, snr_hi)) for _ in range(l)),
        P=tuple(float(rng.uniform(0.5, 3.0)) for _ in range(l)),
        snr_channel_db=(float(rng.uniform(snr_lo, snr_hi)),),
        seed=seed,
    )


def random_instance(seed: int, **kwargs) -> tuple[NetworkModel, BeamformerSet]:
    """One random network plus a random feasible (full-power) initial."""
    cfg = random_scenario(seed, **kwargs)
    model = build_model(cfg, stable_seed(seed, 1))
    return model, random_feasible_initial(model, stable_seed(seed, 2))


def random_trs_problem(seed: int, nmax: int = 8) -> TrsProblem:
    """Random PSD trust-region instance with a controlled rank and branch mix.

    Eigenvalues are drawn away from zero (U[0.5, 3]) so the first-order test
    oracle converges quickly; rank runs over 0..n; about half the instances
    put q in the range space to reach the interior branch.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, nmax + 1))
    rank = int(rng.integers(0, n + 1))
    u = np.linalg.qr(complex_gaussian(rng, (n, n)))[0]
    lam = np.zeros(n)
    lam[:rank] = np.sort(rng.uniform(0.5, 3.0, size=rank))[::-1]
    q_mat = (u * lam) @ u.conj().T
    if rank > 0 and rng.random() < 0.5:
        q = u[:, :rank] @ complex_gaussian(rng, (rank,))  # q in the range space
    else:
        q = complex_gaussian(rng, (n,))
    rho = float(rng.uniform(0.2, 3.0))
    return TrsProblem(Q=0.5 * (q_mat + q_mat.conj().T), q=q, rho=rho)


def check_trs_certificates(seed: int = 0, instances: int = 80):
    """KKT certificates assertable directly from TrsSolution fields."""
    for t in range(instances):
        prob = random_trs_problem(stable_seed(seed, 100, t))
        sol = solve_trs(prob)
        qnorm = float(np.linalg.norm(prob.q))
        checks = [
            np.linalg.norm(sol.x) <= prob.rho * (1.0 + 1e-9),
            sol.mu >= 0.0,
            abs(sol.mu * (np.linalg.norm(sol.x) ** 2 - prob.rho**2)) <= 1e-8 * prob.rho**2,
            sol.kkt_residual <= 1e-7 * (qnorm + 1.0),
        ]
        if sol.case is TrsCase.BOUNDARY_UNIQUE:
            checks.append(abs(np.linalg.norm(sol.x) - prob.rho) <= 1e-8 * prob.rho)
        if not all(checks):
            return False, f"certificate failed on instance {t}"
    return True, f"{instances} instances certified"


def check_surrogate_tightness(seed: int = 0, instances: int = 25):
    worst = 0.0
    for t in range(instances):
        model, f0 = random_instance(stable_seed(seed, 200, t))
        mi = mutual_information(model, f0)
        gap = abs(surrogate_objective(model, f0, wmmse_state(model, f0)) - mi)
        worst = max(worst, gap / (1.0 + abs(mi)))
    ok = worst <= 1e-9
    return ok, f"max relative surrogate/MI gap {worst:.2e}"


def check_identities(seed: int = 0, instances: int = 25):
    for t in range(instances):
        model, f0 = random_instance(stable_seed(seed, 300, t))
        if not verify_identities(model, f0):
            return False, f"identity failed on instance {t}"
    return True, f"{instances} instances"


def check_gradient(seed: int = 0, instances: int = 10):
    worst = 0.0
    for t in range(instances):
        model, f0 = random_instance(stable_seed(seed, 400, t), dmax=3)
        rng = np.random.default_rng(stable_seed(seed, 401, t))
        i = int(rng.integers(0, model.L))
        g = mi_gradient(model, f0, i)
        g_fd = mi_gradient_fd(model, f0, i)
        worst = max(worst, np.linalg.norm(g - g_fd) / (1.0 + np.linalg.norm(g)))
    ok = worst <= 1e-6
    return ok, f"max relative gradient error {worst:.2e}"


def check_monotone(seed: int = 0, instances: int = 6):
    opts = BcaOptions(max_outer=20, compute_kkt=False)
    for t in range(instances):
        model, f0 = random_instance(stable_seed(seed, 500, t))
        for runner in (run_batch_bca, run_cyclic_bca):
            _, _, trace = runner(model, f0, opts)
            deltas = np.diff(trace.mi_nats)
            if len(deltas) and float(deltas.min()) < -1e-9:
                return False, f"MI decreased ({runner.__name__}, instance {t})"
    return True, f"{instances} instances, both algorithms"


def check_scalar_path(seed: int = 0, instances: int = 60):
    worst = 0.0
    for t in range(instances):
        model, f0 = random_instance(stable_seed(seed, 600, t), kmax=1)
        state = wmmse_state(model, f0)
        rng = np.random.default_rng(stable_seed(seed, 601, t))
        i = int(rng.integers(0, model.L))
        fast = solve_subproblem_scalar(model, state.G, f0, i)
        generic = solve_subproblem(sensor_subproblem(model, state, f0, i))
        worst = max(worst, np.linalg.norm(fast - generic) / (1.0 + np.linalg.norm(generic)))
    ok = worst <= 1e-9
    return ok, f"max path disagreement {worst:.2e}"


def check_objective_equivalence(seed: int = 0, instances: int = 25):
    """QCQP objective must match the weighted-MSE trace objective."""
    worst = 0.0
    for t in range(instances):
        model, f0 = random_instance(stable_seed(seed, 700, t))
        state = wmmse_state(model, f0)
        data = assemble_qcqp(model, state)
        direct = float(np.real(np.trace(state.W @ mse_matrix(model, f0, state.G))))
        via_qcqp = qcqp_objective(data, stack_beamformers(f0))
        worst = max(worst, abs(direct - via_qcqp) / (1.0 + abs(direct)))
    ok = worst <= 1e-9
    return ok, f"max relative objective mismatch {worst:.2e}"


def check_secular_monotone(seed: int = 0, instances: int = 40):
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        n = int(rng.integers(1, 8))
        lam = np.sort(rng.uniform(0.0, 3.0, n))[::-1]
        p = complex_gaussian(rng, (n,))
        mus = np.sort(rng.uniform(1e-3, 5.0, 4))
        vals = [secular_value(lam, p, mu) for mu in mus]
        if any(a <= b for a, b in zip(vals, vals[1:])):
            return False, "secular function not strictly decreasing"
    return True, f"{instances} instances"


ALL_CHECKS = (
    ("trs-certificates", check_trs_certificates),
    ("secular-monotone", check_secular_monotone),
    ("surrogate-tightness", check_surrogate_tightness),
    ("response-identities", check_identities),
    ("mi-gradient-fd", check_gradient),
    ("objective-equivalence", check_objective_equivalence),
    ("scalar-closed-form", check_scalar_path),
    ("monotone-mi", check_monotone),
)


def run_verification(seed: int = 0, scale: float = 1.0) -> list[tuple[str, bool, str]]:
    """Run every check; scale multiplies the per-check instance counts."""
    results = []
    for name, fn in ALL_CHECKS:
        count = inspect.signature(fn).parameters["instances"].default
        ok, detail = fn(seed=seed, instances=max(1, int(count * scale)))
        results.append((name, ok, detail))
    return results
