"""Acceptance suite: every criterion at its stated tolerance, one line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL line
per criterion as it completes. All randomness is seeded; reruns are
deterministic on one platform.
"""

import time

import numpy as np
import pytest

from conftest import trs_pgd_oracle
from mibeam import (
    BcaOptions,
    assemble_qcqp,
    build_model,
    heterogeneous_network,
    mse_matrix,
    mutual_information,
    qcqp_objective,
    random_baseline_mi,
    random_feasible_initial,
    run_batch_bca,
    run_cyclic_bca,
    sensor_subproblem,
    solve_subproblem,
    solve_subproblem_scalar,
    stable_seed,
    stack_beamformers,
    surrogate_objective,
    verify_identities,
)
from mibeam.cli import main as cli_main
from mibeam.kkt import mi_gradient, mi_gradient_fd
from mibeam.trs import TrsCase, solve_trs, trs_objective, whitened_trs
from mibeam.verify import random_instance, random_trs_problem
from mibeam.wmmse import wmmse_state

SEED = 20240817


def _report(name, ok, detail, t0):
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} — {detail} [{time.time() - t0:.1f}s]"
    print(line)
    return ok


def test_c01_monotone_mi_both_algorithms():
    t0 = time.time()
    opts = BcaOptions(max_outer=20, mi_tol=1e-8, compute_kkt=False)
    worst = np.inf
    for t in range(200):
        m, f0 = random_instance(stable_seed(SEED, 1, t), kmax=5, lmax=5, dmax=5)
        for runner in (run_batch_bca, run_cyclic_bca):
            _, _, trace = runner(m, f0, opts)
            if len(trace.mi_nats) > 1:
                worst = min(worst, float(np.min(np.diff(trace.mi_nats))))
    ok = worst >= -1e-9
    assert _report(
        "1 monotone-MI", ok, f"min per-loop MI delta {worst:.3e} over 200 instances x 2 algorithms", t0
    )


def test_c02_kkt_at_convergence():
    t0 = time.time()
    opts = BcaOptions(max_outer=5000, mi_tol=1e-10)
    residuals = []
    instances = []
    for t in range(50):
        m, f0 = random_instance(stable_seed(SEED, 2, t), kmax=5, lmax=5, dmax=5)
        instances.append((m, f0))
        _, _, trace = run_batch_bca(m, f0, opts)
        residuals.append(trace.kkt.max_residual)
    residuals = np.array(residuals)
    ok = bool(np.all(residuals <= 1e-5))
    detail = (
        f"max_residual max {residuals.max():.2e}, median {np.median(residuals):.2e}, "
        f"{int((residuals > 1e-5).sum())}/50 above 1e-5 at mi_tol=1e-10"
    )
    if not ok:
        # context: the residual keeps shrinking with the stopping tolerance,
        # the 1e-5 gate just sits below what mi_tol=1e-10 truncation leaves
        m, f0 = instances[int(np.argmax(residuals))]
        _, _, deep = run_batch_bca(m, f0, BcaOptions(max_outer=20000, mi_tol=1e-13))
        detail += f"; worst instance at mi_tol=1e-13 reaches {deep.kkt.max_residual:.2e}"
    assert _report("2 kkt-at-convergence", ok, detail, t0)


def test_c03_trs_oracle_equivalence():
    t0 = time.time()
    n_interior = n_boundary = 0
    worst_gap = 0.0
    for t in range(1000):
        prob = random_trs_problem(stable_seed(SEED, 3, t), nmax=8)
        sol = solve_trs(prob)
        # certificate
        assert np.linalg.norm(sol.x) <= prob.rho * (1 + 1e-9)
        assert sol.mu >= 0
        assert sol.kkt_residual <= 1e-7 * (np.linalg.norm(prob.q) + 1)
        # dichotomy tag from an independent eigendecomposition
        lam, u = np.linalg.eigh(prob.Q)
        lam, u = lam[::-1], u[:, ::-1]
        p = u.conj().T @ prob.q
        qnorm = np.linalg.norm(prob.q)
        rank = int(np.sum(lam > 1e-10 * max(lam[0], 0.0))) if lam.size else 0
        orth = bool(np.all(np.abs(p[rank:]) <= 1e-9 * qnorm)) if qnorm > 0 else True
        fits = (
            float(np.sum(np.abs(p[:rank]) ** 2 / lam[:rank] ** 2)) <= prob.rho**2 * (1 + 1e-10)
            if rank
            else True
        )
        expected = TrsCase.MIN_NORM_INTERIOR if (orth and fits) else TrsCase.BOUNDARY_UNIQUE
        assert sol.case is expected
        # objective vs the first-order oracle
        obj = trs_objective(prob.Q, prob.q, sol.x)
        _, obj_ref = trs_pgd_oracle(prob.Q, prob.q, prob.rho)
        gap = abs(obj - obj_ref) / (1 + abs(obj))
        worst_gap = max(worst_gap, gap)
        assert gap <= 1e-8
        # min-norm property in every interior case with a nontrivial null space
        if sol.case is TrsCase.MIN_NORM_INTERIOR:
            n_interior += 1
            null = u[:, lam <= 1e-10 * max(lam[0], 0.0)]
            if null.shape[1]:
                rng = np.random.default_rng(stable_seed(SEED, 31, t))
                for _ in range(3):
                    coeff = rng.standard_normal(null.shape[1]) + 1j * rng.standard_normal(
                        null.shape[1]
                    )
                    y = sol.x + 0.1 * (null @ coeff)
                    if np.linalg.norm(y) > prob.rho:
                        continue
                    assert trs_objective(prob.Q, prob.q, y) <= obj + 1e-9
                    assert np.linalg.norm(sol.x) <= np.linalg.norm(y) + 1e-7
        else:
            n_boundary += 1
    ok = worst_gap <= 1e-8 and n_interior > 0 and n_boundary > 0
    assert _report(
        "3 trs-oracle",
        ok,
        f"1000 instances, worst objective gap {worst_gap:.2e}, "
        f"{n_interior} interior / {n_boundary} boundary",
        t0,
    )


def test_c04_scalar_closed_form():
    t0 = time.time()
    n_boundary = n_interior = 0
    worst = 0.0
    for t in range(1000):
        m, f = random_instance(stable_seed(SEED, 4, t), kmax=1, lmax=4, dmax=5)
        state = wmmse_state(m, f)
        rng = np.random.default_rng(stable_seed(SEED, 41, t))
        i = int(rng.integers(0, m.L))
        fast = solve_subproblem_scalar(m, state.G, f, i)
        generic = solve_subproblem(sensor_subproblem(m, state, f, i))
        worst = max(worst, float(np.linalg.norm(fast - generic)))
        # branch accounting via the closed-form condition
        sig_s = float(np.real(m.Sigma_s[0, 0]))
        sig_i = float(np.real(m.Sigma_i[i][0, 0]))
        c = sig_s + sig_i
        q_rest = np.zeros(m.M, dtype=complex)
        for j in range(m.L):
            if j != i:
                q_rest += m.H[j] @ f.F[j][:, 0]
        a = 1.0 - np.vdot(state.G.reshape(-1), q_rest)
        hg2 = float(np.linalg.norm(m.H[i].conj().T @ state.G.reshape(-1)) ** 2)
        if hg2 > 0 and sig_s**4 * abs(a) ** 2 > c**2 * (m.P[i] / c) * hg2:
            n_boundary += 1
        else:
            n_interior += 1
    ok = worst <= 1e-9 and n_boundary >= 100 and n_interior >= 100
    assert _report(
        "4 scalar-closed-form",
        ok,
        f"1000 subproblems, worst |Δf| {worst:.2e}, branches: {n_boundary} boundary / {n_interior} interior",
        t0,
    )


def test_c05_gradient_correctness():
    t0 = time.time()
    worst = 0.0
    for t in range(50):
        m, f = random_instance(stable_seed(SEED, 5, t), kmax=5, lmax=5, dmax=5)
        rng = np.random.default_rng(stable_seed(SEED, 51, t))
        i = int(rng.integers(0, m.L))
        g = mi_gradient(m, f, i)
        g_fd = mi_gradient_fd(m, f, i, step=1e-5)
        worst = max(worst, float(np.linalg.norm(g - g_fd) / (1 + np.linalg.norm(g))))
    ok = worst <= 1e-6
    assert _report("5 gradient-fd", ok, f"50 instances, worst relative error {worst:.2e}", t0)


def test_c06_surrogate_tightness():
    t0 = time.time()
    worst = 0.0
    for t in range(200):
        m, f = random_instance(stable_seed(SEED, 6, t), kmax=5, lmax=5, dmax=5)
        mi = mutual_information(m, f)
        gap = abs(surrogate_objective(m, f, wmmse_state(m, f)) - mi) / (1 + abs(mi))
        worst = max(worst, gap)
    ok = worst <= 1e-9
    assert _report("6 surrogate-tightness", ok, f"200 instances, worst relative gap {worst:.2e}", t0)


def test_c07_identity_suite():
    t0 = time.time()
    bad = 0
    for t in range(200):
        m, f = random_instance(stable_seed(SEED, 7, t), kmax=5, lmax=5, dmax=5)
        if not verify_identities(m, f, tol=1e-8):
            bad += 1
    ok = bad == 0
    assert _report("7 response-identities", ok, f"200 instances, {bad} failures at 1e-8", t0)


def test_c08_cross_algorithm_agreement():
    t0 = time.time()
    cfg = heterogeneous_network(snr_channel_db=(8.0,), seed=SEED)
    opts = BcaOptions(max_outer=100, mi_tol=1e-10, compute_kkt=False)
    gaps, ordering_ok = [], True
    for r in range(30):
        model = build_model(cfg, stable_seed(cfg.seed, r))
        f0 = random_feasible_initial(model, stable_seed(stable_seed(cfg.seed, r), 0))
        _, _, tb = run_batch_bca(model, f0, opts)
        _, _, tc = run_cyclic_bca(model, f0, opts)
        gaps.append(abs(tb.mi_nats[-1] - tc.mi_nats[-1]))
        baseline = random_baseline_mi(model, 50, stable_seed(cfg.seed, r, 7))
        ordering_ok &= tb.mi_nats[-1] > baseline and tc.mi_nats[-1] > baseline
    gaps = np.array(gaps)
    ok = bool(np.all(gaps <= 1e-3)) and ordering_ok
    detail = (
        f"30 realizations at 8 dB: max |MI_batch - MI_cyclic| {gaps.max():.2e} "
        f"({int((gaps > 1e-3).sum())}/30 above 1e-3 at <=100 loops), "
        f"baseline ordering {'strict' if ordering_ok else 'VIOLATED'}"
    )
    if not ok:
        # context for the worst realization: the two algorithms share the
        # limit; the 100-loop budget is what truncates agreement
        r = int(np.argmax(gaps))
        model = build_model(cfg, stable_seed(cfg.seed, r))
        f0 = random_feasible_initial(model, stable_seed(stable_seed(cfg.seed, r), 0))
        deep = BcaOptions(max_outer=4000, mi_tol=1e-11, compute_kkt=False)
        _, _, tb = run_batch_bca(model, f0, deep)
        _, _, tc = run_cyclic_bca(model, f0, deep)
        detail += (
            f"; worst realization converged gap {abs(tb.mi_nats[-1] - tc.mi_nats[-1]):.2e}"
            f" ({len(tb.mi_nats) - 1}/{len(tc.mi_nats) - 1} loops)"
        )
    assert _report("8 cross-algorithm", ok, detail, t0)


def test_c09_initial_point_robustness():
    # no loop budget is stated for this criterion: the runs go to convergence
    t0 = time.time()
    cfg = heterogeneous_network(snr_channel_db=(8.0,), seed=SEED)
    model = build_model(cfg, stable_seed(cfg.seed, 0))
    rseed = stable_seed(cfg.seed, 0)
    opts = BcaOptions(max_outer=2000, mi_tol=1e-10, compute_kkt=False)
    finals = {"batch": [], "cyclic": []}
    for init in range(10):
        f0 = random_feasible_initial(model, stable_seed(rseed, init))
        _, _, tb = run_batch_bca(model, f0, opts)
        _, _, tc = run_cyclic_bca(model, f0, opts)
        finals["batch"].append(tb.mi_nats[-1])
        finals["cyclic"].append(tc.mi_nats[-1])
    spreads = {k: max(v) - min(v) for k, v in finals.items()}
    ok = all(s <= 1e-2 for s in spreads.values())
    assert _report(
        "9 initial-robustness",
        ok,
        f"10 shared initials: spread batch {spreads['batch']:.2e}, cyclic {spreads['cyclic']:.2e}",
        t0,
    )


def test_c10_qcqp_objective_equivalence():
    t0 = time.time()
    worst = 0.0
    for t in range(20):
        m, f0 = random_instance(stable_seed(SEED, 10, t), kmax=5, lmax=5, dmax=5)
        state = wmmse_state(m, f0)
        data = assemble_qcqp(m, state)
        for j in range(5):
            f = random_feasible_initial(m, stable_seed(SEED, 101, t, j))
            direct = float(np.real(np.trace(state.W @ mse_matrix(m, f, state.G))))
            via = qcqp_objective(data, stack_beamformers(f))
            worst = max(worst, abs(direct - via) / (1 + abs(direct)))
    ok = worst <= 1e-9
    assert _report(
        "10 qcqp-equivalence", ok, f"100 evaluation points, worst relative gap {worst:.2e}", t0
    )


def test_c11_scaling_trend():
    from mibeam import benchmark_per_loop
    from mibeam.experiments import doubling_ratios

    t0 = time.time()
    cells = benchmark_per_loop(
        [(3, 4, 4, 3), (3, 4, 8, 3)], loops=4, seed=SEED, algorithms=("cyclic",)
    )
    ratios = doubling_ratios(cells)
    assert len(ratios) == 1
    _, _, _, ratio, slope = ratios[0]
    table_i = benchmark_per_loop([(4, 20, 4, 4)], loops=4, seed=SEED)
    t_batch = next(c.median_loop_s for c in table_i if c.algorithm == "batch")
    t_cyclic = next(c.median_loop_s for c in table_i if c.algorithm == "cyclic")
    ok = ratio <= 2**3.5 and t_cyclic < t_batch
    assert _report(
        "11 scaling-trend",
        ok,
        f"N doubling ratio {ratio:.2f} (slope {slope:.2f} <= 3.5); "
        f"K=4 L=20 N=4: cyclic {t_cyclic * 1e3:.2f} ms/loop vs batch {t_batch * 1e3:.2f} ms/loop",
        t0,
    )


def test_c12_determinism(tmp_path):
    t0 = time.time()
    cfg_text = (
        "K = 3\nL = 3\nM = 4\nN = 3, 4, 5\n"
        "snr_sensor_db = 8, 9, 10\nP = 2, 2, 3\nsnr_channel_db = 8\n"
        f"realizations = 2\nseed = {SEED}\nalgorithm = both\nmax_outer = 10\nmi_tol = 1e-8\n"
    )
    cfg_file = tmp_path / "scenario.cfg"
    cfg_file.write_text(cfg_text)
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    assert cli_main(["run", "--config", str(cfg_file), "--out", str(out1)]) == 0
    assert cli_main(["run", "--config", str(cfg_file), "--out", str(out2)]) == 0
    same_json = (out1 / "traces.json").read_bytes() == (out2 / "traces.json").read_bytes()
    same_csv = (out1 / "traces.csv").read_bytes() == (out2 / "traces.csv").read_bytes()
    ok = same_json and same_csv
    assert _report(
        "12 determinism", ok, f"byte-identical JSON: {same_json}, CSV: {same_csv}", t0
    )
