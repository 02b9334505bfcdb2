"""Compiled-vs-pure-Python kernel agreement and dispatch behavior."""

import numpy as np
import pytest

from mibeam import _apg, stable_seed
from mibeam._apg import apg_ball_qp, apg_ball_qp_py, project_blocks
from mibeam.verify import complex_gaussian


def random_problem(seed, n_blocks=3, block=4):
    rng = np.random.default_rng(seed)
    n = n_blocks * block
    b_mat = complex_gaussian(rng, (n, n))
    quad = b_mat @ b_mat.conj().T
    quad = 0.5 * (quad + quad.conj().T)
    lin = complex_gaussian(rng, (n,))
    starts = np.arange(0, n + 1, block, dtype=np.intp)
    radii = rng.uniform(0.3, 2.0, n_blocks)
    x0 = complex_gaussian(rng, (n,))
    maxeig = float(np.linalg.eigvalsh(quad)[-1])
    return quad, lin, starts, radii, x0, maxeig


def phi(quad, lin, x):
    return float(np.real(x.conj() @ (quad @ x)) - 2 * np.real(lin.conj() @ x))


class TestPythonKernel:
    def test_descent_from_warm_start(self):
        quad, lin, starts, radii, x0, maxeig = random_problem(1)
        x0p = project_blocks(x0.copy(), starts, radii)
        x, iters, gm, conv = apg_ball_qp_py(quad, lin, starts, radii, x0, maxeig, 1e-9, 50_000)
        assert conv
        assert phi(quad, lin, x) <= phi(quad, lin, x0p) + 1e-12
        for i in range(len(radii)):
            assert np.linalg.norm(x[starts[i] : starts[i + 1]]) <= radii[i] * (1 + 1e-12)

    def test_gradient_mapping_reported_at_returned_point(self):
        quad, lin, starts, radii, x0, maxeig = random_problem(2)
        x, _, gm, _ = apg_ball_qp_py(quad, lin, starts, radii, x0, maxeig, 1e-9, 50_000)
        step = project_blocks(x - (quad @ x - lin) / maxeig, starts, radii)
        assert abs(gm - 2 * maxeig * np.linalg.norm(x - step)) <= 1e-12 * (1 + gm)


@pytest.mark.skipif(not _apg.HAVE_COMPILED, reason="compiled kernel not built")
class TestCompiledKernel:
    @pytest.mark.parametrize("seed", range(8))
    def test_agrees_with_python(self, seed):
        quad, lin, starts, radii, x0, maxeig = random_problem(stable_seed(50, seed))
        out_py = apg_ball_qp(quad, lin, starts, radii, x0, maxeig, 1e-10, 100_000, backend="python")
        out_cy = apg_ball_qp(quad, lin, starts, radii, x0, maxeig, 1e-10, 100_000, backend="compiled")
        x_py, _, gm_py, conv_py = out_py
        x_cy, _, gm_cy, conv_cy = out_cy
        assert conv_py and conv_cy
        assert abs(phi(quad, lin, x_py) - phi(quad, lin, x_cy)) <= 1e-8 * (
            1 + abs(phi(quad, lin, x_py))
        )
        assert np.linalg.norm(x_py - x_cy) <= 1e-6 * (1 + np.linalg.norm(x_py))

    def test_degenerate_rank_deficient_quadratic(self):
        rng = np.random.default_rng(9)
        n = 12
        u = np.linalg.qr(complex_gaussian(rng, (n, n)))[0]
        lam = np.zeros(n)
        lam[:3] = [3.0, 2.0, 1.0]
        quad = (u * lam) @ u.conj().T
        quad = 0.5 * (quad + quad.conj().T)
        lin = complex_gaussian(rng, (n,))
        starts = np.array([0, 4, 8, 12], dtype=np.intp)
        radii = np.array([1.0, 0.5, 2.0])
        x0 = np.zeros(n, dtype=complex)
        for backend in ("python", "compiled"):
            x, iters, gm, conv = apg_ball_qp(quad, lin, starts, radii, x0, 3.0, 1e-9 * 10, 50_000, backend=backend)
            assert conv, backend
            assert iters < 20_000


def test_dispatch_reports_backend():
    assert _apg.BACKEND in ("compiled", "python")
    if _apg.HAVE_COMPILED:
        assert _apg.BACKEND == "compiled" or _apg._FORCE_PY


@pytest.mark.skipif(not _apg.HAVE_COMPILED, reason="compiled kernel not built")
def test_backends_agree_through_the_batch_driver():
    from mibeam import BcaOptions, run_batch_bca
    from mibeam.verify import random_instance

    m, f0 = random_instance(313)
    results = {}
    for backend in ("python", "compiled"):
        opts = BcaOptions(max_outer=40, mi_tol=1e-9, compute_kkt=False, backend=backend)
        _, _, trace = run_batch_bca(m, f0, opts)
        results[backend] = trace.mi_nats[-1]
    assert abs(results["python"] - results["compiled"]) <= 1e-8 * (1 + abs(results["python"]))


class TestProjectionProperties:
    @pytest.mark.parametrize("seed", range(6))
    def test_idempotent_and_feasible(self, seed):
        rng = np.random.default_rng(seed)
        starts = np.array([0, 3, 7, 12], dtype=np.intp)
        radii = rng.uniform(0.2, 2.0, 3)
        x = 3.0 * complex_gaussian(rng, (12,))
        once = project_blocks(x.copy(), starts, radii)
        for i in range(3):
            assert np.linalg.norm(once[starts[i] : starts[i + 1]]) <= radii[i] * (1 + 1e-12)
        twice = project_blocks(once.copy(), starts, radii)
        assert np.allclose(once, twice, rtol=0, atol=1e-15)

    def test_interior_points_unchanged(self):
        starts = np.array([0, 2, 4], dtype=np.intp)
        radii = np.array([10.0, 10.0])
        x = np.array([0.1, 0.2j, -0.3, 0.4 + 0.1j])
        assert np.array_equal(project_blocks(x.copy(), starts, radii), x)
