"""Experiment harness: scenario generation, Monte-Carlo driver, emission.

Scenarios use the correlated-antenna convention: source and sensing-noise
covariances share a K x K Toeplitz correlation Sigma0[j,k] = gamma^|j-k|,
with sigma_s^2 = 1 as the reference power; sensor and channel SNRs fix
sigma_i^2 and sigma_0^2. Channels are i.i.d. standard complex Gaussian and
everything is reproducible from the config seed through a stable hash chain.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .batch import run_batch_bca
from .cyclic import run_cyclic_bca
from .model import BeamformerSet, NetworkModel, mutual_information, transmit_power
from .trace import BcaOptions, IterationTrace

ALGORITHMS = ("batch", "cyclic")


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment's full description (all randomness flows from seed)."""

    K: int
    L: int
    M: int
    N: tuple[int, ...]
    snr_sensor_db: tuple[float, ...]
    P: tuple[float, ...]
    snr_channel_db: tuple[float, ...] = (8.0,)
    gamma: float = 0.5
    realizations: int = 30
    seed: int = 0
    algorithm: str = "both"
    max_outer: int = 100
    mi_tol: float = 1e-8
    initials_per_realization: int = 1
    record_timing: bool = False
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "N", tuple(int(n) for n in self.N))
        object.__setattr__(self, "P", tuple(float(p) for p in self.P))
        object.__setattr__(self, "snr_sensor_db", tuple(float(x) for x in self.snr_sensor_db))
        snr = self.snr_channel_db
        if isinstance(snr, (int, float)):
            snr = (float(snr),)
        object.__setattr__(self, "snr_channel_db", tuple(float(x) for x in snr))
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.realizations < 1 or self.initials_per_realization < 1:
            raise ValueError("realizations and initials_per_realization must be >= 1")
        if not (len(self.N) == len(self.snr_sensor_db) == len(self.P) == self.L):
            raise ValueError("N, snr_sensor_db, P must all have length L")
        if self.algorithm not in ("batch", "cyclic", "both"):
            raise ValueError("algorithm must be batch, cyclic or both")
        if not all(np.isfinite(self.snr_channel_db)) or not all(np.isfinite(self.snr_sensor_db)):
            raise ValueError("SNRs must be finite")

    def algorithms(self) -> tuple[str, ...]:
        return ALGORITHMS if self.algorithm == "both" else (self.algorithm,)

    def options(self) -> BcaOptions:
        return BcaOptions(max_outer=self.max_outer, mi_tol=self.mi_tol)


def heterogeneous_network(**overrides) -> ScenarioConfig:
    """Three differently provisioned sensors (mixed antennas, SNRs, budgets)."""
    base = dict(
        K=3,
        L=3,
        M=4,
        N=(3, 4, 5),
        snr_sensor_db=(8.0, 9.0, 10.0),
        P=(2.0, 2.0, 3.0),
        snr_channel_db=(8.0,),
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def homogeneous_network(**overrides) -> ScenarioConfig:
    """Five identically configured sensors."""
    base = dict(
        K=4,
        L=5,
        M=4,
        N=(5, 5, 5, 5, 5),
        snr_sensor_db=(9.0,) * 5,
        P=(2.0,) * 5,
        snr_channel_db=(9.0,),
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def stable_seed(*parts: int) -> int:
    """Platform-independent 63-bit seed derived from integer parts."""
    digest = hashlib.sha256(",".join(str(int(p)) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "little") & (2**63 - 1)


def toeplitz_correlation(k: int, gamma: float) -> np.ndarray:
    idx = np.arange(k)
    return (gamma ** np.abs(idx[:, None] - idx[None, :])).astype(complex)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def build_model(cfg: ScenarioConfig, realization_seed: int, snr_channel_db: float | None = None) -> NetworkModel:
    """Draw one channel realization of the configured scenario.

    snr_channel_db overrides the config's (single) channel SNR point; the
    channel matrices depend on realization_seed only, so an SNR sweep reuses
    the same channels at every point.
    """
    if snr_channel_db is None:
        if len(cfg.snr_channel_db) != 1:
            raise ValueError("sweep configs must select an explicit SNR point")
        snr_channel_db = cfg.snr_channel_db[0]
    sigma0 = toeplitz_correlation(cfg.K, cfg.gamma)
    sigma_s = sigma0.copy()  # sigma_s^2 = 1 reference power
    sigma_i = [10.0 ** (-snr / 10.0) * sigma0 for snr in cfg.snr_sensor_db]
    sigma0_sq = 10.0 ** (-float(snr_channel_db) / 10.0)
    rng = np.random.default_rng(realization_seed)
    channels = [complex_gaussian(rng, (cfg.M, n)) for n in cfg.N]
    return NetworkModel(
        K=cfg.K,
        L=cfg.L,
        M=cfg.M,
        N=cfg.N,
        H=tuple(channels),
        Sigma_s=sigma_s,
        Sigma_i=tuple(sigma_i),
        sigma0_sq=sigma0_sq,
        P=cfg.P,
    )


def random_feasible_initial(m: NetworkModel, seed: int) -> BeamformerSet:
    """Gaussian beamformers scaled so every power constraint holds with equality."""
    rng = np.random.default_rng(seed)
    mats = []
    f = BeamformerSet([complex_gaussian(rng, (n, m.K)) for n in m.N])
    for i in range(m.L):
        power = transmit_power(m, f, i)
        mats.append(f.F[i] * np.sqrt(m.P[i] / power))
    return BeamformerSet(mats)


def random_baseline_mi(m: NetworkModel, trials: int, seed: int) -> float:
    """Mean MI of unoptimized full-power random beamformers."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    total = 0.0
    for t in range(trials):
        total += mutual_information(m, random_feasible_initial(m, stable_seed(seed, t)))
    return total / trials


def _run_work_item(args) -> IterationTrace:
    cfg, snr_db, realization, initial, algorithm = args
    realization_seed = stable_seed(cfg.seed, realization)
    meta = {
        "seed": cfg.seed,
        "realization": realization,
        "initial": initial,
        "snr_db": snr_db,
        "failure": None,
    }
    try:
        model = build_model(cfg, realization_seed, snr_channel_db=snr_db)
        f0 = random_feasible_initial(model, stable_seed(realization_seed, initial))
        runner = run_batch_bca if algorithm == "batch" else run_cyclic_bca
        _, _, trace = runner(model, f0, cfg.options())
        trace.check()
    except Exception as exc:  # record, never drop
        trace = IterationTrace(algorithm=algorithm)
        meta["failure"] = f"{type(exc).__name__}: {exc}"
    trace.metadata = meta
    return trace


def run_experiment(cfg: ScenarioConfig) -> list[IterationTrace]:
    """Run the configured Monte-Carlo experiment; deterministic given cfg.

    For every (SNR point, realization, initial) the selected algorithm(s)
    start from the identical initial beamformers. Work items are independent
    and may run in a process pool (cfg.workers > 1); results are sorted
    deterministically before being returned.
    """
    items = [
        (cfg, snr_db, r, init, algo)
        for snr_db in cfg.snr_channel_db
        for r in range(cfg.realizations)
        for init in range(cfg.initials_per_realization)
        for algo in cfg.algorithms()
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            traces = list(pool.map(_run_work_item, items))
    else:
        traces = [_run_work_item(item) for item in items]
    traces.sort(
        key=lambda t: (
            t.metadata["snr_db"],
            t.metadata["realization"],
            t.metadata["initial"],
            t.algorithm,
        )
    )
    return traces


def write_traces_json(path, cfg: ScenarioConfig, traces: list[IterationTrace]):
    """One JSON document: config plus all traces (sorted, deterministic).

    Wall times are volatile, so they are zeroed unless cfg.record_timing is
    set; everything else is a pure function of the config.
    """
    doc = {
        "config": asdict(cfg),
        "traces": [t.as_dict(include_timing=cfg.record_timing) for t in traces],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_traces_csv(path, cfg: ScenarioConfig, traces: list[IterationTrace]):
    """Flat per-iteration CSV: realization, initial, algorithm, snr_db, iter, mi_nats, wall_s."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["realization", "initial", "algorithm", "snr_db", "iter", "mi_nats", "wall_s"])
        for t in traces:
            meta = t.metadata
            for it, (mi, wall) in enumerate(zip(t.mi_nats, t.wall_s)):
                writer.writerow(
                    [
                        meta["realization"],
                        meta["initial"],
                        t.algorithm,
                        repr(meta["snr_db"]),
                        it,
                        repr(mi),
                        repr(wall if cfg.record_timing else 0.0),
                    ]
                )


@dataclass
class BenchCell:
    """Median per-outer-loop wall time of one algorithm at one network size."""

    K: int
    L: int
    N: int
    M: int
    algorithm: str
    median_loop_s: float
    loops: int
    dim: int  # stacked precoder length K * L * N
    proxy: float  # K^3 * sum N_i^3 work proxy

    def as_dict(self) -> dict:
        return asdict(self)


def benchmark_per_loop(
    sizes,
    loops: int = 5,
    seed: int = 0,
    algorithms=ALGORITHMS,
    snr_channel_db: float = 8.0,
    snr_sensor_db: float = 9.0,
    power: float = 2.0,
) -> list[BenchCell]:
    """Measure per-outer-loop wall time on homogeneous networks.

    sizes is an iterable of (K, L, N, M). Every cell runs `loops` full outer
    loops (mi_tol = 0 so none stop early) on one fixed realization and takes
    the median per-loop time. KKT reports and surrogate checks are disabled
    so the numbers reflect the solver loops alone.
    """
    cells = []
    for k, l, n, m_ant in sizes:
        cfg = ScenarioConfig(
            K=k,
            L=l,
            M=m_ant,
            N=(n,) * l,
            snr_sensor_db=(snr_sensor_db,) * l,
            P=(power,) * l,
            snr_channel_db=(snr_channel_db,),
            seed=seed,
        )
        model = build_model(cfg, stable_seed(seed, 0))
        f0 = random_feasible_initial(model, stable_seed(seed, 1))
        opts = BcaOptions(
            max_outer=loops, mi_tol=0.0, compute_kkt=False, check_surrogate=False
        )
        for algo in algorithms:
            runner = run_batch_bca if algo == "batch" else run_cyclic_bca
            t0 = time.perf_counter()
            _, _, trace = runner(model, f0, opts)
            _ = time.perf_counter() - t0
            per_loop = trace.wall_s[1:]
            cells.append(
                BenchCell(
                    K=k,
                    L=l,
                    N=n,
                    M=m_ant,
                    algorithm=algo,
                    median_loop_s=float(np.median(per_loop)),
                    loops=len(per_loop),
                    dim=k * l * n,
                    proxy=float(k**3 * l * n**3),
                )
            )
    return cells


def doubling_ratios(cells: list[BenchCell], algorithm: str = "cyclic") -> list[tuple]:
    """Per-loop time ratios across cells that double N at fixed (K, L).

    Returns (K, L, N_small, ratio, slope_vs_N) tuples; the cubic-cost claim
    bounds slope_vs_N by 3.5, i.e. ratio <= 2**3.5 per doubling.
    """
    mine = [c for c in cells if c.algorithm == algorithm]
    out = []
    for small in mine:
        for big in mine:
            if big.K == small.K and big.L == small.L and big.N == 2 * small.N:
                ratio = big.median_loop_s / small.median_loop_s
                out.append((small.K, small.L, small.N, ratio, float(np.log2(ratio))))
    return out


def write_bench_json(path, cells: list[BenchCell]):
    with open(path, "w") as fh:
        json.dump([c.as_dict() for c in cells], fh, indent=1, sort_keys=True)
        fh.write("\n")
