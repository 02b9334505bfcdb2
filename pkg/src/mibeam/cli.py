"""Command-line interface: run experiments, benchmark loops, verify invariants.

Config files are flat `key = value` text (comma-separated values for lists,
`#` comments); keys mirror ScenarioConfig fields. See the README for the
full reference and examples.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .experiments import (
    ScenarioConfig,
    benchmark_per_loop,
    build_model,
    doubling_ratios,
    random_feasible_initial,
    run_experiment,
    stable_seed,
    write_bench_json,
    write_traces_csv,
    write_traces_json,
)

_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _convert(name: str, raw: str, typ):
    if typ is bool:
        word = raw.strip().lower()
        if word not in _BOOL_WORDS:
            raise ValueError(f"config key {name}: expected a boolean, got {raw!r}")
        return _BOOL_WORDS[word]
    return typ(raw)


def parse_config(path) -> ScenarioConfig:
    """Parse a `key = value` scenario file into a ScenarioConfig."""
    list_fields = {"N": int, "snr_sensor_db": float, "P": float, "snr_channel_db": float}
    scalar_fields = {
        "K": int, "L": int, "M": int, "gamma": float, "realizations": int,
        "seed": int, "algorithm": str, "max_outer": int, "mi_tol": float,
        "initials_per_realization": int, "record_timing": bool, "workers": int,
    }
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key in list_fields:
                typ = list_fields[key]
                values[key] = tuple(_convert(key, item, typ) for item in raw.split(","))
            elif key in scalar_fields:
                values[key] = _convert(key, raw, scalar_fields[key])
            else:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    missing = {"K", "L", "M", "N", "snr_sensor_db", "P"} - values.keys()
    if missing:
        raise ValueError(f"{path}: missing required keys: {sorted(missing)}")
    return ScenarioConfig(**values)


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.algo is not None:
        overrides["algorithm"] = args.algo
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)

    os.makedirs(args.out, exist_ok=True)
    traces = run_experiment(cfg)
    json_path = os.path.join(args.out, "traces.json")
    csv_path = os.path.join(args.out, "traces.csv")
    write_traces_json(json_path, cfg, traces)
    write_traces_csv(csv_path, cfg, traces)
    failures = [t for t in traces if t.metadata.get("failure")]
    print(f"wrote {json_path} and {csv_path} ({len(traces)} traces, {len(failures)} failures)")

    if args.export_socp:
        from .qcqp import assemble_qcqp, export_socp, write_socp
        from .wmmse import wmmse_state

        model = build_model(cfg, stable_seed(cfg.seed, 0), snr_channel_db=cfg.snr_channel_db[0])
        f0 = random_feasible_initial(model, stable_seed(stable_seed(cfg.seed, 0), 0))
        data = assemble_qcqp(model, wmmse_state(model, f0))
        write_socp(export_socp(data), args.export_socp)
        print(f"wrote SOCP export to {args.export_socp}")
    return 1 if failures else 0


def _parse_int_list(raw: str) -> list[int]:
    return [int(x) for x in raw.split(",") if x.strip()]


def _cmd_bench(args) -> int:
    ks = _parse_int_list(args.K)
    ls = _parse_int_list(args.L)
    ns = _parse_int_list(args.N)
    ms = _parse_int_list(args.M) if args.M else ks
    if len(ms) != len(ks):
        raise SystemExit("--M must list one antenna count per --K entry")
    sizes = [(k, l, n, m) for k, m in zip(ks, ms) for l in ls for n in ns]
    cells = benchmark_per_loop(sizes, loops=args.loops, seed=args.seed)
    header = f"{'K':>3} {'L':>4} {'N':>4} {'M':>3} {'algo':>7} {'median s/loop':>14}"
    print(header)
    for c in cells:
        print(f"{c.K:>3} {c.L:>4} {c.N:>4} {c.M:>3} {c.algorithm:>7} {c.median_loop_s:>14.6f}")
    ratios = doubling_ratios(cells)
    for k, l, n, ratio, slope in ratios:
        print(f"doubling N={n}->{2*n} at K={k}, L={l}: time ratio {ratio:.2f} (slope {slope:.2f} per log2 N)")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "bench.json")
        write_bench_json(path, cells)
        print(f"wrote {path}")
    return 0


def _cmd_verify(args) -> int:
    from .verify import run_verification

    results = run_verification(seed=args.seed, scale=args.scale)
    failed = False
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed |= not ok
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mibeam",
        description="Beamformer design maximizing mutual information in multi-sensor MIMO networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured Monte-Carlo experiment")
    p_run.add_argument("--config", required=True, help="scenario config file (key = value)")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--algo", choices=["batch", "cyclic", "both"], default=None)
    p_run.add_argument("--out", default=".", help="output directory for traces.json / traces.csv")
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--export-socp", default=None, metavar="PATH",
                       help="also write the SOCP standard form of the first realization's QCQP")
    p_run.set_defaults(func=_cmd_run)

    p_bench = sub.add_parser("bench", help="measure per-outer-loop run time over a size grid")
    p_bench.add_argument("--K", required=True, help="comma-separated source dimensions")
    p_bench.add_argument("--L", required=True, help="comma-separated sensor counts")
    p_bench.add_argument("--N", required=True, help="comma-separated per-sensor antenna counts")
    p_bench.add_argument("--M", default=None, help="receiver antennas, parallel to --K (default: K)")
    p_bench.add_argument("--loops", type=int, default=5)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=_cmd_bench)

    p_verify = sub.add_parser("verify", help="run the invariant suite on random instances")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--scale", type=float, default=1.0,
                          help="multiplier on the per-check instance counts")
    p_verify.set_defaults(func=_cmd_verify)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
