"""Command-line entry point: single runs, parameter sweeps and the swap/purification validation table."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

from . import analytic_oracle as oracle
from .config import ABLATIONS, RunSettings, load_config
from .pauli_frame import ChannelParams
from .strategies import STRATEGIES, ConfigError, RunResult, StrategyConfig, canonical_strategy, run_strategy

GATE_ERROR_GRID = (0.0, 0.0005, 0.001, 0.0015, 0.002)
MEAS_ERROR_GRID = (0.0, 0.0025, 0.005, 0.0075, 0.01)
HOPS_GRID = (2, 4, 8)

CSV_COLUMNS = ("strategy", "hops", "lambda_gate", "p_meas", "fidelity", "fidelity_stderr", "exp_xx", "exp_yy",
               "exp_zz", "throughput_pairs_per_s", "simulated_s", "wall_s", "seed")
VALIDATION_COLUMNS = ("p_depo", "analytic_e2e", "simulated_e2e", "stderr")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` with ``stop`` included (to within rounding)."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
    n = int(round((stop - start) / step))
    if start + n * step > stop + 1e-9:
        n -= 1
    return [round(start + k * step, 12) for k in range(n + 1)]


def parse_strategies(text: str) -> list[str]:
    if text.strip().lower() == "all":
        return list(STRATEGIES)
    return [canonical_strategy(s) for s in text.split(",") if s.strip()]


def _disable_list(values: list[str] | None) -> tuple[str, ...]:
    out = []
    for v in values or ():
        out.extend(x.strip() for x in v.split(",") if x.strip())
    return tuple(out)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON or key=value config file")
    p.add_argument("--disable", action="append", metavar="SOURCE",
                   help=f"switch off a noise source ({'|'.join(ABLATIONS)}); repeatable or comma-separated")
    p.add_argument("--seed", type=int, help="base seed (falls back to $QREPSIM_SEED, then 0)")
    p.add_argument("--n-meas", type=int, help="end-to-end measurements per trajectory")
    p.add_argument("--trajectories", type=int, help="independent trajectories per point")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qrepsim", description="Discrete-event simulator for linear quantum-repeater chains.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="simulate one strategy at one noise point")
    _common(p)
    p.add_argument("--strategy", required=True)
    p.add_argument("--hops", type=int, default=2)
    p.add_argument("--gate-error", type=float, help="lambda_gate")
    p.add_argument("--meas-error", type=float, help="measurement flip probability")
    p.add_argument("--json", action="store_true", help="print the result as JSON")
    p.add_argument("--out", help="also write the result (.json or .csv)")

    p = sub.add_parser("sweep", help="strategies x hops x gate error x measurement error grid")
    _common(p)
    p.add_argument("--strategies", default="all")
    p.add_argument("--hops", type=_csv_ints, default=list(HOPS_GRID))
    p.add_argument("--gate-errors", type=_csv_floats, default=list(GATE_ERROR_GRID))
    p.add_argument("--meas-errors", type=_csv_floats, default=list(MEAS_ERROR_GRID))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-wall-clock", action="store_true",
                   help="leave wall_s blank so the CSV is byte-identical across reruns")
    p.add_argument("--out", required=True, help="output file (.csv or .json)")

    p = sub.add_parser("validate-fig2", help="one-swap fidelity vs depolarizing strength, simulated and analytic")
    p.add_argument("--pdepo-grid", type=parse_grid, default=parse_grid("0:0.2:0.025"))
    p.add_argument("--samples", type=int, default=90_000, help="total measurements per grid point")
    p.add_argument("--trajectories", type=int, default=10)
    p.add_argument("--purified", action="store_true", help="purify each link once before the swap")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    return parser


def _settings(args, **overrides) -> RunSettings:
    values = {"seed": args.seed, "n_meas": getattr(args, "n_meas", None),
              "trajectories": getattr(args, "trajectories", None), **overrides}
    return load_config(getattr(args, "config", None), values, _disable_list(getattr(args, "disable", None)))


def make_config(settings: RunSettings, strategy: str, hops: int) -> StrategyConfig:
    return StrategyConfig(strategy=strategy, hops=hops, n_meas=settings.n_meas, trajectories=settings.trajectories,
                          channel=settings.channel, topology=settings.topology, seed=settings.seed)


def result_to_json(result: RunResult) -> str:
    return json.dumps(result.row(), indent=2, allow_nan=True)


def record_from_json(text: str) -> dict[str, Any]:
    data = json.loads(text)
    missing = [c for c in CSV_COLUMNS if c not in data]
    if missing:
        raise ConfigError(f"result JSON is missing {', '.join(missing)}")
    return {c: data[c] for c in CSV_COLUMNS}


def format_csv(rows: Sequence[dict[str, Any]], columns: Sequence[str] = CSV_COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: ("" if row[c] is None else repr(row[c]) if isinstance(row[c], float) else row[c])
                         for c in columns})
    return buf.getvalue()


def _write(path: str, rows: list[dict[str, Any]], columns: Sequence[str] = CSV_COLUMNS) -> None:
    out = Path(path)
    if out.suffix.lower() == ".json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        text = format_csv(rows, columns)
    out.write_text(text)


def _run_point(cfg: StrategyConfig) -> dict[str, Any]:
    return run_strategy(cfg).row()


def _map(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def cmd_run(args) -> int:
    overrides = {"lambda_gate": args.gate_error, "p_meas": args.meas_error}
    cfg = make_config(_settings(args, **overrides), canonical_strategy(args.strategy), args.hops)
    result = run_strategy(cfg)
    if args.out:
        _write(args.out, [result.row()])
    if args.json:
        print(result_to_json(result))
    else:
        e = result.estimate
        print(f"{cfg.strategy} hops={cfg.hops}: F = {e.fidelity:.4f} +/- {e.stderr:.4f}  "
              f"throughput = {result.throughput:.1f} pairs/s  ({result.simulated_s:.4g} s simulated)")
    return 0


def sweep_configs(settings: RunSettings, strategies, hops, gate_errors, meas_errors) -> list[StrategyConfig]:
    configs = []
    for strategy in strategies:
        for h in hops:
            for lam in gate_errors:
                for pm in meas_errors:
                    channel = replace(settings.channel, lambda_gate=lam, p_meas=pm)
                    configs.append(make_config(replace(settings, channel=channel), strategy, h))
    return configs


def cmd_sweep(args) -> int:
    settings = _settings(args)
    strategies = parse_strategies(args.strategies)
    configs = sweep_configs(settings, strategies, args.hops, args.gate_errors, args.meas_errors)
    rows = _map(_run_point, configs, args.jobs)
    if args.no_wall_clock:
        for row in rows:
            row["wall_s"] = None
    _write(args.out, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def validation_config(p_depo: float, samples: int, trajectories: int, seed: int, purified: bool) -> StrategyConfig:
    n = max(3, samples // trajectories)
    channel = replace(ChannelParams.noiseless(), p_depo=p_depo)
    return StrategyConfig(strategy="OneG" if purified else "ZeroG", hops=2, n_meas=n, trajectories=trajectories,
                          channel=channel, seed=seed)


def validation_row(cfg: StrategyConfig) -> dict[str, Any]:
    p = cfg.channel.p_depo
    analytic = oracle.f_ssdp_e2e(p) if cfg.strategy == "OneG" else oracle.f_e2e(p)
    est = run_strategy(cfg).estimate
    return {"p_depo": p, "analytic_e2e": analytic, "simulated_e2e": est.fidelity, "stderr": est.stderr}


def cmd_validate_swap(args) -> int:
    seed = load_config(None, {"seed": args.seed}).seed
    if args.samples < 3 * args.trajectories or args.trajectories < 1:
        raise ConfigError("--samples must allow at least 3 measurements per trajectory")
    configs = [validation_config(p, args.samples, args.trajectories, seed, args.purified) for p in args.pdepo_grid]
    rows = _map(validation_row, configs, args.jobs)
    _write(args.out, rows, VALIDATION_COLUMNS)
    for row in rows:
        print(f"p={row['p_depo']:.3f}  analytic={row['analytic_e2e']:.5f}  "
              f"simulated={row['simulated_e2e']:.5f} +/- {row['stderr']:.5f}")
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "validate-fig2": cmd_validate_swap}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"qrepsim: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"qrepsim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
