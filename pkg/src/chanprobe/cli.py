"""Command-line front end.

Subcommands: run (one selective replay vs the exhaustive baseline), sweep
(cross-product of K, window, policy), gen-trace (write a trace CSV from a
traffic config), serve (HTTP service).  Exit codes: 0 success, 2 config
error, 3 trace parse error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cca import LoadMatrix, MeasurementTiming, TrafficModel, generate_matrix
from .errors import ConfigError, TraceParseError
from .gpr import KernelParams
from .harness import (
    make_config,
    results_payload,
    round_records_csv,
    run_exhaustive,
    run_selective,
    summary_row,
    sweep,
)
from .selection import POLICY_ALIASES, canonical_policy
from .traceio import ingest_trace, write_trace

DEFAULT_CHANNELS = 13
DEFAULT_ROUNDS = 50
DEFAULT_SEED = 42

_POLICY_CHOICES = sorted(POLICY_ALIASES) + sorted(POLICY_ALIASES.values())


def parse_int_range(text: str) -> list[int]:
    """Accept "7", "2..10" (inclusive), or "2,5,7"."""
    text = text.strip()
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
            values = list(range(lo, hi + 1))
        elif "," in text:
            values = [int(part) for part in text.split(",")]
        else:
            values = [int(text)]
    except ValueError:
        raise ConfigError(f"cannot parse integer range {text!r}") from None
    if not values:
        raise ConfigError(f"empty range {text!r}")
    return values


def _parse_policies(text: str) -> list[str]:
    names = [canonical_policy(p.strip()) for p in text.split(",") if p.strip()]
    if not names:
        raise ConfigError("empty policy list")
    return names


def _add_common(parser: argparse.ArgumentParser, with_source: bool = True) -> None:
    parser.add_argument("--channels", type=int, default=None, help=f"number of channels (default {DEFAULT_CHANNELS})")
    parser.add_argument("--rounds", type=int, default=None, help=f"measurement rounds (default {DEFAULT_ROUNDS})")
    parser.add_argument("--duration-ms", type=float, default=100.0, help="per-channel measurement duration T")
    parser.add_argument("--minislot-us", type=float, default=100.0, help="sensing mini-slot length")
    parser.add_argument("--seed", type=int, default=None, help=f"RNG seed (default {DEFAULT_SEED}, or the traffic config's)")
    if with_source:
        src = parser.add_mutually_exclusive_group()
        src.add_argument("--trace", metavar="CSV", help="replay this trace instead of simulating traffic")
        src.add_argument("--traffic", metavar="JSON", help="traffic regime config to simulate")
    parser.add_argument("--lengthscale", type=float, default=1.0, help="kernel lengthscale in rounds")
    parser.add_argument("--include-bootstrap", action="store_true", help="include bootstrap rounds in load/error averages")
    parser.add_argument("--raw-input", action="store_true", help="feed raw measurements to the estimator instead of window means")
    parser.add_argument("--no-stay-on-tie", action="store_true", help="on tied loads, switch to the lowest channel instead of staying")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chanprobe", description="selective channel-load scanning simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one selective replay plus the exhaustive baseline")
    _add_common(p_run)
    p_run.add_argument("--k", type=int, default=7, help="channels measured per round")
    p_run.add_argument("--window", type=int, default=2, help="history window w")
    p_run.add_argument("--policy", default="weight", choices=_POLICY_CHOICES, help="selection policy")
    p_run.add_argument("--out", metavar="JSON", help="write results JSON here (default stdout)")
    p_run.add_argument("--per-round", metavar="CSV", help="write per-round decisions here")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="cross-product of K, window, policy")
    _add_common(p_sweep)
    p_sweep.add_argument("--k", default="2..10", help='K values: "7", "2..10", or "2,5,7"')
    p_sweep.add_argument("--window", default="2", help="window values, same syntax as --k")
    p_sweep.add_argument("--policy", default="weight", help="comma-separated policies, or 'all'")
    p_sweep.add_argument("--out", metavar="JSON", help="write results JSON here (default stdout)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_gen = sub.add_parser("gen-trace", help="simulate a traffic config and write the trace CSV")
    p_gen.add_argument("--traffic", metavar="JSON", required=True, help="traffic regime config")
    p_gen.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS)
    p_gen.add_argument("--duration-ms", type=float, default=100.0)
    p_gen.add_argument("--minislot-us", type=float, default=100.0)
    p_gen.add_argument("--out", metavar="CSV", help="trace destination (default stdout)")
    p_gen.set_defaults(func=cmd_gen_trace)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def _resolve_matrix(args: argparse.Namespace, timing: MeasurementTiming) -> tuple[LoadMatrix, str, int | None]:
    """Build the replay matrix from --trace, --traffic, or the default model.

    Returns (matrix, source label, effective seed).  Explicit --channels or
    --rounds must agree with what a trace file actually contains.
    """
    if args.trace is not None:
        try:
            matrix = ingest_trace(args.trace)
        except OSError as exc:
            raise TraceParseError(f"cannot read trace: {exc}") from exc
        if args.channels is not None and args.channels != matrix.channels:
            raise ConfigError(f"--channels {args.channels} but trace holds {matrix.channels}")
        if args.rounds is not None and args.rounds != matrix.rounds:
            raise ConfigError(f"--rounds {args.rounds} but trace holds {matrix.rounds}")
        return matrix, "trace", args.seed
    rounds = args.rounds if args.rounds is not None else DEFAULT_ROUNDS
    if args.traffic is not None:
        model = TrafficModel.from_json(args.traffic)
        if args.channels is not None and args.channels != model.channels:
            raise ConfigError(f"--channels {args.channels} but traffic config covers {model.channels}")
        if args.seed is not None and args.seed != model.seed:
            model = TrafficModel(seed=args.seed, channels=model.channels, segments=model.segments)
        return generate_matrix(model, rounds, timing), "traffic", model.seed
    channels = args.channels if args.channels is not None else DEFAULT_CHANNELS
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    model = TrafficModel.default(channels, seed)
    return generate_matrix(model, rounds, timing), "default", seed


def _emit_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _config_for(args: argparse.Namespace, matrix: LoadMatrix, timing: MeasurementTiming,
                source: str, seed: int | None, params: KernelParams) -> dict:
    return make_config(
        channels=matrix.channels,
        rounds=matrix.rounds,
        timing=timing,
        seed=seed,
        source=source,
        params=params,
        include_bootstrap=args.include_bootstrap,
        stay_on_tie=not args.no_stay_on_tie,
        smooth_input=not args.raw_input,
    )


def cmd_run(args: argparse.Namespace) -> int:
    timing = MeasurementTiming(args.duration_ms, args.minislot_us)
    params = KernelParams(lengthscale=args.lengthscale)
    matrix, source, seed = _resolve_matrix(args, timing)
    _, ex = run_exhaustive(matrix, timing)
    records, summary = run_selective(
        matrix,
        timing,
        k=args.k,
        window=args.window,
        policy=canonical_policy(args.policy),
        params=params,
        include_bootstrap=args.include_bootstrap,
        stay_on_tie=not args.no_stay_on_tie,
        smooth_input=not args.raw_input,
    )
    body = {
        "exhaustive": {"L1": ex.avg_selected_load, "c1_ms": ex.cost_ms},
        "runs": [summary_row(summary)],
    }
    payload = results_payload(_config_for(args, matrix, timing, source, seed, params), body)
    _emit_json(payload, args.out)
    if args.per_round:
        with open(args.per_round, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(round_records_csv(records))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    timing = MeasurementTiming(args.duration_ms, args.minislot_us)
    params = KernelParams(lengthscale=args.lengthscale)
    matrix, source, seed = _resolve_matrix(args, timing)
    if args.policy.strip() == "all":
        policies = sorted(POLICY_ALIASES.values())
    else:
        policies = _parse_policies(args.policy)
    body = sweep(
        matrix,
        timing,
        k_values=parse_int_range(args.k),
        w_values=parse_int_range(args.window),
        policies=policies,
        params=params,
        include_bootstrap=args.include_bootstrap,
        stay_on_tie=not args.no_stay_on_tie,
        smooth_input=not args.raw_input,
    )
    payload = results_payload(_config_for(args, matrix, timing, source, seed, params), body)
    _emit_json(payload, args.out)
    return 0


def cmd_gen_trace(args: argparse.Namespace) -> int:
    timing = MeasurementTiming(args.duration_ms, args.minislot_us)
    model = TrafficModel.from_json(args.traffic)
    matrix = generate_matrix(model, args.rounds, timing)
    if args.out is None:
        from .traceio import trace_csv_text

        sys.stdout.write(trace_csv_text(matrix))
    else:
        write_trace(matrix, args.out)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TraceParseError as exc:
        print(f"chanprobe: trace error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"chanprobe: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
