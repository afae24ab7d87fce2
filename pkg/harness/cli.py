"""bandit-mips command line.

    bandit-mips run --algo lints --K 1000 --d 8 --T 1000 --oracle brute --out results/
    bandit-mips sweep --algo lints --Ks 1024,4096,16384 --d 16 --eta 0.2 --oracle lsh
    bandit-mips acceptance ts-constants --param samples=100000
    bandit-mips serve --port 8000

Exit codes: 0 success, 1 configuration error, 2 failed acceptance protocol,
3 invariant violation.
"""
from __future__ import annotations
from typing import Any, Optional, Sequence
import argparse
import json
import logging
import sys

from pydantic import ValidationError

from core.guardrails.invariants import InvariantViolation
from core.observability import configure_logging, setup_otel

from .acceptance import PROTOCOLS
from .config import load_run_config
from .reports import write_results
from .runner import compare_bound, run_experiment, run_repetitions

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PROTOCOL_FAILED = 2
EXIT_INVARIANT = 3


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML file with RunConfig fields")
    p.add_argument("--algo", dest="algorithm", choices=["oful", "oful-exact", "lints", "lints-exact"])
    p.add_argument("--K", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--eta-scheme", dest="eta_scheme", choices=["sqrt", "oful-exp", "lints-exp"])
    p.add_argument("--delta", type=float)
    p.add_argument("--oracle", choices=["lsh", "brute"])
    p.add_argument("--instance", choices=["sphere-uniform", "clustered", "planted-gap"])
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--out")
    p.add_argument("--noise-std", dest="noise_std", type=float)
    p.add_argument("--max-oracles", dest="max_oracles", type=int)
    p.add_argument("--max-tables", dest="max_tables", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-timing", dest="record_timing", action="store_const", const=False)
    p.add_argument("--no-checks", dest="check_invariants", action="store_const", const=False)


_RUN_KEYS = (
    "algorithm", "K", "d", "T", "eta", "eta_scheme", "delta", "oracle", "instance", "seed",
    "reps", "out", "noise_std", "max_oracles", "max_tables", "workers", "record_timing", "check_invariants",
)


def _overrides(args: argparse.Namespace, skip: Sequence[str] = ()) -> dict[str, Any]:
    return {k: getattr(args, k, None) for k in _RUN_KEYS if k not in skip}


def _parse_param(text: str) -> tuple[str, Any]:
    key, _, raw = text.partition("=")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    if isinstance(value, list):
        value = tuple(value)
    return key.replace("-", "_"), value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bandit-mips", description="Linear bandits with adaptive approximate MIPS")
    parser.add_argument("--log-level", default="INFO")
    parser.add_argument("--otel", action="store_true", help="Enable OpenTelemetry tracing")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run one configuration over its repetitions")
    _add_run_flags(run)

    sweep = sub.add_parser("sweep", help="Mean probes per select over several K")
    _add_run_flags(sweep)
    sweep.add_argument("--Ks", required=True, help="Comma-separated arm counts")

    acc = sub.add_parser("acceptance", help="Run a named acceptance protocol")
    acc.add_argument("protocol", choices=sorted(PROTOCOLS))
    acc.add_argument("--param", action="append", default=[], help="key=value (JSON value)")

    serve = sub.add_parser("serve", help="Serve the HTTP API")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config, _overrides(args))
    results = run_repetitions(cfg)
    for result in results:
        report = compare_bound(result.trace, cfg)
        print(json.dumps({**result.summary.model_dump(mode="json"), "within_bound": report.within}))
    if cfg.out is not None:
        for path in write_results(results, cfg.out):
            logger.info("wrote %s", path)
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    Ks = [int(k) for k in args.Ks.split(",") if k]
    rows = []
    for K in Ks:
        cfg = load_run_config(args.config, {**_overrides(args, skip=("K",)), "K": K})
        summary = run_experiment(cfg).summary
        rows.append({"K": K, "mean_probes": summary.mean_probes, "probes_over_k": summary.probes_over_k})
        print(json.dumps(rows[-1]))
    return EXIT_OK


def _cmd_acceptance(args: argparse.Namespace) -> int:
    params = dict(_parse_param(p) for p in args.param)
    report = PROTOCOLS[args.protocol](**params)
    print(report.model_dump_json(indent=2))
    return EXIT_OK if report.passed else EXIT_PROTOCOL_FAILED


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("api.main:app", host=args.host, port=args.port)
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "acceptance": _cmd_acceptance,
    "serve": _cmd_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    if args.otel:
        setup_otel(service_name="bandit-mips")
    try:
        return COMMANDS[args.command](args)
    except InvariantViolation as exc:
        logger.error("invariant violation: %s", exc)
        return EXIT_INVARIANT
    except (ValidationError, ValueError, TypeError, OSError) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
