"""Command line: ``run``, ``oracle`` and ``selftest``.

Exit codes: 0 success, 1 configuration error, 2 runtime error, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, ExperimentConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_SELFTEST = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="npgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate trials and write CSVs")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (default: config output_dir)")
    run.add_argument("--svg", action="store_true", help="also write SVG charts")
    run.add_argument("--trials", type=int)
    run.add_argument("--horizon", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--oracle-only", action="store_true",
                     help="print the perfect-information table and skip simulation")

    oracle = sub.add_parser("oracle", help="print the perfect-information equilibrium")
    oracle.add_argument("--config", required=True)

    selftest = sub.add_parser("selftest", help="run the acceptance criteria")
    selftest.add_argument("--full", action="store_true",
                          help="include the long simulation criteria (several minutes)")
    return parser


def _print_oracle(config: ExperimentConfig) -> None:
    from .experiment import oracle_for

    o = oracle_for(config)
    print("quantity value")
    for name, value in [("a_star", o.a_star), ("p_star", o.response.p_star),
                        ("b_star", o.response.b_star), ("leader_value", o.leader_value),
                        ("follower_value", o.follower_value), ("epsilon_B", o.epsilon_B)]:
        print(f"{name} {float(value)!r}")


def _overrides(args) -> dict:
    names = {"trials": "trials", "horizon": "horizon", "seed": "base_seed", "workers": "workers"}
    return {field: getattr(args, flag) for flag, field in names.items()
            if getattr(args, flag) is not None}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "selftest":
        from .acceptance import run_all

        results = run_all(full=args.full)
        return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST
    try:
        config = load_config(args.config)
        if args.command == "run":
            config = config.replace(**_overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "oracle" or args.oracle_only:
            _print_oracle(config)
            return EXIT_OK
        from .experiment import run_experiment

        summary = run_experiment(config, args.out, svg=args.svg)
        print("\n".join(summary.lines()))
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
