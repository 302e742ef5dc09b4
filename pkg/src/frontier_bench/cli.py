"""Command-line entry point ``frontier-bench``.

Exit codes: 0 success, 1 analysis failure, 2 config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import OUT_ENV, load_config
from .errors import ConfigError, FrontierBenchError

EXIT_OK, EXIT_ANALYSIS, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors count as configuration errors, not argparse's default 2-with-noise
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="frontier-bench",
                     description="Two-stage DEA and regression benchmarking of decision-making units.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute the analyses of a config file")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path, default=None,
                     help=f"output directory (overrides ${OUT_ENV} and the config's output_dir)")
    run.add_argument("--seed", type=_seed, default=0, help="seed for truncated-regression multi-start")
    run.add_argument("--quiet", action="store_true", help="do not print the text report")

    val = sub.add_parser("validate", help="check a config and its input files without running")
    val.add_argument("--config", required=True, type=Path)

    demo = sub.add_parser("demo", help="write the bundled synthetic dataset and demo config")
    demo.add_argument("--dir", type=Path, default=Path("frontier_bench_demo"))
    return parser


def _err(msg: str) -> None:
    print(f"frontier-bench: {msg}", file=sys.stderr)


def _load(path):
    try:
        return load_config(path), None
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return None, EXIT_CONFIG
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return None, EXIT_IO


def cmd_run(args) -> int:
    from .pipeline import execute, write_outputs

    cfg, code = _load(args.config)
    if cfg is None:
        return code
    missing = cfg.missing_files()
    if missing:
        _err("missing input file(s): " + ", ".join(map(str, missing)))
        return EXIT_IO
    try:
        outcome = execute(cfg, seed=args.seed)
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_IO
    except FrontierBenchError as exc:
        _err(f"cannot load data: {exc}")
        return EXIT_ANALYSIS
    out_dir = cfg.resolve_output(args.out)
    try:
        write_outputs(outcome, out_dir)
    except OSError as exc:
        _err(f"cannot write outputs: {exc}")
        return EXIT_IO
    if not args.quiet:
        sys.stdout.write(outcome.files["report.txt"])
    for f in outcome.report["failures"]:
        _err(f"{f['analysis']} failed: {f['error']}")
    print(f"report written to {out_dir}", file=sys.stderr)
    return EXIT_ANALYSIS if outcome.failed else EXIT_OK


def cmd_validate(args) -> int:
    from .pipeline import validate

    cfg, code = _load(args.config)
    if cfg is None:
        return code
    missing = cfg.missing_files()
    if missing:
        _err("missing input file(s): " + ", ".join(map(str, missing)))
        return EXIT_IO
    try:
        problems = validate(cfg)
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_IO
    for p in problems:
        _err(p)
    if problems:
        return EXIT_CONFIG
    print(f"{cfg.path}: ok (digest {cfg.digest[:12]})")
    return EXIT_OK


def cmd_demo(args) -> int:
    from .demo import write_demo

    try:
        paths = write_demo(args.dir)
    except OSError as exc:
        _err(f"cannot write demo files: {exc}")
        return EXIT_IO
    for p in paths:
        print(p)
    print(f"run it with: frontier-bench run --config {args.dir / 'demo_config.json'}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0; everything else from the parser is a usage error
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    handler = {"run": cmd_run, "validate": cmd_validate, "demo": cmd_demo}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
