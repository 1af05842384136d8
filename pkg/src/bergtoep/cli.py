"""Command line: bergtoep {assemble, experiment, validate, norm, svd}.

Exit codes: 0 success, 2 parse or validation error, 3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from typing import Sequence

from . import serialize
from .experiments import EXPERIMENTS, RunConfig, fmt, run_experiment
from .operators import ConvergenceError, TruncatedOperator, op_norm, singular_values
from .symbols import SymbolError, assemble

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("bergtoep")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    values: dict = {}
    if args.config:
        doc = serialize.load_file(args.config)
        if not isinstance(doc, dict):
            raise serialize.SchemaError("$", "config must be a JSON object")
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(doc) - known
        if unknown:
            raise serialize.SchemaError("$", f"unknown config keys {sorted(unknown)}")
        values.update(doc)
    for key in ("dim", "p", "seed", "out", "format", "tol"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise serialize.SchemaError("config", str(exc)) from None


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_operator(path: str, dim: int) -> TruncatedOperator:
    """A matrix file, or a symbol file assembled at `dim`."""
    doc = serialize.load_file(path)
    if isinstance(doc, dict) and "type" in doc:
        return assemble(serialize.parse_symbol(doc), dim)
    return serialize.operator_from_json(doc)


def cmd_assemble(args, cfg: RunConfig) -> int:
    sym = serialize.parse_symbol(serialize.load_file(args.symbol))
    T = assemble(sym, cfg.dim)
    _write(json.dumps(serialize.operator_to_json(T)) + "\n", cfg.out)
    print(f"op_norm (truncation lower bound) = {fmt(op_norm(T, cfg.tol))}", file=sys.stderr if not cfg.out else sys.stdout)
    return EXIT_OK


def cmd_norm(args, cfg: RunConfig) -> int:
    T = _load_operator(args.file, cfg.dim)
    _write(f"{fmt(op_norm(T, cfg.tol))}\n", cfg.out)
    return EXIT_OK


def cmd_svd(args, cfg: RunConfig) -> int:
    T = _load_operator(args.file, cfg.dim)
    count = args.count or T.dim
    sv = singular_values(T, min(count, T.dim))
    if cfg.format == "json":
        _write(json.dumps({"singular_values": sv.tolist()}) + "\n", cfg.out)
    else:
        _write("n,singular_value\n" + "".join(f"{i},{fmt(s)}\n" for i, s in enumerate(sv)), cfg.out)
    return EXIT_OK


def cmd_validate(args, cfg: RunConfig) -> int:
    doc = serialize.load_file(args.symbol)
    if isinstance(doc, dict) and "entries" in doc and "type" not in doc:
        c = serialize.parse_collection(doc)
        print(f"OK measure collection ({len(c.entries)} entries{', origin-supported' if c.origin_supported else ''})")
    else:
        print(f"OK {serialize.symbol_class(serialize.parse_symbol(doc))}")
    return EXIT_OK


def _params(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise serialize.SchemaError("--param", f"expected key=value, got {item!r}")
        out[key] = value
    return out


def cmd_experiment(args, cfg: RunConfig) -> int:
    if args.name not in EXPERIMENTS:
        print(f"error: unknown experiment {args.name!r}; available: {', '.join(EXPERIMENTS)}", file=sys.stderr)
        return EXIT_INVALID
    try:
        table = run_experiment(args.name, cfg, _params(args.param))
    except ValueError as exc:
        if isinstance(exc, (serialize.SchemaError, SymbolError)):
            raise
        raise serialize.SchemaError("--param", str(exc)) from None
    _write(table.to_json() if cfg.format == "json" else table.to_csv(), cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, help="truncation dimension N (default 64)")
    common.add_argument("--p", type=float, help="k-class parameter p (default 1/9)")
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float, help="power-iteration tolerance")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--config", help="JSON config file")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bergtoep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", parents=[common], help="assemble a symbol into a truncated operator")
    p.add_argument("symbol")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    p.add_argument("name", help=f"one of: {', '.join(EXPERIMENTS)}")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="experiment parameter (repeatable)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("validate", parents=[common], help="check a symbol or measure-collection file")
    p.add_argument("symbol")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("norm", parents=[common], help="operator norm of a matrix or symbol file")
    p.add_argument("file")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("svd", parents=[common], help="singular values of a matrix or symbol file")
    p.add_argument("file")
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_svd)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except (serialize.SchemaError, SymbolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
