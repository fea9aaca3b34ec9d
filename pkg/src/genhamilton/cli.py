"""Command-line entry point.

Exit codes: 0 success, 1 a scientific check failed (or a propagation broke
down), 2 configuration or I/O problem.  The last line printed is always
``RESULT <subcommand> <pass|fail>``.
"""

import argparse
import json
import sys

from . import __version__
from .errors import ConfigError, PropagationError
from .scenario import (
    apply_overrides,
    config_from_dict,
    read_document,
    run_scenario,
    schema_document,
    write_results,
)

SUBCOMMAND_KINDS = {
    "simulate-classical": ("classical", "classical-heat"),
    "simulate-quantum": ("quantum",),
    "thermo": ("thermo-spectrum",),
    "fit-t0": ("t0-roundtrip",),
    "validate": ("validate",),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="genhamilton",
        description="Dissipative mechanics, non-Hermitian wavepackets and temperature-corrected spectra.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, help_, kinds):
        p = sub.add_parser(name, help=help_)
        p.add_argument("-c", "--config", help="JSON scenario file")
        p.add_argument("-o", "--output", help="output directory (overrides the config)")
        if len(kinds) > 1:
            p.add_argument("--kind", choices=kinds, default=kinds[0],
                           help="scenario kind when no config file is given")
        p.add_argument("-v", "--verbose", action="count", default=0)
        p.add_argument("-q", "--quiet", action="store_true")
        p.add_argument("overrides", nargs="*", metavar="key=value",
                       help="parameter overrides, e.g. dt=0.001")
        return p

    add("simulate-classical", "integrate a damped or heat-exchange oscillator",
        SUBCOMMAND_KINDS["simulate-classical"])
    add("simulate-quantum", "propagate a Gaussian packet", SUBCOMMAND_KINDS["simulate-quantum"])
    add("thermo", "temperature-corrected hydrogen levels and lines", SUBCOMMAND_KINDS["thermo"])
    add("fit-t0", "extract the temperature constant (give m, n, nu_exp) and run the round trip",
        SUBCOMMAND_KINDS["fit-t0"])
    add("validate", "run the invariant suite", SUBCOMMAND_KINDS["validate"])
    sub.add_parser("schema", help="print the configuration schema")
    return parser


def _load(args):
    kinds = SUBCOMMAND_KINDS[args.subcommand]
    if args.config:
        data = read_document(args.config)
    else:
        data = {"kind": getattr(args, "kind", kinds[0])}
    data = apply_overrides(data, args.overrides)
    config = config_from_dict(data, source=args.config)
    if config.kind not in kinds:
        raise ConfigError(f"{args.subcommand} runs kinds {list(kinds)}, config has {config.kind!r}",
                          args.config)
    return config


def _print_table(table, out, limit=None):
    names = list(table.columns)
    out(" ".join(f"{n:>14s}" for n in names))
    rows = list(zip(*table.columns.values()))
    for row in rows[:limit] if limit else rows:
        out(" ".join(f"{v:>14.6g}" if not isinstance(v, str) else f"{v:>14s}" for v in row))


def _run(args, out):
    if args.subcommand == "schema":
        out(json.dumps(schema_document(), indent=2, sort_keys=True))
        return True

    config = _load(args)
    if args.subcommand != "validate" and not args.quiet:
        out(f"running {config.kind} scenario")
    progress = None if args.quiet else (lambda check: out(check.line()))
    tables = run_scenario(config, progress=progress)
    write_dir = args.output or (config.output if (args.subcommand != "validate" or args.config) else None)
    if write_dir:
        for table in tables.values():
            for path in write_results(table, write_dir):
                if args.verbose:
                    out(f"wrote {path}")
        if not args.quiet:
            out(f"results written to {write_dir}")

    if args.subcommand == "validate":
        report = tables["report"].report
        if not args.quiet:
            out(f"{sum(c.passed for c in report)}/{len(report)} checks passed "
                f"in {sum(c.seconds for c in report):.1f} s")
        return report.passed
    if not args.quiet:
        for name, table in tables.items():
            if name in ("summary", "extraction", "levels", "transitions", "roundtrip"):
                out(f"-- {name}")
                _print_table(table, out, limit=None if args.verbose else 20)
    if args.subcommand == "fit-t0" and "extraction" in tables:
        out(f"T0 = {tables['extraction'].columns['T0'][0]:.17g} K")
    return True


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)

    def out(line):
        print(line, flush=True)

    try:
        ok = _run(args, out)
        code = 0 if ok else 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        out(f"config error: {exc}")
        code = 2
    except PropagationError as exc:
        out(f"propagation failure: {exc}")
        code = 1
    except OSError as exc:
        out(f"I/O error: {exc}")
        code = 2
    out(f"RESULT {args.subcommand} {'pass' if code == 0 else 'fail'}")
    return code


if __name__ == "__main__":
    sys.exit(main())
