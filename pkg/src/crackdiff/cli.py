"""Command line: ``crackdiff run | plot | presets``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ArtifactError, ConfigError, SolverError

log = logging.getLogger("crackdiff")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not argparse's default exit 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crackdiff", description="Heat diffusion through a periodically cracked slab.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one experiment and write its artifacts")
    r.add_argument("--preset", help="start from a named preset (see 'presets')")
    r.add_argument("--config", help="JSON file of configuration keys")
    r.add_argument("--mode")
    r.add_argument("--alpha", type=float)
    r.add_argument("--beta", type=float)
    r.add_argument("--epsilon", type=float)
    r.add_argument("--epsilons", type=_csv_floats, help="comma-separated list for sweeps")
    r.add_argument("--nx", type=int)
    r.add_argument("--ny", type=int)
    r.add_argument("--n1d", type=int, help="1-D cells per unit length")
    r.add_argument("--dt", type=float)
    r.add_argument("--t-end", type=float)
    r.add_argument("--tol", type=float)
    r.add_argument("--max-iter", type=int)
    r.add_argument("--delta", type=float)
    r.add_argument("--accelerate", action="store_true", default=None)
    r.add_argument("--snapshot-times", type=_csv_floats)
    r.add_argument("--workers", type=int)
    r.add_argument("--plot", action="store_true", help="also write SVG plots")
    r.add_argument("--out")

    pl = sub.add_parser("plot", help="write SVG plots from an existing run directory")
    pl.add_argument("run_dir")

    pr = sub.add_parser("presets", help="list presets or print one")
    pr.add_argument("name", nargs="?")
    return p


_OVERRIDE_KEYS = (
    "mode", "alpha", "beta", "epsilon", "epsilons", "nx", "ny", "n1d", "dt", "t_end", "tol",
    "max_iter", "delta", "accelerate", "snapshot_times", "workers", "out",
)


def _cmd_run(args) -> int:
    from .experiment import resolve_config, run_experiment
    from .plots import emit_plots

    overrides = {k: getattr(args, k) for k in _OVERRIDE_KEYS}
    cfg = resolve_config(args.preset, args.config, overrides)
    out = run_experiment(cfg)
    if args.plot:
        emit_plots(out)
    print(out)
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .plots import emit_plots

    for path in emit_plots(args.run_dir):
        print(path)
    return EXIT_OK


def _cmd_presets(args) -> int:
    from .experiment import PRESETS

    if args.name is None:
        for name in sorted(PRESETS):
            print(name)
        return EXIT_OK
    if args.name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {args.name!r}")
    print(json.dumps(PRESETS[args.name], indent=2, sort_keys=True))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "plot": _cmd_plot, "presets": _cmd_presets}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except SolverError as exc:
        log.error("solver error: %s", exc)
        return EXIT_SOLVER
    except (ArtifactError, OSError) as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
