"""``excursion-lab`` command line interface.

Exit codes: 0 success, 1 identity suite failure, 2 invalid arguments,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import experiments as ex

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {s!r}")


def _bin_width(s: str) -> float:
    # accept "1/128" as well as "0.0078125"
    try:
        if "/" in s:
            num, den = s.split("/")
            return float(num) / float(den)
        return float(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid bin width {s!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="excursion-lab",
                description="Monte Carlo checks of identities in law for the Brownian excursion.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in [("simulate", "write per-path functionals to simulate.csv"),
                       ("verify", "run the identity suite, write verify.json"),
                       ("convergence", "sweep steps x bin width, write convergence.csv")]:
        s = sub.add_parser(name, help=text)
        s.add_argument("--paths", type=int)
        s.add_argument("--steps", type=int, dest="n_steps")
        s.add_argument("--bin-width", type=_bin_width, dest="bin_width")
        s.add_argument("--seed", type=int)
        s.add_argument("--orders", type=_int_list)
        s.add_argument("--alpha", type=float)
        s.add_argument("--marginal-times", type=_float_list, dest="marginal_times")
        s.add_argument("--out", dest="output_dir")
        s.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
        s.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    return p


def resolve_config(args: argparse.Namespace, environ=os.environ) -> ex.ExperimentConfig:
    """Flags > config file > ``EXCURSION_SEED`` (seed only) > defaults."""
    values: dict = {}
    if "EXCURSION_SEED" in environ:
        values["seed"] = int(environ["EXCURSION_SEED"])
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        values.update(data)
    for key in ("paths", "n_steps", "bin_width", "seed", "orders", "alpha",
                "marginal_times", "output_dir"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    return ex.ExperimentConfig.from_mapping(values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = resolve_config(args)
        if args.workers < 1:
            raise ValueError("--workers must be >= 1")
    except OSError as e:
        print(f"excursion-lab: cannot read config: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as e:
        print(f"excursion-lab: invalid arguments: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "simulate":
            table = ex.run_simulate(config, args.workers)
            print(f"wrote {len(table)} rows to {os.path.join(config.output_dir, ex.SIMULATE_CSV)}")
            return EXIT_OK
        if args.command == "verify":
            report = ex.run_verify(config, args.workers)
            print("\n".join(report.summary_lines()))
            print(f"overall: {'PASS' if report.overall_pass else 'FAIL'}")
            return EXIT_OK if report.overall_pass else EXIT_FAIL
        rows = ex.run_convergence(config, args.workers)
        for r in rows:
            print(f"steps={r[0]:>6d} h=1/{round(1 / r[1]):<4d} var(X)={r[4]:.5f} "
                  f"|var-1/12|={r[5]:.5f} resid={r[6]:.2e}")
        return EXIT_OK
    except OSError as e:
        print(f"excursion-lab: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
