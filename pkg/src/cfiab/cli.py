"""Command-line entry point: ``cfiab run | sweep | selftest``.

Exit status is 0 on success, 1 for configuration errors and 2 when every
trial failed numerically (or a selftest check failed).
"""

import argparse
import dataclasses
import logging
import sys
import typing

from . import harness
from .errors import ConfigurationError
from .harness import ScenarioConfig

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def _parse_bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _field_type(f):
    hints = typing.get_type_hints(ScenarioConfig)
    t = hints[f.name]
    if t is bool:
        return _parse_bool
    if typing.get_origin(t) is typing.Union:  # Optional[str]
        return str
    return t


def _add_config_args(p):
    p.add_argument("--config", help="JSON file with ScenarioConfig fields")
    g = p.add_argument_group("config overrides")
    for f in dataclasses.fields(ScenarioConfig):
        flags = [f"--{f.name}"]
        if "_" in f.name:
            flags.append(f"--{f.name.replace('_', '-')}")
        g.add_argument(*flags, dest=f.name, type=_field_type(f), default=None,
                       metavar=f.name.upper())
    p.add_argument("-o", "--output", help="CSV destination (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true",
                   help="also dump one CSV line per trial")
    p.add_argument("--trials-output",
                   help="destination of the per-trial dump (default: stderr)")


def build_parser():
    p = _Parser(prog="cfiab", description="Cell-free IAB mmWave link simulator")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario and print its summary row")
    _add_config_args(run)
    sw = sub.add_parser("sweep", help="sweep one parameter and print one row per value")
    _add_config_args(sw)
    sw.add_argument("--axis", required=True, choices=sorted(harness.AXES))
    sw.add_argument("--values", required=True,
                    help="comma-separated axis values, e.g. 0,10,20,30")
    st = sub.add_parser("selftest", help="run the built-in invariant checks")
    st.add_argument("--seed", type=int, default=0)
    for sp in sub.choices.values():
        sp.error = p.error
    return p


def load_config(args) -> ScenarioConfig:
    raw = {}
    if args.config:
        raw = dataclasses.asdict(ScenarioConfig.from_file(args.config))
    for f in dataclasses.fields(ScenarioConfig):
        v = getattr(args, f.name)
        if v is not None:
            raw[f.name] = v
    return ScenarioConfig.from_dict(raw)


def _parse_values(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(int(tok))
        except ValueError:
            try:
                out.append(float(tok))
            except ValueError:
                raise ConfigurationError(f"bad sweep value {tok!r}") from None
    if not out:
        raise ConfigurationError("--values is empty")
    return out


def _open_out(path, default):
    return open(path, "w", newline="") if path else default


def _run_or_sweep(args):
    cfg = load_config(args)
    dumped = []

    def collect(value, results):
        dumped.append((value, results))

    if args.command == "run":
        results = harness.run_trials(cfg)
        collect("", results)
        rows = [harness.aggregate(results)]
    else:
        rows = harness.sweep(cfg, args.axis, _parse_values(args.values), on_trials=collect)

    out = _open_out(args.output, sys.stdout)
    try:
        harness.write_csv(rows, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.verbose:
        tout = _open_out(args.trials_output, sys.stderr)
        try:
            for i, (value, results) in enumerate(dumped):
                harness.write_trials_csv(results, tout, axis_value=value, header=i == 0)
        finally:
            if tout is not sys.stderr:
                tout.close()

    total = sum(len(r) for _, r in dumped)
    failed = sum(1 for _, r in dumped for t in r if not t.ok)
    if total and failed == total:
        print("error: every trial failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _selftest(args):
    from .selftest import run_selftest

    results = run_selftest(args.seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


def main(argv=None):
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.command == "selftest":
            return _selftest(args)
        return _run_or_sweep(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
