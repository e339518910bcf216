"""Command-line entry point.

Data goes to stdout or --out; diagnostics go to stderr.  Exit codes:
0 success, 1 usage error, 2 budget/resource error, 3 verification failure.
Flag precedence is flags > config file > defaults; the config file is a
flat "key value" / "key = value" text format mirroring the flag names.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import exactla, experiment, torsion
from .errors import BudgetError, ParameterError
from .matrix import SignPattern, from_sms, incidence_matrix, to_sms
from .model import from_text, sample_gnm, sample_gnp, to_text, two_core

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_VERIFY = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_DEFAULTS = {
    "pattern": "alternating",
    "seed": 0,
    "trial_id": 0,
    "trials": 100,
    "parallelism": 1,
    "record_every": 1,
    "suite": "all",
}


def _add_common(sub, *names):
    if "n" in names:
        sub.add_argument("--n", type=int, default=None)
    if "k" in names:
        sub.add_argument("--k", type=int, default=None)
    if "p" in names:
        sub.add_argument("--p", type=str, default=None, help="rational: 1/10 or 0.1")
    if "m" in names:
        sub.add_argument("--m", type=str, default=None)
    if "c" in names:
        sub.add_argument("--c", type=str, default=None, help="p = c log(n)/n^(k-1)")
    if "pattern" in names:
        sub.add_argument("--pattern", choices=["alternating", "ones"], default=None)
    if "seed" in names:
        sub.add_argument("--seed", type=int, default=None)
    if "trial_id" in names:
        sub.add_argument("--trial-id", type=int, default=None)
    if "trials" in names:
        sub.add_argument("--trials", type=int, default=None)
    if "parallelism" in names:
        sub.add_argument("--parallelism", type=int, default=None)
    if "record_every" in names:
        sub.add_argument("--record-every", type=int, default=None)
    sub.add_argument("--max-entries", type=int, default=None)
    sub.add_argument("--out", type=str, default=None)
    sub.add_argument("--format", choices=["json", "jsonl", "csv", "text"], default=None)
    sub.add_argument("--config", type=str, default=None)


def _build_parser():
    parser = _Parser(prog="torsionlab", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("sample", help="sample a random hypergraph")
    _add_common(s, "n", "k", "p", "m", "seed", "trial_id")

    s = subs.add_parser("incidence", help="signed incidence matrix of a hypergraph file")
    s.add_argument("input", help="hypergraph file ('-' for stdin)")
    _add_common(s, "pattern")

    s = subs.add_parser("snf", help="Smith normal form of an SMS matrix file")
    s.add_argument("input", help="matrix file ('-' for stdin)")
    _add_common(s)

    s = subs.add_parser("coker", help="cokernel of an SMS matrix file")
    s.add_argument("input", help="matrix file ('-' for stdin)")
    _add_common(s)

    s = subs.add_parser("core", help="2-core of a hypergraph file")
    s.add_argument("input", help="hypergraph file ('-' for stdin)")
    _add_common(s)

    s = subs.add_parser("process", help="stochastic cokernel process (JSONL)")
    _add_common(s, "n", "k", "m", "pattern", "seed", "trial_id", "record_every")

    s = subs.add_parser("curve", help="torsion probability curve (CSV)")
    s.add_argument("--m-grid", type=str, default=None, help="comma list or start:stop:step")
    _add_common(s, "n", "k", "pattern", "seed", "trials", "parallelism")

    s = subs.add_parser("sweep", help="Monte Carlo sweep of one cell (CSV)")
    _add_common(
        s, "n", "k", "p", "m", "c", "pattern", "seed", "trials",
        "parallelism", "record_every",
    )

    s = subs.add_parser("verify", help="run the structural verification suites")
    s.add_argument(
        "--suite",
        choices=["claim6", "lemma7", "lemma8", "lemma10", "all"],
        default=None,
    )
    _add_common(s, "n", "k", "seed", "trials")
    return parser


def _load_config(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                key, _, val = line.partition("=")
            else:
                parts = line.split(None, 1)
                if len(parts) != 2:
                    raise UsageError(f"bad config line {raw.rstrip()!r}")
                key, val = parts
            values[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return values


def _resolve(args):
    """flags > config file > defaults"""
    merged = dict(vars(args))
    if args.config:
        config = _load_config(args.config)
        for key, val in config.items():
            if key in merged and merged[key] is None:
                merged[key] = val
    for key, val in _DEFAULTS.items():
        if key in merged and merged[key] is None:
            merged[key] = val
    return argparse.Namespace(**merged)


def _read_input(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_output(args, data):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def _int_or_none(value, name):
    if value is None:
        return None
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--{name} expects an integer, got {value!r}") from exc


def _fraction_or_none(value, name):
    if value is None:
        return None
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"--{name} expects a rational, got {value!r}") from exc


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _parse_grid(text):
    if text is None:
        raise UsageError("--m-grid is required")
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise UsageError(f"bad grid {text!r}")
        start, stop = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
        if step < 1:
            raise UsageError("grid step must be >= 1")
        return list(range(start, stop + 1, step))
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}") from exc


def _snf_like_json(summary_rank, factors, n_rows):
    return json.dumps(
        {
            "rank": summary_rank,
            "invariant_factors": [str(d) for d in factors],
            "free_rank": n_rows - summary_rank,
            "torsion": [str(d) for d in factors if d > 1],
        }
    ) + "\n"


def _cmd_sample(args):
    _require(args, "n", "k")
    if (args.p is None) == (args.m is None):
        raise UsageError("sample needs exactly one of --p / --m")
    if args.p is not None:
        h = sample_gnp(
            args.n, args.k, _fraction_or_none(args.p, "p"), args.seed, args.trial_id
        )
    else:
        h = sample_gnm(
            args.n, args.k, _int_or_none(args.m, "m"), args.seed, args.trial_id
        )
    _write_output(args, to_text(h))
    return EXIT_OK


def _cmd_incidence(args):
    h = from_text(_read_input(args.input))
    mat = incidence_matrix(h, SignPattern.parse(args.pattern))
    _write_output(args, to_sms(mat))
    return EXIT_OK


def _cmd_snf(args):
    mat = from_sms(_read_input(args.input))
    snf = exactla.smith_normal_form(mat, args.max_entries)
    _write_output(args, _snf_like_json(snf.rank, snf.invariant_factors, mat.n_rows))
    return EXIT_OK


def _cmd_coker(args):
    mat = from_sms(_read_input(args.input))
    snf = exactla.smith_normal_form(mat, args.max_entries)
    _write_output(args, _snf_like_json(snf.rank, snf.invariant_factors, mat.n_rows))
    return EXIT_OK


def _cmd_core(args):
    h = from_text(_read_input(args.input))
    core, isolated = two_core(h)
    if args.format == "json":
        payload = {
            "n": core.n,
            "k": core.k,
            "m": core.m,
            "isolated_removals": isolated,
            "edges": [list(e) for e in core.edges],
        }
        _write_output(args, json.dumps(payload) + "\n")
    else:
        print(f"isolated_removals: {isolated}", file=sys.stderr)
        _write_output(args, to_text(core))
    return EXIT_OK


def _cmd_process(args):
    _require(args, "n", "k", "m")
    trace = experiment.run_process(
        args.n,
        args.k,
        _int_or_none(args.m, "m"),
        SignPattern.parse(args.pattern),
        args.seed,
        args.trial_id,
        args.record_every,
        args.max_entries,
    )
    _write_output(args, experiment.trace_to_jsonl(trace))
    return EXIT_OK


def _cmd_curve(args):
    _require(args, "n", "k")
    points = experiment.torsion_probability_curve(
        args.n,
        args.k,
        _parse_grid(args.m_grid),
        args.trials,
        args.seed,
        SignPattern.parse(args.pattern),
        args.parallelism,
        args.max_entries,
    )
    _write_output(args, experiment.curve_to_csv(points))
    return EXIT_OK


def _cmd_sweep(args):
    _require(args, "n", "k")
    chosen = [x for x in ("p", "m", "c") if getattr(args, x) is not None]
    if len(chosen) != 1:
        raise UsageError("sweep needs exactly one of --p / --m / --c")
    kind = chosen[0]
    if kind == "p":
        value = _fraction_or_none(args.p, "p")
    elif kind == "m":
        value = _int_or_none(args.m, "m")
    else:
        value = _fraction_or_none(args.c, "c")
    cell = experiment.SweepCell(
        args.n, args.k, kind, value, SignPattern.parse(args.pattern)
    )
    record_every = args.record_every if args.record_every is not None else 0
    records = experiment.sweep(
        [cell], args.trials, args.seed, args.parallelism, record_every, args.max_entries
    )
    for record in records:
        if record.error_count:
            print(
                f"warning: {record.error_count} trials hit budget errors",
                file=sys.stderr,
            )
    _write_output(args, experiment.sweep_records_to_csv(records))
    return EXIT_OK


def _cmd_verify(args):
    names = (
        ("claim6", "lemma7", "lemma8", "lemma10")
        if args.suite == "all"
        else (args.suite,)
    )
    kwargs = {"seed": args.seed}
    if args.trials is not None:
        kwargs["trials"] = args.trials
    if args.n is not None:
        kwargs["n"] = args.n
    if args.k is not None:
        kwargs["k"] = args.k
    report = torsion.run_verification(names, **kwargs)
    _write_output(args, json.dumps(report, indent=2) + "\n")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


_COMMANDS = {
    "sample": _cmd_sample,
    "incidence": _cmd_incidence,
    "snf": _cmd_snf,
    "coker": _cmd_coker,
    "core": _cmd_core,
    "process": _cmd_process,
    "curve": _cmd_curve,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = _resolve(parser.parse_args(argv))
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run():
    sys.exit(main())
