"""Command-line interface: ``finstate <entropy|apply|factorize|check|validate>``.

Exit status: 0 success / all properties pass, 1 a property failed,
2 usage, config or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..algebra import embed_state_full, state_as_prob_vector
from ..channels import apply, validate_cptp, verify_left_inverse
from ..entropy import segal, shannon, von_neumann
from ..errors import FinStateError
from ..functor import EntropyFunctor, factorization_deviations, factorize_state
from .campaign import CampaignConfig, run_campaign
from .jsonio import (
    channel_from_json,
    channel_to_json,
    dumps,
    read_json,
    state_from_json,
    state_to_json,
    system_to_json,
    write_json,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _sig(x: float) -> float:
    return float(f"{x:.15g}")


def cmd_entropy(args) -> int:
    omega = state_from_json(read_json(args.state))
    out = {"units": "nats", "segal": _sig(segal(omega))}
    out["von_neumann"] = _sig(von_neumann(embed_state_full(omega)))
    if omega.system.is_classical:
        out["shannon"] = _sig(shannon(state_as_prob_vector(omega)))
    print(dumps(out, indent=2))
    return EXIT_OK


def cmd_apply(args) -> int:
    f = channel_from_json(read_json(args.channel))
    omega = state_from_json(read_json(args.state))
    result = state_to_json(apply(f, omega))
    if args.out:
        write_json(args.out, result)
    else:
        print(dumps(result))
    return EXIT_OK


def cmd_factorize(args) -> int:
    omega = state_from_json(read_json(args.state))
    fz = factorize_state(omega)
    devs = factorization_deviations(EntropyFunctor(1.0), omega)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "Z.json", system_to_json(fz.z))
    write_json(out / "gamma.json", state_to_json(fz.gamma))
    write_json(out / "f.json", channel_to_json(fz.embed))
    write_json(out / "g.json", channel_to_json(fz.measure))
    summary = {
        "left_inverse_ok": verify_left_inverse(fz.measure, fz.embed, 1e-9),
        "deviations": devs._asdict(),
        "pass": devs.worst() <= 1e-9,
        "units": "nats",
    }
    write_json(out / "summary.json", summary)
    print(dumps(summary, indent=2))
    return EXIT_OK if summary["pass"] else EXIT_FAIL


def cmd_validate(args) -> int:
    f = channel_from_json(read_json(args.channel), check=False)
    report = validate_cptp(f, args.tol)
    print(dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_check(args) -> int:
    data = read_json(args.config) if args.config else {}
    if args.seed is not None:
        data["seed"] = args.seed
    if args.trials is not None:
        data["trials"] = args.trials
    if args.out is not None:
        data["output"] = args.out
    config = CampaignConfig.from_dict(data)
    report = run_campaign(config)
    for r in report.reports:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark} {r.property:<22} trials={r.trials:<5} max_dev={r.max_deviation:.3e} tol={r.tolerance:.1e}")
    print(f"overall: {'PASS' if report.passed else 'FAIL'} in {report.duration_s:.1f}s -> {config.output}")
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="finstate", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy", help="Shannon / von Neumann / Segal entropy of a state")
    s.add_argument("--state", required=True)
    s.set_defaults(func=cmd_entropy)

    s = sub.add_parser("apply", help="push a state through a channel")
    s.add_argument("--channel", required=True)
    s.add_argument("--state", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_apply)

    s = sub.add_parser("factorize", help="spectral factorization through a classical system")
    s.add_argument("--state", required=True)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_factorize)

    s = sub.add_parser("check", help="run the verification campaign")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("validate", help="CPTP report for a channel")
    s.add_argument("--channel", required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FinStateError, OSError, json.JSONDecodeError) as exc:
        print(f"finstate: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
