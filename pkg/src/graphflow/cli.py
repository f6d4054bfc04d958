"""Command-line interface.

Subcommands: check-curvature, run, verify, classify, identities.
Exit codes: 0 pass, 1 verification failure, 2 usage/config error, 3 solver abort.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import jsonschema

from .app import (CLASSIFICATION_SCHEMA, VERIFICATION_SCHEMA, load_config,
                  run_identities, run_scenario, _manifolds_for)
from .errors import ConfigurationError, GraphflowError, NotAreaDecreasingError, SolverAbort
from .geometry import curvature_conditions_report

EXIT_PASS = 0
EXIT_VERIFICATION_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_SOLVER_ABORT = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphflow")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-curvature", help="evaluate the curvature conditions of a scenario")
    p.add_argument("config")

    p = sub.add_parser("run", help="run a scenario and write all artifacts")
    p.add_argument("config")
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="validate and summarize a recorded run")
    p.add_argument("run_dir")

    p = sub.add_parser("classify", help="print the limit classification of a recorded run")
    p.add_argument("run_dir")

    p = sub.add_parser("identities", help="randomized algebraic identity suite")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_check_curvature(args) -> int:
    cfg = load_config(args.config)
    m_manifold, n_manifold = _manifolds_for(cfg)
    report = curvature_conditions_report(m_manifold, n_manifold, seed=cfg.seed)
    print(json.dumps(report.as_dict(), indent=2, sort_keys=True))
    return EXIT_PASS if (report.cond_a and report.cond_b and report.cond_c) \
        else EXIT_VERIFICATION_FAILURE


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    manifest = run_scenario(cfg, out_dir=args.out)
    with open(os.path.join(manifest.out_dir, "verification.json")) as fh:
        verification = json.load(fh)
    print(f"run complete: {manifest.out_dir} (status {manifest.status})")
    ok = bool(verification.get("overall_pass", False))
    print(f"verification: {'PASS' if ok else 'FAIL'}")
    return EXIT_PASS if ok else EXIT_VERIFICATION_FAILURE


def _read_json(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigurationError(f"missing file: {path}")
    with open(path) as fh:
        return json.load(fh)


def _cmd_verify(args) -> int:
    verification = _read_json(os.path.join(args.run_dir, "verification.json"))
    jsonschema.validate(verification, VERIFICATION_SCHEMA)
    checks = []
    for key in ("decay_bounds", "residual_p", "inequalities", "volume_budget",
                "barrier", "pointwise", "stationarity"):
        section = verification.get(key)
        if section is None:
            continue
        verdict = section.get("pass")
        if verdict is None:
            continue
        checks.append((key, bool(verdict)))
    for key, verdict in checks:
        print(f"{key}: {'PASS' if verdict else 'FAIL'}")
    ok = bool(verification.get("overall_pass", False))
    print(f"overall: {'PASS' if ok else 'FAIL'}")
    return EXIT_PASS if ok else EXIT_VERIFICATION_FAILURE


def _cmd_classify(args) -> int:
    classification = _read_json(os.path.join(args.run_dir, "classification.json"))
    jsonschema.validate(classification, CLASSIFICATION_SCHEMA)
    print(json.dumps(classification, indent=2, sort_keys=True))
    return EXIT_PASS


def _cmd_identities(args) -> int:
    report = run_identities(samples=args.samples, seed=args.seed)
    for name, err in sorted(report["max_errors"].items()):
        print(f"{name}: {err:.3e}")
    print(f"max error: {report['max_error']:.3e} over {report['samples']} samples "
          f"in {report['elapsed_seconds']:.2f}s")
    print(f"identities: {'PASS' if report['pass'] else 'FAIL'}")
    return EXIT_PASS if report["pass"] else EXIT_VERIFICATION_FAILURE


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "check-curvature": _cmd_check_curvature,
        "run": _cmd_run,
        "verify": _cmd_verify,
        "classify": _cmd_classify,
        "identities": _cmd_identities,
    }
    try:
        return handlers[args.command](args)
    except (ConfigurationError, NotAreaDecreasingError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except SolverAbort as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return EXIT_SOLVER_ABORT
    except GraphflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION_FAILURE


if __name__ == "__main__":
    sys.exit(main())
