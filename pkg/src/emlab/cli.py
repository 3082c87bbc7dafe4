"""Command-line front end around the scenario pipeline."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .angular import angular_spectrum, build_potential
from .asymptotics import extract_coefficients, kelvin_transform
from .errors import EmlabError, ScenarioValidationError
from .frequency import frequency_trace
from .scenario import (
    VERIFY_CHECKS,
    parse_scenario,
    report_json,
    run_scenario,
    verify_suite,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emlab",
        description="Singular electromagnetic Schrodinger laboratory: spectra, "
                    "radial solves, frequency traces, asymptotic profiles.",
    )
    parser.add_argument("--config", metavar="PATH", required=True,
                        help="scenario JSON file")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help="directory for report.json / trace.csv")
    parser.add_argument("--tol-scale", metavar="FACTOR", type=float, default=1.0,
                        help="multiply every check tolerance by FACTOR")
    parser.add_argument("--seed", metavar="N", type=int, default=None,
                        help="override the scenario sweep seed")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", help="angular eigenvalues and blocks")
    sub.add_parser("solve", help="modal solve, convergence summary")
    sub.add_parser("frequency", help="frequency trace and fitted limit")
    sub.add_parser("asymptotics", help="leading profile and coefficients")
    sub.add_parser("kelvin", help="inversion conjugacy residuals")
    verify = sub.add_parser("verify", help="inequality / identity sweeps")
    verify.add_argument("--check", default=None,
                        help="comma-separated subset of: " + ", ".join(VERIFY_CHECKS))
    sub.add_parser("run", help="full pipeline with every enabled check")
    return parser


def _emit(doc: dict, out_dir, name: str) -> None:
    text = report_json(doc)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    sys.stdout.write(text)


def _status_code(doc: dict) -> int:
    return 0 if doc.get("status", "pass") == "pass" else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        scn = parse_scenario(args.config)
    except (OSError, ScenarioValidationError) as exc:
        parser.exit(2, f"emlab: {exc}\n")
    if args.seed is not None:
        from .scenario import scenario_from_dict

        scn = scenario_from_dict({**scn.raw, "seed": args.seed})

    try:
        if args.command == "run":
            report = run_scenario(scn, out_dir=args.out, tol_scale=args.tol_scale)
            sys.stdout.write(report_json(report))
            return _status_code(report)

        if args.command == "verify":
            names = None
            if args.check:
                names = [n.strip() for n in args.check.split(",") if n.strip()]
            try:
                report = verify_suite(scn, names=names, out_dir=args.out,
                                      tol_scale=args.tol_scale)
            except ScenarioValidationError as exc:
                parser.exit(2, f"emlab: {exc}\n")
            sys.stdout.write(report_json(report))
            return _status_code(report)

        pot = build_potential(scn.potential)
        spectrum = angular_spectrum(pot, count=scn.eigen_count,
                                    truncation=scn.truncation)
        if args.command == "spectrum":
            _emit(spectrum.to_json(), args.out, "spectrum.json")
            return 0

        from .scenario import _solve_field, _target_gamma

        field, h, info = _solve_field(scn, spectrum)
        if args.command == "solve":
            doc = {
                "converged": info["converged"],
                "iterations": info["iterations"],
                "residuals": [float(v) for v in info["residuals"]],
                "modes": sorted(field.modal) if field.modal else [],
            }
            _emit(doc, args.out, "solve.json")
            return 0 if info["converged"] else 1

        k0, gamma = _target_gamma(scn, spectrum)
        if args.command == "frequency":
            trace = frequency_trace(field, h, scn.radii)
            if args.out is not None:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                trace.to_csv(out / "trace.csv")
            _emit(trace.fit_summary(), args.out, "frequency.json")
            return 0

        if args.command == "asymptotics":
            profile = extract_coefficients(field, gamma, scn.boundary_radius, h)
            _emit(profile.to_json(), args.out, "profile.json")
            return 0

        if args.command == "kelvin":
            v = kelvin_transform(field)
            back = kelvin_transform(v)
            inv = float(np.abs(back.values - field.values).max()
                        / np.abs(field.values).max())
            tr_u = frequency_trace(field, h, scn.radii)
            mirror = np.sort(1.0 / tr_u.r)
            tr_v = frequency_trace(v, None, mirror)
            shift = scn.dimension - 2
            if scn.side == "exterior":
                conj = np.abs(np.sort(tr_v.N) - (np.sort(tr_u.N) - shift)).max()
            else:
                conj = np.abs(np.sort(tr_u.N) - (np.sort(tr_v.N) - shift)).max()
            _emit({"involution_residual": inv, "conjugacy_residual": float(conj)},
                  args.out, "kelvin.json")
            return 0
    except EmlabError as exc:
        sys.stderr.write(f"emlab: {type(exc).__name__}: {exc}\n")
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
