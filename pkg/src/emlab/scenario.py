"""Configuration-driven pipeline: scenario files in, JSON reports out.

A scenario JSON describes one singular problem (potential, perturbation,
boundary data, grid, requested radii and checks).  ``run_scenario`` executes
spectrum -> modal solve -> frequency trace -> asymptotic profile ->
verification and returns a report where every asserted quantity carries
{value, tolerance, pass}.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__, grids
from .angular import angular_spectrum, build_potential
from .asymptotics import (
    blowup_profile,
    classify_regularity,
    extract_coefficients,
    kelvin_transform,
)
from .errors import EmlabError, ScenarioValidationError
from .frequency import (
    check_height_derivative,
    frequency_trace,
    height_scaling_limit,
    pohozaev_residual,
)
from .inequalities import hardy_2d_constant_check, inequality_sweep, mu1_comparison
from .modal import (
    characteristic_exponents,
    homogeneous_solutions,
    perturbation_from_descriptor,
    solve_perturbed_field,
    synthesize_field,
)

SCHEMA_VERSION = 1

#: multiplied by --tol-scale; every entry is an acceptance threshold
TOLERANCES = {
    "picard_converged": 1e-12,
    "gamma_fit": 1e-5,
    "eps_rate": 0.1,
    "height_derivative": 1e-6,
    "pohozaev": 1e-6,
    "h_scaling_slope": 1e-3,
    "h_scaling_drift": 0.01,
    "beta_r_independence": 1e-8,
    "beta_unit": 1e-10,
    "blowup_rate": 0.1,
    "kelvin_conjugacy": 1e-8,
    "kelvin_involution": 1e-12,
    "margin": 1e-8,
    "mu1_comparison": 1e-10,
    "hardy2d_agreement": 1e-9,
}

DEFAULT_CHECKS = {
    "frequency": True,
    "identities": True,
    "asymptotics": True,
    "kelvin": False,
    "inequalities": False,
}

VERIFY_CHECKS = ("hardy", "diamagnetic", "hardy2d", "mu1", "pohozaev",
                 "height_derivative")


@dataclass(frozen=True)
class Scenario:
    dimension: int
    potential: dict
    perturbation: dict | None
    side: str
    boundary_radius: float
    boundary_values: dict  # mode index -> complex
    grid_nodes: int
    rmin_ratio: float
    exterior_span: float
    eigen_count: int
    truncation: int | None
    radii: np.ndarray
    checks: dict
    sweep_count: int
    seed: int
    raw: dict = dc_field(repr=False, default_factory=dict)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "potential": self.potential,
            "perturbation": self.perturbation,
            "side": self.side,
            "boundary": {
                "radius": self.boundary_radius,
                "values": {
                    str(k): [v.real, v.imag] for k, v in
                    sorted(self.boundary_values.items())
                },
            },
            "grid": {
                "nodes": self.grid_nodes,
                "rmin_ratio": self.rmin_ratio,
                "exterior_span": self.exterior_span,
            },
            "eigen_count": self.eigen_count,
            "truncation": self.truncation,
            "radii": [float(v) for v in self.radii],
            "checks": dict(sorted(self.checks.items())),
            "sweep_count": self.sweep_count,
            "seed": self.seed,
        }


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _validate(cond: bool, message: str) -> None:
    if not cond:
        raise ScenarioValidationError(message)


def scenario_from_dict(doc: dict) -> Scenario:
    """Validate a scenario document and fill defaults."""
    _validate(isinstance(doc, dict), "scenario must be a JSON object")
    pot_desc = doc.get("potential")
    _validate(isinstance(pot_desc, dict), "scenario needs a potential descriptor")
    dimension = int(doc.get("dimension", 3 if pot_desc.get("kind") == "dipole" else 2))
    if pot_desc.get("kind") == "dipole":
        _validate(dimension == 3, "dipole potentials require dimension 3")
    else:
        _validate(dimension == 2, f"potential kind {pot_desc.get('kind')!r} requires dimension 2")

    pert = doc.get("perturbation")
    side = doc.get("side", "interior")
    _validate(side in ("interior", "exterior"), f"unknown side {side!r}")
    if pert is not None:
        eps = pert.get("epsilon", 0.5)
        _validate(np.isfinite(eps) and eps > 0,
                  "perturbation decay offset epsilon must be > 0 (|x|^(-2 +- eps))")
        pert = dict(pert)
        pert.setdefault("side", side)
        _validate(pert["side"] == side, "perturbation side must match the scenario side")

    boundary = doc.get("boundary", {})
    R = float(boundary.get("radius", 1.0))
    _validate(np.isfinite(R) and R > 0, "boundary radius must be positive")
    eigen_count = int(doc.get("eigen_count", 8))
    _validate(eigen_count >= 1, "eigen_count must be >= 1")
    values = {}
    for key, val in boundary.get("values", {"1": 1.0}).items():
        k = int(key)
        _validate(1 <= k <= eigen_count,
                  f"boundary mode {k} outside the requested {eigen_count} eigenvalues")
        values[k] = _as_complex(val)
    _validate(bool(values), "boundary values must name at least one mode")
    _validate(all(np.isfinite([v.real, v.imag]).all() for v in values.values()),
              "boundary values must be finite")

    grid = doc.get("grid", {})
    nodes = int(grid.get("nodes", grids.DEFAULT_RADIAL_NODES))
    _validate(nodes >= 100, "radial grid needs at least 100 nodes")
    rmin_ratio = float(grid.get("rmin_ratio", grids.DEFAULT_RMIN_RATIO))
    _validate(0 < rmin_ratio < 1, "rmin_ratio must lie in (0, 1)")
    span = float(grid.get("exterior_span", 1e8))
    _validate(span > 1, "exterior_span must exceed 1")

    radii = doc.get("radii")
    if radii is None:
        if side == "interior":
            radii = np.geomspace(1e-5 * R, 0.5 * R, 20)
        else:
            radii = np.geomspace(2 * R, 1e6 * R, 20)
    else:
        radii = np.asarray([float(v) for v in radii], dtype=float)
        _validate(np.all(np.isfinite(radii)) and np.all(radii > 0),
                  "trace radii must be positive and finite")

    checks = dict(DEFAULT_CHECKS)
    for name, toggle in doc.get("checks", {}).items():
        _validate(name in DEFAULT_CHECKS,
                  f"unknown check toggle {name!r}; valid: {sorted(DEFAULT_CHECKS)}")
        checks[name] = bool(toggle)

    truncation = doc.get("truncation")
    return Scenario(
        dimension=dimension,
        potential=pot_desc,
        perturbation=pert,
        side=side,
        boundary_radius=R,
        boundary_values=values,
        grid_nodes=nodes,
        rmin_ratio=rmin_ratio,
        exterior_span=span,
        eigen_count=eigen_count,
        truncation=None if truncation is None else int(truncation),
        radii=radii,
        checks=checks,
        sweep_count=int(doc.get("sweep_count", 50)),
        seed=int(doc.get("seed", 42)),
        raw=doc,
    )


def parse_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return scenario_from_dict(doc)


def scenario_hash(scn: Scenario) -> str:
    blob = json.dumps(scn.to_json(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _check(name: str, value: float, tol: float, ok=None) -> dict:
    if ok is None:
        ok = bool(abs(value) <= tol)
    return {"name": name, "value": float(value), "tolerance": float(tol),
            "pass": bool(ok)}


def _solve_field(scn: Scenario, spectrum):
    R = scn.boundary_radius
    if scn.side == "interior":
        r = grids.log_grid(R * scn.rmin_ratio, R, scn.grid_nodes)
    else:
        r = grids.log_grid(R, R * scn.exterior_span, scn.grid_nodes)
    h = None
    if scn.perturbation is not None and _as_complex(
            scn.perturbation.get("amplitude", 0.0)) != 0:
        h = perturbation_from_descriptor(scn.perturbation)
        field, info = solve_perturbed_field(
            spectrum, h, scn.boundary_values, r, mode_count=scn.eigen_count
        )
    else:
        sols = homogeneous_solutions(spectrum, scn.boundary_values, r, side=scn.side)
        field = synthesize_field(spectrum, sols)
        info = {"iterations": 0, "residuals": [], "converged": True}
    return field, h, info


def _target_gamma(scn: Scenario, spectrum) -> tuple[int, float]:
    k0 = min(k for k, v in scn.boundary_values.items() if v != 0)
    exp = characteristic_exponents(scn.dimension, spectrum.mu(k0), k0)
    gamma = exp.sigma_plus if scn.side == "interior" else -exp.sigma_minus
    return k0, gamma


def _inequality_checks(scn: Scenario, pot, tol_scale: float):
    checks, margins = [], {}
    rng = np.random.default_rng(scn.seed)
    tol = TOLERANCES["margin"] * tol_scale
    sweeps = ["hardy", "diamagnetic"] + (["hardy2d"] if scn.dimension == 2 else [])
    for name in sweeps:
        out = inequality_sweep(pot, name, count=scn.sweep_count, rng=rng, tol=tol)
        margins[name] = out
        if out["status"] == "degenerate":
            continue
        checks.append(_check(f"{name}_margin", out["min_margin"], tol,
                             ok=out["min_margin"] >= -tol))
    if scn.dimension == 2:
        gap = mu1_comparison(pot)
        checks.append(_check("mu1_comparison", gap,
                             TOLERANCES["mu1_comparison"] * tol_scale,
                             ok=gap >= -TOLERANCES["mu1_comparison"] * tol_scale))
        info = hardy_2d_constant_check(pot)
        margins["hardy2d_constant"] = info
        if not info["degenerate"]:
            checks.append(_check("hardy2d_agreement", info["agreement"],
                                 TOLERANCES["hardy2d_agreement"] * tol_scale))
    return checks, margins


def run_scenario(scn: Scenario, out_dir=None, tol_scale: float = 1.0,
                 seed: int | None = None) -> dict:
    """Execute the pipeline and return the report dictionary.

    Writes ``report.json`` (and ``trace.csv`` when a trace is produced) under
    ``out_dir`` if given.  Partial reports carry status "error".
    """
    t0 = time.perf_counter()
    if seed is not None:
        scn = scenario_from_dict({**scn.raw, "seed": int(seed)})
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "scenario": scn.to_json(),
        "scenario_hash": scenario_hash(scn),
        "checks": [],
    }
    checks = report["checks"]
    trace = None
    try:
        pot = build_potential(scn.potential)
        spectrum = angular_spectrum(pot, count=scn.eigen_count,
                                    truncation=scn.truncation)
        report["spectrum"] = spectrum.to_json()

        needs_field = any(scn.checks[n] for n in
                          ("frequency", "identities", "asymptotics", "kelvin"))
        field = h = None
        if needs_field:
            field, h, info = _solve_field(scn, spectrum)
            report["solver"] = {"iterations": info["iterations"],
                                "converged": info["converged"]}
            checks.append(_check("picard_converged", 0.0 if info["converged"] else 1.0,
                                 0.5, ok=info["converged"]))
            k0, gamma = _target_gamma(scn, spectrum)
            report["k0"] = k0
            report["gamma_target"] = gamma
            report["regularity"] = classify_regularity(
                gamma if scn.side == "interior" else -gamma, scn.dimension
            )

        if scn.checks["frequency"] and field is not None:
            trace = frequency_trace(field, h, scn.radii)
            report["frequency"] = trace.fit_summary()
            checks.append(_check("gamma_fit", trace.gamma_hat - gamma,
                                 TOLERANCES["gamma_fit"] * tol_scale))
            if h is not None and np.isfinite(trace.eps_hat):
                checks.append(_check("eps_rate", (trace.eps_hat - h.epsilon) / h.epsilon,
                                     TOLERANCES["eps_rate"]))
            scaling = height_scaling_limit(trace, gamma)
            report["h_scaling"] = scaling
            checks.append(_check("h_scaling_slope", scaling["slope_defect"],
                                 TOLERANCES["h_scaling_slope"] * tol_scale))
            checks.append(_check("h_scaling_drift", scaling["drift"],
                                 TOLERANCES["h_scaling_drift"]))

        if scn.checks["identities"] and field is not None:
            resid = check_height_derivative(field, h)
            checks.append(_check("height_derivative", resid,
                                 TOLERANCES["height_derivative"] * tol_scale))
            r_mid = float(np.sqrt(scn.radii.min() * scn.radii.max()))
            poh = pohozaev_residual(field, h, r_mid)
            checks.append(_check("pohozaev", poh,
                                 TOLERANCES["pohozaev"] * tol_scale))

        if scn.checks["asymptotics"] and field is not None:
            R = scn.boundary_radius
            R1, R2 = (R, R / 2) if scn.side == "interior" else (R, 2 * R)
            p1 = extract_coefficients(field, gamma, R1, h)
            p2 = extract_coefficients(field, gamma, R2, h)
            report["profile"] = p1.to_json()
            diff = float(np.abs(p1.beta - p2.beta).max())
            checks.append(_check("beta_r_independence", diff,
                                 TOLERANCES["beta_r_independence"] * tol_scale))
            if h is None and len(scn.boundary_values) == 1:
                bv = scn.boundary_values[k0]
                i = k0 - p1.j0
                defect = abs(p1.beta[i] - bv * R ** (-gamma if scn.side == "interior"
                                                    else gamma))
                checks.append(_check("beta_unit", defect,
                                     TOLERANCES["beta_unit"] * tol_scale))
            if h is not None:
                lams = (np.geomspace(1e-4 * R, 1e-2 * R, 8) if scn.side == "interior"
                        else np.geomspace(1e2 * R, 1e4 * R, 8))
                blow = blowup_profile(field, gamma, lams, h, profile=p1)
                report["blowup_rate"] = blow["rate"]
                if np.isfinite(blow["rate"]):
                    checks.append(_check("blowup_rate",
                                         (blow["rate"] - h.epsilon) / h.epsilon,
                                         TOLERANCES["blowup_rate"]))

        if scn.checks["kelvin"] and field is not None:
            v = kelvin_transform(field)
            back = kelvin_transform(v)
            inv = float(np.abs(back.values - field.values).max()
                        / max(np.abs(field.values).max(), 1e-300))
            checks.append(_check("kelvin_involution", inv,
                                 TOLERANCES["kelvin_involution"] * tol_scale))
            tr_u = trace if trace is not None else frequency_trace(field, h, scn.radii)
            # mirror the snapped radii so both traces use reciprocal grid nodes
            mirror = np.sort(1.0 / tr_u.r)
            tr_v = frequency_trace(v, None, mirror)
            shift = scn.dimension - 2
            if scn.side == "exterior":
                conj = np.abs(np.sort(tr_v.N) - (np.sort(tr_u.N) - shift)).max()
            else:
                conj = np.abs(np.sort(tr_u.N) - (np.sort(tr_v.N) - shift)).max()
            checks.append(_check("kelvin_conjugacy", float(conj),
                                 TOLERANCES["kelvin_conjugacy"] * tol_scale))

        if scn.checks["inequalities"]:
            iq_checks, margins = _inequality_checks(scn, pot, tol_scale)
            checks.extend(iq_checks)
            report["margins"] = margins

        report["status"] = "pass" if all(c["pass"] for c in checks) else "fail"
    except EmlabError as exc:
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    report["wall_clock"] = time.perf_counter() - t0

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if trace is not None:
            trace.to_csv(out / "trace.csv")
        (out / "report.json").write_text(report_json(report))
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=True) + "\n"


def verify_suite(scn: Scenario, names=None, out_dir=None,
                 tol_scale: float = 1.0, seed: int | None = None) -> dict:
    """Run only the named verification checks (default: all of them)."""
    if names is None:
        names = list(VERIFY_CHECKS)
    unknown = [n for n in names if n not in VERIFY_CHECKS]
    if unknown:
        raise ScenarioValidationError(
            f"unknown check name(s) {unknown}; valid: {list(VERIFY_CHECKS)}"
        )
    if seed is not None:
        scn = scenario_from_dict({**scn.raw, "seed": int(seed)})
    t0 = time.perf_counter()
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "scenario": scn.to_json(),
        "scenario_hash": scenario_hash(scn),
        "checks": [],
        "margins": {},
    }
    checks = report["checks"]
    try:
        pot = build_potential(scn.potential)
        rng = np.random.default_rng(scn.seed)
        tol = TOLERANCES["margin"] * tol_scale
        for name in names:
            if name in ("hardy", "diamagnetic", "hardy2d"):
                if name == "hardy2d" and scn.dimension != 2:
                    continue
                out = inequality_sweep(pot, name, count=scn.sweep_count,
                                       rng=rng, tol=tol)
                report["margins"][name] = out
                if out["status"] != "degenerate":
                    checks.append(_check(f"{name}_margin", out["min_margin"], tol,
                                         ok=out["min_margin"] >= -tol))
            elif name == "mu1":
                if scn.dimension != 2:
                    continue
                gap = mu1_comparison(pot)
                lim = TOLERANCES["mu1_comparison"] * tol_scale
                checks.append(_check("mu1_comparison", gap, lim, ok=gap >= -lim))
            else:
                spectrum = angular_spectrum(pot, count=scn.eigen_count,
                                            truncation=scn.truncation)
                field, h, _ = _solve_field(scn, spectrum)
                if name == "pohozaev":
                    r_mid = float(np.sqrt(scn.radii.min() * scn.radii.max()))
                    checks.append(_check("pohozaev",
                                         pohozaev_residual(field, h, r_mid),
                                         TOLERANCES["pohozaev"] * tol_scale))
                else:
                    checks.append(_check("height_derivative",
                                         check_height_derivative(field, h),
                                         TOLERANCES["height_derivative"] * tol_scale))
        report["status"] = "pass" if all(c["pass"] for c in checks) else "fail"
    except EmlabError as exc:
        report["status"] = "error"
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    report["wall_clock"] = time.perf_counter() - t0
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report_json(report))
    return report
