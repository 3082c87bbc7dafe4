"""Separation of variables for L u = h u near the singularity.

A solution on a punctured ball (or an exterior domain) is expanded over the
eigenfunctions psi_k of the angular operator,

    u(r, theta) = sum_k phi_k(r) psi_k(theta),

and each radial profile solves a second order ODE with indicial exponents
sigma_plus > sigma_minus.  Profiles are built by variation of parameters on a
log-radial grid, keeping only the branch with u/|x| square integrable near the
origin (interior) or decaying at infinity (exterior).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import grids
from .angular import AngularSpectrum, _coeff_array, _eval_trig
from .errors import (
    AliasingError,
    DegenerateIndicialError,
    ForcingTooSingularError,
    GridMismatchError,
    IndefiniteFormError,
)

DEFAULT_MODE_COUNT = 16
DEFAULT_EXTERIOR_SPAN = 1e6


@dataclass(frozen=True)
class ModalExponents:
    """Indicial exponents of the radial equation for one angular mode."""

    k: int
    mu: float
    sigma_plus: float
    sigma_minus: float

    @property
    def gap(self) -> float:
        return self.sigma_plus - self.sigma_minus


def characteristic_exponents(N: int, mu: float, k: int = 0) -> ModalExponents:
    """sigma = -(N-2)/2 +- sqrt(((N-2)/2)^2 + mu); needs the radicand > 0."""
    half = (N - 2) / 2.0
    disc = half * half + mu
    if disc <= 0:
        raise IndefiniteFormError(
            f"positive definiteness fails: mu + ((N-2)/2)^2 = {disc:.6g} <= 0"
        )
    root = np.sqrt(disc)
    return ModalExponents(k=k, mu=mu, sigma_plus=-half + root, sigma_minus=-half - root)


@dataclass(frozen=True)
class PerturbationSpec:
    """Perturbing potential h(x) = c |x|^{-2 +- eps} g(theta).

    side="interior" uses the exponent -2 + eps (h vanishes relative to the
    inverse square scale at 0); side="exterior" uses -2 - eps (decay at
    infinity).  The angular factor g is a real trig polynomial on the circle;
    on the sphere only a constant factor is supported.
    """

    amplitude: complex = 0.0
    epsilon: float = 0.5
    angular: np.ndarray | None = None
    side: str = "interior"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("perturbation exponent offset eps must be > 0")
        if self.side not in ("interior", "exterior"):
            raise ValueError(f"unknown side {self.side!r}")
        if self.angular is not None and not isinstance(self.angular, np.ndarray):
            object.__setattr__(self, "angular", _coeff_array(self.angular))

    @property
    def radial_exponent(self) -> float:
        return -2.0 + self.epsilon if self.side == "interior" else -2.0 - self.epsilon

    def radial_factor(self, r: np.ndarray) -> np.ndarray:
        return self.amplitude * np.asarray(r, dtype=float) ** self.radial_exponent

    def angular_factor(self, *nodes) -> np.ndarray:
        if self.angular is None:
            return np.ones_like(nodes[0])
        if len(nodes) != 1:
            raise GridMismatchError("trig angular factors are circle-only")
        return _eval_trig(self.angular, nodes[0])

    def kelvin_image(self) -> "PerturbationSpec":
        """The perturbation of the inverted problem: h -> |y|^-4 h(y/|y|^2)."""
        side = "exterior" if self.side == "interior" else "interior"
        return replace(self, side=side)


def perturbation_from_descriptor(desc: dict) -> PerturbationSpec:
    amp = desc.get("amplitude", 0.0)
    if isinstance(amp, (list, tuple)):
        amp = complex(amp[0], amp[1])
    angular = desc.get("angular")
    return PerturbationSpec(
        amplitude=complex(amp),
        epsilon=float(desc.get("epsilon", 0.5)),
        angular=None if angular is None else _coeff_array(angular),
        side=desc.get("side", "interior"),
    )


@dataclass(frozen=True)
class ModalSolution:
    """Radial profile of one angular mode, with analytic derivative samples."""

    exponents: ModalExponents
    r: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    zeta: np.ndarray
    boundary_radius: float
    c1: complex
    side: str = "interior"


def _check_forcing_decay(zeta: np.ndarray, r: np.ndarray, exp: ModalExponents,
                         side: str) -> None:
    mag = np.abs(zeta)
    if mag.max() == 0:
        return
    n = min(60, len(r) // 4)
    sl = slice(0, n) if side == "interior" else slice(-n, None)
    window = mag[sl]
    if window.max() <= 1e-13 * mag.max():
        return
    slope = grids.fitted_slope(r[sl], np.maximum(window, 1e-300))
    # integrability of the variation-of-parameters integrals: the particular
    # solution converges iff the forcing decays faster than s^{sigma_minus - 2}
    # near 0 (interior) resp. slower than s^{sigma_plus - 2} at infinity
    if side == "interior" and slope <= exp.sigma_minus - 2.0 + 1e-6:
        raise ForcingTooSingularError(
            f"forcing slope {slope:.3f} at or below sigma_minus - 2 = "
            f"{exp.sigma_minus - 2:.3f}; mode integral diverges at 0"
        )
    if side == "exterior" and slope >= exp.sigma_plus - 2.0 - 1e-6:
        raise ForcingTooSingularError(
            f"forcing slope {slope:.3f} at or above sigma_plus - 2 = "
            f"{exp.sigma_plus - 2:.3f}; mode integral diverges at infinity"
        )


def solve_radial_mode(exp: ModalExponents, zeta: np.ndarray, boundary_value: complex,
                      r: np.ndarray, side: str = "interior") -> ModalSolution:
    """Variation-of-parameters profile matching the boundary value.

    Interior (boundary at R = r[-1]):

        phi(s) = s^{s+} (c1 + int_s^R t^{1-s+} zeta/(s+ - s-) dt)
               + s^{s-} int_0^s t^{1-s-} zeta/(s+ - s-) dt,

    the second integral closed below r[0] by a power-law tail so that the
    s- homogeneous branch is absent and u/|x| stays square integrable.
    The exterior variant decays at infinity and is matched at R = r[0].
    """
    sp, sm = exp.sigma_plus, exp.sigma_minus
    if sp - sm < 1e-12:
        raise DegenerateIndicialError(
            "coincident indicial exponents: logarithmic branch not supported"
        )
    zeta = np.asarray(zeta, dtype=complex)
    if zeta.shape != r.shape:
        raise GridMismatchError("zeta samples must live on the radial grid")
    _check_forcing_decay(zeta, r, exp, side)
    gap = sp - sm
    scale = float(np.abs(zeta).max())
    if side == "interior":
        R = r[-1]
        f_plus = r ** (1.0 - sp) * zeta / gap
        f_minus = r ** (1.0 - sm) * zeta / gap
        cum_plus = grids.cumulative_integral(f_plus, r)
        cum_minus = grids.cumulative_integral(f_minus, r)
        tail = grids.tail_integral(r, f_minus, side="lower", scale=scale)
        I_plus = cum_plus[-1] - cum_plus  # integral from s to R
        I_minus = tail + cum_minus  # integral from 0 to s
        c1 = boundary_value * R ** (-sp) - R ** (sm - sp) * I_minus[-1]
        phi = r**sp * (c1 + I_plus) + r**sm * I_minus
        dphi = sp * r ** (sp - 1) * (c1 + I_plus) + sm * r ** (sm - 1) * I_minus
    else:
        R = r[0]
        f_minus = r ** (1.0 - sm) * zeta / gap
        f_plus = r ** (1.0 - sp) * zeta / gap
        cum_minus = grids.cumulative_integral(f_minus, r)  # from R to s
        tail = grids.tail_integral(r, f_plus, side="upper", scale=scale)
        I_plus = grids.complement_cumulative(f_plus, r) + tail  # from s to infinity
        c1 = boundary_value * R ** (-sm) - R ** (sp - sm) * I_plus[0]
        phi = r**sm * (c1 + cum_minus) + r**sp * I_plus
        dphi = sm * r ** (sm - 1) * (c1 + cum_minus) + sp * r ** (sp - 1) * I_plus
    return ModalSolution(
        exponents=exp, r=r, phi=phi, dphi=dphi, zeta=zeta,
        boundary_radius=float(R), c1=complex(c1), side=side,
    )


@dataclass(frozen=True)
class FieldSample:
    """Complex samples of a field on a log-radial x angular product grid."""

    dimension: int
    r: np.ndarray
    angular_nodes: tuple
    angular_weights: np.ndarray
    values: np.ndarray  # (n_r, n_nodes)
    du_dr: np.ndarray | None = None
    angular_gradient: tuple | None = None  # per-component (n_r, n_nodes)
    modal: dict | None = None  # mode index -> ModalSolution
    spectrum: AngularSpectrum | None = None
    side: str = "interior"

    def __post_init__(self):
        if self.values.shape != (len(self.r), len(self.angular_nodes[0])):
            raise GridMismatchError("value array shape does not match the grid")
        if self.r[0] <= 0 or np.any(np.diff(self.r) <= 0):
            raise GridMismatchError("radial grid must be positive and increasing")

    @property
    def has_gradient(self) -> bool:
        return self.du_dr is not None and self.angular_gradient is not None

    def detached(self) -> "FieldSample":
        """Copy without modal attachment; forces quadrature-based analysis."""
        return replace(self, modal=None)

    def corrupted(self, noise: float, rng=None) -> "FieldSample":
        """Multiplicative noise on the samples; drops modal and gradient data."""
        rng = np.random.default_rng(rng)
        factor = 1.0 + noise * rng.standard_normal(self.values.shape)
        return replace(
            self,
            values=self.values * factor,
            du_dr=None,
            angular_gradient=None,
            modal=None,
        )


def _angular_grid(spectrum: AngularSpectrum, n_nodes: int | None):
    basis = spectrum.basis
    if spectrum.potential.dimension == 2:
        t, w = basis.grid(n_nodes)
        return (t,), w
    theta, phi, w = basis.grid()
    return (theta, phi), w


def synthesize_field(spectrum: AngularSpectrum, solutions: dict,
                     n_angular: int | None = None,
                     with_gradient: bool = True) -> FieldSample:
    """u(r, theta) = sum_k phi_k(r) psi_k(theta) on the shared product grid."""
    sols = list(solutions.values())
    if not sols:
        raise ValueError("no modal solutions supplied")
    r = sols[0].r
    side = sols[0].side
    for s in sols:
        if s.r.shape != r.shape or not np.allclose(s.r, r):
            raise GridMismatchError("modal solutions must share the radial grid")
    nodes, w = _angular_grid(spectrum, n_angular)
    n_nodes = len(nodes[0])
    values = np.zeros((len(r), n_nodes), dtype=complex)
    du_dr = np.zeros_like(values) if with_gradient else None
    n_comp = 1 if spectrum.potential.dimension == 2 else 2
    ang_grad = tuple(np.zeros_like(values) for _ in range(n_comp)) if with_gradient else None
    for k, sol in solutions.items():
        psi = spectrum.psi_values(k, *nodes)
        values += np.outer(sol.phi, psi)
        if with_gradient:
            du_dr += np.outer(sol.dphi, psi)
            for comp, gpsi in zip(ang_grad, spectrum.psi_gradient(k, *nodes)):
                comp += np.outer(sol.phi, gpsi)
    return FieldSample(
        dimension=spectrum.potential.dimension,
        r=r, angular_nodes=nodes, angular_weights=w, values=values,
        du_dr=du_dr, angular_gradient=ang_grad,
        modal=dict(solutions), spectrum=spectrum, side=side,
    )


def project_onto_modes(field: FieldSample, spectrum: AngularSpectrum,
                       data: np.ndarray | None = None) -> np.ndarray:
    """Per-mode radial profiles phi_k(r_i) by angular quadrature.

    Returns an array (K, n_r).  `data` defaults to the field values; pass
    another array on the same grid to project e.g. h*u.
    """
    if len(field.angular_nodes[0]) <= 2 * spectrum.truncation:
        raise AliasingError(
            f"{len(field.angular_nodes[0])} angular nodes cannot resolve "
            f"truncation {spectrum.truncation}"
        )
    if data is None:
        data = field.values
    psis = np.stack(
        [spectrum.psi_values(k, *field.angular_nodes) for k in range(1, spectrum.count + 1)]
    )
    return (data @ (np.conj(psis).T * field.angular_weights[:, None])).T


def perturbation_samples(h: PerturbationSpec, field: FieldSample,
                         spectrum: AngularSpectrum) -> np.ndarray:
    """Forcing coefficients zeta_k(r_i) of h*u, shape (K, n_r)."""
    g = h.angular_factor(*field.angular_nodes)
    hu = field.values * g[None, :]
    zeta = project_onto_modes(field, spectrum, data=hu)
    return zeta * h.radial_factor(field.r)[None, :]


def homogeneous_solutions(spectrum: AngularSpectrum, boundary_values: dict,
                          r: np.ndarray, side: str = "interior") -> dict:
    """Pure power-law profiles matching boundary data, zero forcing."""
    N = spectrum.potential.dimension
    out = {}
    zeros = np.zeros_like(r, dtype=complex)
    for k, val in boundary_values.items():
        exp = characteristic_exponents(N, spectrum.mu(k), k)
        out[k] = solve_radial_mode(exp, zeros, val, r, side=side)
    return out


def solve_perturbed_field(spectrum: AngularSpectrum, h: PerturbationSpec,
                          boundary_values: dict, r: np.ndarray,
                          mode_count: int | None = None,
                          tol_fp: float = 1e-12, max_iter: int = 50,
                          n_angular: int | None = None):
    """Self-consistent solution of L u = h u by Picard iteration.

    Starts from the homogeneous field matching the boundary data, then
    alternates forcing projection and radial solves until successive fields
    agree in sup norm.  Returns (FieldSample, info dict).
    """
    N = spectrum.potential.dimension
    side = h.side
    K = mode_count or min(spectrum.count, DEFAULT_MODE_COUNT)
    exps = {k: characteristic_exponents(N, spectrum.mu(k), k) for k in range(1, K + 1)}
    bvals = {k: complex(boundary_values.get(k, 0.0)) for k in range(1, K + 1)}
    sols = homogeneous_solutions(spectrum, bvals, r, side=side)
    field = synthesize_field(spectrum, sols, n_angular=n_angular)
    residuals = []
    for _ in range(max_iter):
        zeta = perturbation_samples(h, field, spectrum)
        # modes carrying only projection roundoff are treated as unforced
        zmax = np.abs(zeta).max()
        zero = np.zeros_like(r, dtype=complex)
        sols = {
            k: solve_radial_mode(
                exps[k],
                zeta[k - 1] if np.abs(zeta[k - 1]).max() > 1e-13 * zmax else zero,
                bvals[k], r, side=side,
            )
            for k in range(1, K + 1)
        }
        new_field = synthesize_field(spectrum, sols, n_angular=n_angular)
        resid = float(np.abs(new_field.values - field.values).max())
        residuals.append(resid)
        field = new_field
        scale = max(float(np.abs(field.values).max()), 1e-300)
        if resid < tol_fp * scale:
            break
    info = {
        "iterations": len(residuals),
        "residuals": residuals,
        "converged": bool(residuals and residuals[-1] < tol_fp * scale),
    }
    return field, info
