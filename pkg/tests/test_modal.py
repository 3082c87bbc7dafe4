import numpy as np
import pytest
from numpy.testing import assert_allclose

from emlab import grids
from emlab.errors import (
    DegenerateIndicialError,
    ForcingTooSingularError,
    GridMismatchError,
    IndefiniteFormError,
)
from emlab.modal import (
    ModalExponents,
    PerturbationSpec,
    characteristic_exponents,
    homogeneous_solutions,
    perturbation_samples,
    project_onto_modes,
    solve_perturbed_field,
    solve_radial_mode,
    synthesize_field,
)


class TestCharacteristicExponents:
    @pytest.mark.parametrize(
        "N,mu,plus,minus",
        [
            (2, 0.09, 0.3, -0.3),
            (3, 2.0, 1.0, -2.0),
            (4, 0.0, 0.0, -2.0),
        ],
    )
    def test_closed_form(self, N, mu, plus, minus):
        exp = characteristic_exponents(N, mu)
        assert exp.sigma_plus == pytest.approx(plus, abs=1e-14)
        assert exp.sigma_minus == pytest.approx(minus, abs=1e-14)
        assert exp.sigma_plus + exp.sigma_minus == pytest.approx(-(N - 2), abs=1e-13)

    def test_indefinite_rejected(self):
        with pytest.raises(IndefiniteFormError):
            characteristic_exponents(2, 0.0)
        with pytest.raises(IndefiniteFormError):
            characteristic_exponents(3, -0.25)


class TestRadialSolve:
    def test_homogeneous_power_law(self, radial_grid):
        exp = characteristic_exponents(2, 0.09)
        sol = solve_radial_mode(exp, np.zeros_like(radial_grid, dtype=complex), 1.0, radial_grid)
        assert_allclose(sol.phi, radial_grid**0.3, rtol=1e-12)
        assert_allclose(sol.dphi, 0.3 * radial_grid ** (-0.7), rtol=1e-12)

    def test_zero_boundary_zero_solution(self, radial_grid):
        exp = characteristic_exponents(2, 0.49)
        sol = solve_radial_mode(exp, np.zeros_like(radial_grid, dtype=complex), 0.0, radial_grid)
        assert np.abs(sol.phi).max() == 0.0

    def test_power_forcing_matches_antiderivatives(self, radial_grid):
        # zeta = s^(sigma+ - 2 + eps) has closed-form profile integrals
        r = radial_grid
        exp = characteristic_exponents(2, 0.09)
        sp, sm = exp.sigma_plus, exp.sigma_minus
        eps = 0.5
        gap = sp - sm
        p = sp - 2 + eps
        zeta = (r**p).astype(complex)
        e1, e2 = 1 - sp + p, 1 - sm + p
        I_plus = (1 - r ** (e1 + 1)) / (e1 + 1) / gap
        I_minus = r ** (e2 + 1) / (e2 + 1) / gap
        c1 = 1.0 - I_minus[-1]
        phi_exact = r**sp * (c1 + I_plus) + r**sm * I_minus
        dphi_exact = sp * r ** (sp - 1) * (c1 + I_plus) + sm * r ** (sm - 1) * I_minus
        sol = solve_radial_mode(exp, zeta, 1.0, r)
        assert_allclose(sol.phi, phi_exact, rtol=1e-9, atol=1e-12)
        assert_allclose(sol.dphi, dphi_exact, rtol=1e-9, atol=1e-9)

    def test_exterior_homogeneous_decay(self, exterior_grid):
        exp = characteristic_exponents(2, 0.09)
        sol = solve_radial_mode(
            exp, np.zeros_like(exterior_grid, dtype=complex), 1.0, exterior_grid,
            side="exterior",
        )
        assert_allclose(sol.phi, exterior_grid**exp.sigma_minus, rtol=1e-12)

    def test_exterior_power_forcing_oracle(self, exterior_grid):
        r = exterior_grid
        exp = characteristic_exponents(2, 0.09)
        sp, sm = exp.sigma_plus, exp.sigma_minus
        gap = sp - sm
        eps = 0.5
        p = sm - 2 - eps
        zeta = (r**p).astype(complex)
        e1, e2 = 1 - sm + p, 1 - sp + p
        I_minus = (r ** (e1 + 1) - 1.0) / (e1 + 1) / gap
        I_plus = -(r ** (e2 + 1)) / (e2 + 1) / gap
        c1 = 1.0 - I_plus[0]
        phi_exact = r**sm * (c1 + I_minus) + r**sp * I_plus
        sol = solve_radial_mode(exp, zeta, 1.0, r, side="exterior")
        assert_allclose(sol.phi, phi_exact, rtol=1e-9)

    def test_regular_branch_slope(self, radial_grid):
        # |phi| may not decay slower than r^sigma+ as r -> 0
        exp = characteristic_exponents(2, 0.09)
        zeta = (0.1 * radial_grid ** (exp.sigma_plus - 1.5)).astype(complex)
        sol = solve_radial_mode(exp, zeta, 1.0, radial_grid)
        slope = grids.fitted_slope(radial_grid[:200], np.abs(sol.phi[:200]))
        assert slope >= exp.sigma_plus - 0.01

    def test_degenerate_exponents_rejected(self, radial_grid):
        exp = ModalExponents(k=1, mu=-0.25, sigma_plus=0.3, sigma_minus=0.3)
        with pytest.raises(DegenerateIndicialError):
            solve_radial_mode(exp, np.zeros_like(radial_grid, dtype=complex), 1.0, radial_grid)

    def test_divergent_forcing_rejected(self, radial_grid):
        exp = characteristic_exponents(2, 0.09)
        zeta = (radial_grid ** (exp.sigma_minus - 2.5)).astype(complex)
        with pytest.raises(ForcingTooSingularError):
            solve_radial_mode(exp, zeta, 1.0, radial_grid)

    def test_grid_mismatch(self, radial_grid):
        exp = characteristic_exponents(2, 0.09)
        with pytest.raises(GridMismatchError):
            solve_radial_mode(exp, np.zeros(7, dtype=complex), 1.0, radial_grid)


class TestSynthesisProjection:
    def test_single_mode_roundtrip(self, ab_spectrum, radial_grid):
        sols = homogeneous_solutions(ab_spectrum, {1: 1.0}, radial_grid)
        field = synthesize_field(ab_spectrum, sols)
        prof = project_onto_modes(field, ab_spectrum)
        assert_allclose(prof[0], sols[1].phi, atol=1e-12)
        assert np.abs(prof[1:]).max() < 1e-12

    def test_three_mode_roundtrip(self, ab_spectrum, radial_grid):
        sols = homogeneous_solutions(
            ab_spectrum, {1: 1.0, 2: 0.5, 3: 0.25j}, radial_grid
        )
        field = synthesize_field(ab_spectrum, sols)
        prof = project_onto_modes(field, ab_spectrum)
        for k, sol in sols.items():
            assert_allclose(prof[k - 1], sol.phi, atol=1e-10)

    def test_constant_field_on_free_circle(self, free_circle_spectrum, radial_grid):
        sols = homogeneous_solutions(free_circle_spectrum, {2: 1.0}, radial_grid)
        field = synthesize_field(free_circle_spectrum, sols)
        # replace values by a constant; only the constant mode should survive
        const = field.values * 0 + 1.0
        prof = project_onto_modes(field, free_circle_spectrum, data=const)
        assert np.abs(prof[0] - prof[0][0]).max() < 1e-12
        assert np.abs(prof[0][0]) == pytest.approx(np.sqrt(2 * np.pi), abs=1e-12)

    def test_parseval(self, ab_spectrum, radial_grid):
        sols = homogeneous_solutions(ab_spectrum, {1: 1.0, 3: 0.5}, radial_grid)
        field = synthesize_field(ab_spectrum, sols)
        quad = np.abs(field.values) ** 2 @ field.angular_weights
        modal = sum(np.abs(s.phi) ** 2 for s in sols.values())
        assert_allclose(quad, modal, atol=1e-10 * modal.max())

    def test_sphere_roundtrip(self, dipole_spectrum, radial_grid):
        sols = homogeneous_solutions(dipole_spectrum, {1: 1.0, 2: 0.3}, radial_grid)
        field = synthesize_field(dipole_spectrum, sols)
        prof = project_onto_modes(field, dipole_spectrum)
        for k, sol in sols.items():
            assert_allclose(prof[k - 1], sol.phi, atol=1e-10)

    def test_gradient_samples_match_fd(self, ab_spectrum, radial_grid):
        sols = homogeneous_solutions(ab_spectrum, {1: 1.0, 2: 0.5}, radial_grid)
        field = synthesize_field(ab_spectrum, sols)
        fd = grids.log_derivative(field.values, radial_grid)
        mid = slice(100, -100)
        assert_allclose(field.du_dr[mid], fd[mid], rtol=1e-7, atol=1e-9)


class TestPerturbation:
    def test_zero_perturbation(self, ab_spectrum, radial_grid):
        sols = homogeneous_solutions(ab_spectrum, {1: 1.0}, radial_grid)
        field = synthesize_field(ab_spectrum, sols)
        z = perturbation_samples(PerturbationSpec(amplitude=0.0), field, ab_spectrum)
        assert np.abs(z).max() == 0.0

    def test_constant_factor_hits_single_mode(self, ab_spectrum, radial_grid):
        sols = homogeneous_solutions(ab_spectrum, {1: 1.0}, radial_grid)
        field = synthesize_field(ab_spectrum, sols)
        h = PerturbationSpec(amplitude=1.0, epsilon=0.5)
        z = perturbation_samples(h, field, ab_spectrum)
        expect = radial_grid ** (-1.5) * sols[1].phi
        assert_allclose(z[0], expect, rtol=1e-10)
        assert np.abs(z[1:]).max() < 1e-10 * np.abs(z[0]).max()

    def test_cos_factor_mixes_adjacent_fourier_modes(self, ab_spectrum, radial_grid):
        sols = homogeneous_solutions(ab_spectrum, {1: 1.0}, radial_grid)
        field = synthesize_field(ab_spectrum, sols)
        h = PerturbationSpec(amplitude=1.0, epsilon=0.5, angular={"cos": [1.0]})
        z = perturbation_samples(h, field, ab_spectrum)
        # modes 2 and 3 are the j = -1 and j = +1 neighbours of the ground mode
        scale = np.abs(z).max()
        assert np.abs(z[1]).max() > 1e-3 * scale
        assert np.abs(z[2]).max() > 1e-3 * scale
        assert np.abs(z[0]).max() < 1e-10 * scale
        # oracle: direct 2d quadrature at one radius
        i = 1500
        t = field.angular_nodes[0]
        hu = np.cos(t) * field.values[i] * radial_grid[i] ** (-1.5)
        psi2 = ab_spectrum.psi_values(2, t)
        direct = np.sum(field.angular_weights * hu * np.conj(psi2))
        assert z[1][i] == pytest.approx(direct, rel=1e-12)


class TestPicard:
    def test_geometric_convergence(self, ab_spectrum, radial_grid):
        h = PerturbationSpec(amplitude=0.05, epsilon=0.5)
        field, info = solve_perturbed_field(ab_spectrum, h, {1: 1.0}, radial_grid, mode_count=8)
        assert info["converged"]
        ratios = [b / a for a, b in zip(info["residuals"], info["residuals"][1:]) if a > 1e-13]
        assert all(rho < 0.9 for rho in ratios)

    def test_solution_satisfies_mode_ode(self, ab_spectrum, radial_grid):
        # the converged profile must reproduce itself through one more solve
        h = PerturbationSpec(amplitude=0.05, epsilon=0.5, angular={"cos": [1.0]})
        field, info = solve_perturbed_field(ab_spectrum, h, {1: 1.0}, radial_grid, mode_count=8)
        assert info["converged"]
        z = perturbation_samples(h, field, ab_spectrum)
        sol1 = solve_radial_mode(field.modal[1].exponents, z[0], 1.0, radial_grid)
        assert_allclose(sol1.phi, field.modal[1].phi, atol=1e-10)

    def test_leading_slope_is_sigma_plus(self, ab_spectrum, radial_grid):
        h = PerturbationSpec(amplitude=0.05, epsilon=0.5)
        field, _ = solve_perturbed_field(ab_spectrum, h, {1: 1.0}, radial_grid, mode_count=8)
        slope = grids.fitted_slope(radial_grid[:200], np.abs(field.modal[1].phi[:200]))
        assert slope == pytest.approx(0.3, abs=1e-3)

    def test_exterior_picard(self, ab_spectrum, exterior_grid):
        h = PerturbationSpec(amplitude=0.05, epsilon=0.5, side="exterior")
        field, info = solve_perturbed_field(ab_spectrum, h, {1: 1.0}, exterior_grid, mode_count=8)
        assert info["converged"]
        slope = grids.fitted_slope(exterior_grid[-200:], np.abs(field.modal[1].phi[-200:]))
        assert slope == pytest.approx(-0.3, abs=1e-3)


class TestFieldSample:
    def test_corrupted_drops_modal(self, ab_spectrum, radial_grid, rng):
        sols = homogeneous_solutions(ab_spectrum, {1: 1.0}, radial_grid)
        field = synthesize_field(ab_spectrum, sols)
        bad = field.corrupted(0.01, rng)
        assert bad.modal is None
        rel = np.abs(bad.values - field.values).max() / np.abs(field.values).max()
        assert 1e-4 < rel < 0.1

    def test_detached_keeps_values(self, ab_spectrum, radial_grid):
        sols = homogeneous_solutions(ab_spectrum, {1: 1.0}, radial_grid)
        field = synthesize_field(ab_spectrum, sols)
        bare = field.detached()
        assert bare.modal is None
        assert np.shares_memory(bare.values, field.values)

    def test_shape_guard(self, ab_spectrum, radial_grid):
        sols = homogeneous_solutions(ab_spectrum, {1: 1.0}, radial_grid)
        field = synthesize_field(ab_spectrum, sols)
        from dataclasses import replace

        with pytest.raises(GridMismatchError):
            replace(field, values=field.values[:10])
