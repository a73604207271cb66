import dataclasses
import json
import math

import numpy as np
import pytest

from relatom import thomas_fermi as tf
from relatom.errors import DomainError, ToleranceFailure
from relatom.numerics import RadialFunction, grid_quadrature

# independent fixed-step RK4 shooting oracle (dev run, u = sqrt(x) variable,
# 54 bisections, Sommerfeld classification window x <= 50)
SLOPE0_ORACLE = -1.5880710


def rho_mass(rho: RadialFunction):
    head = rho.values[0] * rho.grid[0] ** 3 / (rho._head_exp + 3.0)
    mass = grid_quadrature(lambda v: rho(v) * v * v, rho.grid) + head
    if rho.tail.kind == "power_law":
        e = rho.tail.exponent
        mass += rho.tail.coefficient * rho.grid[-1] ** (e + 3.0) / (-e - 3.0)
    return 4.0 * math.pi * mass


class TestSolve:
    def test_neutral_slope(self, neutral_solution):
        assert abs(neutral_solution.slope0 - SLOPE0_ORACLE) < 1e-4

    def test_neutral_mu_zero(self, neutral_solution):
        assert neutral_solution.mu == 0.0
        assert math.isinf(neutral_solution.edge_radius)

    def test_over_charged_matches_neutral(self, neutral_solution):
        sol = tf.solve(tf.TFParams(lam=1.5, Z=1.0))
        assert sol.mu == 0.0
        assert abs(tf.tf_energy(sol) - tf.tf_energy(neutral_solution)) < 1e-6 * abs(
            tf.tf_energy(neutral_solution)
        )

    def test_ion_mass_and_mu(self, ion_solution):
        assert ion_solution.mu > 0.0
        assert abs(rho_mass(ion_solution.rho) - 0.5) < 1e-6 * 0.5
        assert abs(ion_solution.electron_count - 0.5) < 1e-6 * 0.5

    def test_ion_edge_flux(self, ion_solution):
        # -x0 phi'(x0) = 1 - lambda defines the free boundary
        x0 = ion_solution.edge_radius
        prof = ion_solution.profile
        assert abs(-x0 * prof.edge_slope - 0.5) < 1e-9

    def test_residual_contract(self, neutral_solution, ion_solution):
        assert tf.tf_equation_residual(neutral_solution) <= 1e-7
        assert tf.tf_equation_residual(ion_solution) <= 1e-7

    def test_tol_out_of_range(self):
        with pytest.raises(DomainError):
            tf.solve(tf.TFParams(lam=1.0, Z=1.0), tol=1e-2)
        with pytest.raises(DomainError):
            tf.solve(tf.TFParams(lam=1.0, Z=1.0), tol=1e-13)

    def test_unreachable_tol_fails_honestly(self):
        with pytest.raises(ToleranceFailure):
            tf.solve(tf.TFParams(lam=1.0, Z=137.0), tol=2e-12)

    def test_extreme_ionization_bracket_failure(self):
        from relatom.errors import ShootingFailure

        # target edge flux 1 - lambda -> 1 escapes the bisection bracket
        with pytest.raises(ShootingFailure):
            tf.solve(tf.TFParams(lam=1e-7, Z=1.0))


class TestEnergy:
    def test_two_route_agreement_neutral(self, neutral_solution):
        e_func = tf.tf_energy(neutral_solution)
        e_slope = tf.tf_energy_slope_identity(neutral_solution)
        assert abs(e_func / e_slope - 1.0) < 1e-4

    def test_two_route_agreement_ion(self, ion_solution):
        e_func = tf.tf_energy(ion_solution)
        e_slope = tf.tf_energy_slope_identity(ion_solution)
        assert abs(e_func / e_slope - 1.0) < 1e-4

    def test_energy_negative(self, neutral_solution, ion_solution):
        assert tf.tf_energy(neutral_solution) < 0.0
        assert tf.tf_energy(ion_solution) < 0.0

    @pytest.mark.parametrize("Z", (2.0, 10.0, 137.0))
    def test_z_scaling(self, neutral_solution, Z):
        sol = tf.solve(tf.TFParams(lam=1.0, Z=Z))
        ratio = tf.tf_energy(sol) / (Z ** (7.0 / 3.0) * tf.tf_energy(neutral_solution))
        assert abs(ratio - 1.0) < 1e-6

    def test_variational_minimum(self, ion_solution):
        # admissible zero-mass perturbations cannot lower the functional
        # beyond O(eps^2)
        sol = ion_solution
        rho = sol.rho
        e0 = tf.tf_functional(sol.params, rho)
        rng = np.random.default_rng(17)
        eps = 1e-3
        grid = rho.grid
        for _ in range(5):
            r1, r2 = rng.uniform(0.3, 2.0, size=2) * sol.b
            w = 0.3 * sol.b
            eta = np.exp(-((grid - r1) / w) ** 2) - np.exp(-((grid - r2) / w) ** 2)
            # project out the monopole so the electron count is unchanged
            base = np.exp(-((grid - 0.5 * (r1 + r2)) / (2 * w)) ** 2)
            m_eta = grid_quadrature(lambda v, e=eta: np.interp(v, grid, e) * v * v, grid)
            m_base = grid_quadrature(lambda v, b=base: np.interp(v, grid, b) * v * v, grid)
            eta = eta - base * (m_eta / m_base)
            scale = np.max(np.abs(eta)) / np.max(rho.values)
            eta = eta / scale * 0.1  # keep rho + eps eta >= 0 in the bulk
            perturbed = np.maximum(rho.values + eps * eta, 0.0)
            rho_eps = dataclasses.replace(rho, values=perturbed)
            e_eps = tf.tf_functional(sol.params, rho_eps)
            assert e_eps >= e0 - 50.0 * eps**2 * abs(e0)


class TestResidual:
    def test_scaled_density_detected(self, neutral_solution):
        sol = neutral_solution
        rho_bad = dataclasses.replace(sol.rho, values=1.1 * sol.rho.values)
        assert tf.tf_equation_residual_density(sol.params, rho_bad, sol.mu) > 1e-2

    def test_zero_density_detected(self, neutral_solution):
        sol = neutral_solution
        rho0 = RadialFunction(sol.rho.grid, np.zeros_like(sol.rho.values))
        assert tf.tf_equation_residual_density(sol.params, rho0, 0.0) > 0.0


class TestPotential:
    def test_nuclear_limit(self, neutral_solution):
        pot = tf.tf_potential(neutral_solution)
        r = pot.grid[0]
        assert abs(r * pot(r) - neutral_solution.params.Z) < 1e-6

    def test_matches_screening_function(self, neutral_solution):
        sol = neutral_solution
        pot = tf.tf_potential(sol)
        r = pot.grid[::50]
        expected = (sol.params.Z / r) * sol.phi(r / sol.b)
        assert np.max(np.abs(pot(r) - expected) / np.abs(expected)) < 1e-8

    def test_dominated_by_bare_coulomb(self, ion_solution):
        pot = tf.tf_potential(ion_solution)
        Z = ion_solution.params.Z
        assert np.all(pot.values <= Z / pot.grid + 1e-12)

    def test_z_scaling_of_potential(self, neutral_solution):
        # V^{N,Z}(x) = Z^{4/3} V^{lam,1}(Z^{1/3} x)
        Z = 10.0
        solZ = tf.solve(tf.TFParams(lam=1.0, Z=Z))
        potZ = tf.tf_potential(solZ)
        pot1 = tf.tf_potential(neutral_solution)
        for x in (0.01, 0.1, 1.0):
            lhs = potZ(x)
            rhs = Z ** (4.0 / 3.0) * pot1(Z ** (1.0 / 3.0) * x)
            assert abs(lhs - rhs) < 1e-6 * abs(rhs)


class TestMuIdentity:
    def test_neutral(self, neutral_solution):
        assert tf.mu_times_mass_identity(neutral_solution) == 0.0

    def test_ion(self, ion_solution):
        sol = ion_solution
        bound = 1e-8 * (1.0 + sol.mu * sol.params.N)
        assert tf.mu_times_mass_identity(sol) <= bound

    def test_over_charged(self):
        sol = tf.solve(tf.TFParams(lam=1.5, Z=1.0))
        assert tf.mu_times_mass_identity(sol) == 0.0


class TestSerialization:
    def test_round_trip(self, ion_solution):
        text = tf.solution_to_json(ion_solution)
        restored = tf.solution_from_json(text)
        assert restored.params == ion_solution.params
        assert restored.slope0 == ion_solution.slope0
        assert restored.mu == ion_solution.mu
        assert restored.edge_radius == ion_solution.edge_radius
        assert np.array_equal(restored.phi.grid, ion_solution.phi.grid)
        assert np.max(np.abs(restored.phi.values - ion_solution.phi.values)) <= 1e-15
        assert np.max(np.abs(restored.rho.values - ion_solution.rho.values)) <= 1e-15 * np.max(
            ion_solution.rho.values
        )
        assert tf.tf_equation_residual(restored) <= 1e-6

    def test_round_trip_neutral_energy(self, neutral_solution):
        restored = tf.solution_from_json(tf.solution_to_json(neutral_solution))
        e0 = tf.tf_energy(neutral_solution)
        assert abs(tf.tf_energy(restored) - e0) < 1e-9 * abs(e0)

    def test_json_is_plain(self, neutral_solution):
        doc = json.loads(tf.solution_to_json(neutral_solution))
        assert set(doc) == {
            "params", "slope0", "mu", "edge_radius", "grid", "phi", "rho", "energy_terms",
        }
        assert doc["edge_radius"] is None  # neutral: infinity encodes as null


class TestMonotonicity:
    def test_ctf_nondecreasing_in_lambda(self):
        ctf = [
            -tf.tf_energy(tf.solve(tf.TFParams(lam=l, Z=1.0)))
            for l in (0.2, 0.4, 0.6, 0.8, 1.0)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(ctf, ctf[1:]))
