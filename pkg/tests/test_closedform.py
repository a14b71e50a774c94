"""Closed-form PDE coefficients, solvable small cases, and the operator
comparison that validates every formula at once."""

import numpy as np
import pytest

from bpl.closedform import (
    closedform_residual,
    compare_omega_closedform,
    delta_top_n0,
    elementary_symmetric,
    eval_q,
    eval_v,
    geometric_sum,
    geometric_sum_closed,
    pde_coefficients,
    potential_split,
    psi_branch,
    psi_value,
    special_solutions,
)
from bpl.config import SpectralConfig
from bpl.errors import CoincidentRapiditiesError
from bpl.functional import FnSampler, extract_fbar, lambda_bar_coefficients, spectrum
from bpl.omega import check_eigk, extract_omegas
from bpl.polyengine import MultiPoly

from conftest import draw_complex


class TestElementaryPieces:
    def test_geometric_sum_forms_agree(self, rng):
        for _ in range(20):
            q = draw_complex(rng)
            top = int(rng.integers(-3, 9))
            assert abs(geometric_sum(q, top) - geometric_sum_closed(q, top)) < 1e-12 * max(
                1, abs(geometric_sum(q, top))
            )

    def test_geometric_sum_vanishes_below_zero(self):
        assert geometric_sum(2.0 + 1.0j, -1) == 0.0
        assert geometric_sum(2.0 + 1.0j, -5) == 0.0

    def test_elementary_symmetric(self):
        vals = [2.0, 3.0, 5.0]
        assert elementary_symmetric(vals, 0) == 1.0
        assert elementary_symmetric(vals, 1) == pytest.approx(10.0)
        assert elementary_symmetric(vals, 2) == pytest.approx(31.0)
        assert elementary_symmetric(vals, 3) == pytest.approx(30.0)
        assert elementary_symmetric(vals, 4) == 0.0


class TestPsiTable:
    @pytest.mark.parametrize("L", [2, 3, 4, 5, 6])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_branches_partition_the_grid(self, n, L):
        for l in range(n):
            for d in range(L + 1):
                branch = psi_branch(l, d, n, L)
                threshold = L - (n + 1) + 2 * l
                if d > threshold:
                    assert branch == "above"
                elif d < threshold:
                    assert branch == "below"
                else:
                    assert branch == ("equal-large-L" if L >= 5 else "equal-small-L")

    def test_boundary_branch_split_is_exclusive(self):
        # at the threshold exactly one of the two L-dependent forms fires
        assert psi_branch(0, 0, 2, 3) == "equal-small-L"
        assert psi_branch(0, 3, 2, 6) == "equal-large-L"

    def test_single_variable_two_site_values(self):
        # hand-reduced values for n=1, L=2: psi(0,2) = q^2 (1+q),
        # psi(0,1) = 0 (empty sum), psi(0,0) = -(1+q)
        cfg = SpectralConfig.random_instance(2, 1, seed=3)
        q = cfg.q
        assert abs(psi_value(0, 2, cfg) - q**2 * (1 + q)) < 1e-13 * abs(q**2)
        assert psi_value(0, 1, cfg) == 0.0
        assert abs(psi_value(0, 0, cfg) + (1 + q)) < 1e-13 * abs(1 + q)


class TestPotential:
    def test_vacuum_sector_value(self):
        cfg = SpectralConfig.random_instance(4, 0, seed=5)
        v = eval_v(cfg, [])
        expect = delta_top_n0(cfg)
        assert abs(v - expect) < 1e-13 * abs(expect)

    def test_x_part_vanishes_at_unit_q(self, rng):
        # (q-1)^2 kills the x-dependent piece at q = 1
        ys = np.exp(2 * draw_complex(rng, 3))
        _, slope = potential_split(1.0 + 0.0j, ys, 1, 3)
        assert slope == 0.0

    def test_x_independent_for_two_by_two(self):
        # n=2, L=2 sits on the branch boundary where the geometric sum is
        # empty: the potential does not depend on the variables
        cfg = SpectralConfig.random_instance(2, 2, seed=7)
        coeffs = pde_coefficients(cfg)
        assert coeffs.v_slope == 0.0
        assert abs(eval_v(cfg, [0.3, 0.9]) - eval_v(cfg, [2.4, -1.1])) < 1e-14

    def test_affine_in_coordinate_sum(self, rng):
        cfg = SpectralConfig.random_instance(4, 2, seed=9)
        coeffs = pde_coefficients(cfg)
        xs = draw_complex(rng, 2)
        assert abs(eval_v(cfg, xs) - coeffs.potential(xs)) < 1e-13 * max(
            1, abs(coeffs.potential(xs))
        )


class TestDerivativeCoefficients:
    def test_pole_detection(self):
        cfg = SpectralConfig.random_instance(3, 2, seed=11)
        with pytest.raises(CoincidentRapiditiesError):
            eval_q(cfg, 0, [0.7, 0.7 + 1e-9])

    def test_two_by_two_ratio(self, rng):
        # for n=2, L=2 the two coefficients satisfy Q1/Q2 = -x1/x2
        cfg = SpectralConfig.random_instance(2, 2, seed=13)
        for _ in range(5):
            xs = draw_complex(rng, 2)
            ratio = eval_q(cfg, 0, xs) / eval_q(cfg, 1, xs)
            assert abs(ratio + xs[0] / xs[1]) < 1e-11 * abs(xs[0] / xs[1])

    def test_single_variable_ode_ratio(self, rng):
        # the ODE reconstructed from the extracted operator fixes the ratio
        # (Delta - V)/Q1, which the formulas must reproduce
        cfg = SpectralConfig.random_instance(2, 1, seed=17)
        family = extract_omegas(cfg)
        omega_top_m1 = family.omega(cfg.L - 1)
        report = check_eigk(cfg, family)
        rec = next(r for r in report.records if not r.vanishing)
        fbar = rec.fbar_fit.poly
        delta = rec.delta[cfg.L - 1]
        for _ in range(4):
            x = draw_complex(rng)
            lhs = fbar.coeffs[1]  # d fbar / dx for a degree-1 polynomial
            rhs = (delta - eval_v(cfg, [x])) / eval_q(cfg, 0, [x]) * fbar((x,))
            assert abs(lhs - rhs) < 1e-8 * max(abs(lhs), 1)


class TestClosedFormResidual:
    def test_vacuum_case(self):
        cfg = SpectralConfig.random_instance(3, 0, seed=19)
        sol = special_solutions("n0", cfg)
        assert closedform_residual(cfg, sol.eigenfunctions[0], sol.deltas[0]) < 1e-14

    def test_two_site_single_variable_both_signs(self):
        cfg = SpectralConfig.random_instance(2, 1, seed=23)
        sol = special_solutions("n1L2", cfg)
        assert len(sol.eigenfunctions) == 2
        for f, d in zip(sol.eigenfunctions, sol.deltas):
            assert closedform_residual(cfg, f, d) < 1e-12

    def test_two_site_two_variable(self):
        cfg = SpectralConfig.random_instance(2, 2, seed=29)
        sol = special_solutions("n2L2", cfg)
        (f,) = sol.eigenfunctions
        (d,) = sol.deltas
        assert closedform_residual(cfg, f, d) < 1e-12
        # the eigenvalue collapses to -(y1+y2)/(2 sqrt(y1 y2))
        ys = cfg.ys
        assert abs(d + (ys[0] + ys[1]) / (2 * cfg.sqrt_y_prod)) < 1e-13 * abs(d)


class TestSpecialSolutionStructure:
    def test_single_variable_solutions_are_linear(self):
        # the square-root-times-exponential form collapses to q x1 +- sqrt(y1 y2)
        cfg = SpectralConfig.random_instance(2, 1, seed=31)
        sol = special_solutions("n1L2", cfg)
        sq = cfg.sqrt_y_prod
        for f, sign in zip(sol.eigenfunctions, (+1, -1)):
            assert f.degree_bound == 1
            assert abs(f.coeffs[1] - cfg.q) < 1e-14
            assert abs(f.coeffs[0] - sign * sq) < 1e-14 * max(1, abs(sq))

    def test_single_variable_deltas(self):
        cfg = SpectralConfig.random_instance(2, 1, seed=37)
        q, ys, sq = cfg.q, cfg.ys, cfg.sqrt_y_prod
        base = -(1 + q**2) * (ys[0] + ys[1]) / (4 * q * sq)
        shift = (q**2 - 1) ** 2 / (4 * q**2)
        sol = special_solutions("n1L2", cfg)
        assert abs(sol.deltas[0] - (base - shift)) < 1e-13 * abs(base)
        assert abs(sol.deltas[1] - (base + shift)) < 1e-13 * abs(base)

    def test_two_variable_solution_is_bilinear_invariant(self):
        # kappa constant leaves the characteristic invariant:
        # q^2 (y1+y2)(x1+x2) - (1+q^2)(y1 y2 + q^2 x1 x2)
        cfg = SpectralConfig.random_instance(2, 2, seed=41)
        sol = special_solutions("n2L2", cfg)
        (f,) = sol.eigenfunctions
        q, ys = cfg.q, cfg.ys
        assert f.degree_bound == 1
        assert abs(f.coeffs[1, 0] - q**2 * (ys[0] + ys[1])) < 1e-12 * abs(q**2)
        assert abs(f.coeffs[1, 1] + (1 + q**2) * q**2) < 1e-12 * abs(q**2)

    def test_case_validation(self):
        cfg = SpectralConfig.random_instance(3, 1, seed=43)
        with pytest.raises(ValueError):
            special_solutions("n1L2", cfg)
        with pytest.raises(ValueError):
            special_solutions("bogus", cfg)

    def test_deltas_match_joint_spectrum(self):
        # printed eigenvalues coincide with the extracted operator's spectrum
        for case, n in (("n1L2", 1), ("n2L2", 2)):
            cfg = SpectralConfig.random_instance(2, n, seed=47 + n)
            family = extract_omegas(cfg)
            sol = special_solutions(case, cfg)
            joint = family.delta_table[:, cfg.L - 1]
            for d in sol.deltas:
                assert np.min(np.abs(joint - d)) < 1e-8 * max(1, abs(d))


class TestOperatorComparison:
    @pytest.mark.parametrize(
        "L,n", [(2, 1), (3, 1), (4, 1), (2, 2), (3, 2), (4, 2), (3, 3), (4, 3)]
    )
    def test_small_grid(self, L, n):
        cfg = SpectralConfig.random_instance(L, n, seed=1000 + 10 * L + n)
        assert compare_omega_closedform(cfg) < 1e-7

    @pytest.mark.parametrize("n", [1, 2])
    def test_longer_lattice_branch(self, n):
        # L = 5 exercises the large-L boundary branch of the psi table
        cfg = SpectralConfig.random_instance(5, n, seed=2000 + n)
        assert compare_omega_closedform(cfg) < 1e-7

    def test_eigenfunctions_satisfy_pde(self):
        cfg = SpectralConfig.random_instance(3, 2, seed=53)
        eigs = spectrum(cfg, cfg.n)
        lam_bars = lambda_bar_coefficients(eigs, cfg)
        checked = 0
        for eig, coeffs in zip(eigs, lam_bars):
            fit = extract_fbar(FnSampler(cfg, eig))
            if fit.poly.max_abs() < 1e-12:
                continue
            checked += 1
            assert closedform_residual(cfg, fit.poly, coeffs[cfg.L - 1]) < 1e-8
        assert checked > 0
