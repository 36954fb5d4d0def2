import numpy as np
import pytest

from flatcore.errors import ConvergenceFailure, InvalidArgument, InvalidConfiguration, NoSolutionRegime
from flatcore.models.mesh import ScalarField
from flatcore.models.problem import Nonlinearity
from flatcore.models.solve import SolveConfig
from flatcore.services.mesh import build_disk_mesh, build_rect_mesh
from flatcore.services.plap_core import LUMPED
from flatcore.services.solver import (build_eigen_subsolution, check_sandwich, check_subsolution,
                                      check_supersolution, check_threshold, comparison_check,
                                      fit_sandwich_K, local_comparison, picard_shift, solve_main)
from flatcore.services.spectral import first_eigenpair

from .conftest import make_spec


@pytest.fixture(scope='module')
def coarse_solution():
    spec = make_spec(build_rect_mesh(1.0, 1.0, 16, 16), theta=1.5, eps=1e-2)
    u, report = solve_main(spec)
    return spec, u, report


def test_stages_for_smooth_and_singular_reaction():
    cfg = SolveConfig()
    assert cfg.stages(1.5, 2.0) == [(0.0, 1e-8)]
    sigmas = [sigma for sigma, _ in cfg.stages(0.5, 2.0)]
    assert sigmas[0] == 1e-2
    assert sigmas[-1] == pytest.approx(1e-12)
    assert all(s1 < s0 for s0, s1 in zip(sigmas, sigmas[1:]))
    assert [sigma for sigma, _ in cfg.stages(0.5, 1.5, floor=1e-13)][-1] == 1e-13
    assert SolveConfig(continuation=False).stages(0.5, 2.0) == [(1e-6, 1e-8)]


def test_coincidence_tolerance():
    assert SolveConfig().coincidence_tolerance(1.1) == pytest.approx(1.1e-6)
    assert SolveConfig(newton_tol=1e-6).coincidence_tolerance(1.0) == pytest.approx(1e-5)


def test_schedule_must_decrease():
    with pytest.raises(ValueError):
        SolveConfig(schedule=[(1e-4, 1e-8), (1e-2, 1e-8)])


def test_threshold_refuses_large_eps(unit_square):
    spec = make_spec(unit_square, eps=1.0)
    with pytest.raises(NoSolutionRegime) as info:
        check_threshold(spec)
    assert info.value.exit_code == 3
    assert 0.03 < info.value.eps_a < 0.07
    # cached for the next cell
    assert spec.eps_a == info.value.eps_a


def test_threshold_is_infinite_for_p_above_q(unit_square):
    spec = make_spec(unit_square, p=3.0, q=2.0, eps=10.0)
    assert check_threshold(spec) == np.inf


def test_solve_main_stays_between_zero_and_a(coarse_solution):
    spec, u, report = coarse_solution
    assert report.converged
    assert report.residual <= 1e-5
    assert u.min() >= 0.0
    assert np.all(u.values <= spec.a.values + 1e-12)
    assert np.all(u.values[spec.mesh.boundary] == 0.0)
    assert report.tau_c == pytest.approx(1.1e-6)
    assert report.monotonicity_violations == 0


def test_solution_passes_both_certificates(coarse_solution):
    spec, u, _ = coarse_solution
    assert check_supersolution(u, spec, tol=1e-5).passed
    assert check_subsolution(u, spec, tol=1e-5).passed


def test_coefficient_is_supersolution_and_zero_is_subsolution(unit_square):
    spec = make_spec(unit_square)
    assert check_supersolution(spec.a, spec).passed
    assert check_subsolution(ScalarField.constant(unit_square, 0.0), spec).passed
    report = check_subsolution(spec.a, spec)
    assert not report.passed
    assert not report.boundary_ok


def test_solve_main_reports_partial_iterate(unit_square):
    spec = make_spec(unit_square, theta=1.5, eps=1e-2)
    with pytest.raises(ConvergenceFailure) as info:
        solve_main(spec, SolveConfig(max_iter=1))
    assert info.value.exit_code == 4
    assert isinstance(info.value.last_iterate, ScalarField)
    assert info.value.report.kind == 'main'


def test_comparison_check_orders_shifted_fields(unit_square, rng):
    spec = make_spec(unit_square)
    v = ScalarField(unit_square, rng.uniform(0.2, 0.4, unit_square.n_vertices))
    u = v.with_values(v.values - 0.1)

    def g(s):
        return s

    report = comparison_check(u, v, g, spec.a, 1e-2, quadrature=LUMPED)
    assert report.holds is True
    assert report.certified
    assert report.max_excess == pytest.approx(-0.1)


def test_comparison_check_is_inconclusive_without_boundary_order(unit_square, rng):
    spec = make_spec(unit_square)
    v = ScalarField(unit_square, rng.uniform(0.2, 0.4, unit_square.n_vertices))
    u = v.with_values(v.values + 0.05)
    report = comparison_check(u, v, lambda s: s, spec.a, 1e-2, quadrature=LUMPED)
    assert report.inconclusive
    assert not report.boundary_ok
    assert report.reason == 'boundary ordering fails'


def test_comparison_check_rejects_mixed_meshes(unit_square, unit_disk):
    spec = make_spec(unit_square)
    with pytest.raises(InvalidArgument):
        comparison_check(ScalarField.constant(unit_disk, 0.0), spec.a, lambda s: s, spec.a, 1e-2)


def test_sandwich_of_coefficient(unit_square):
    spec = make_spec(unit_square)
    report = check_sandwich(spec.a, spec.a, 0.1, 2.0, 1e-2, 2.0)
    assert report.passed
    assert report.kappa == pytest.approx(0.2)
    assert fit_sandwich_K(spec.a, spec.a, 0.1, 1e-2, 2.0) == 0.0


def test_eigen_subsolution_rejects_small_K(unit_square):
    spec = make_spec(unit_square)
    eigenpair = first_eigenpair(build_disk_mesh(8, 6), 2.0)
    with pytest.raises(InvalidArgument, match='K\\^p'):
        build_eigen_subsolution(spec, (0.5, 0.5), 1.0, 0.05, eigenpair)
    with pytest.raises(InvalidArgument, match='not contained'):
        build_eigen_subsolution(spec, (0.1, 0.5), 9.5, 0.05, eigenpair)


@pytest.mark.slow
def test_eigen_subsolution_is_subsolution(fine_square):
    spec = make_spec(fine_square, theta=0.5, eps=1e-3)
    eigenpair = first_eigenpair(build_disk_mesh(24, 6), 2.0)
    v = build_eigen_subsolution(spec, (0.5, 0.5), 9.5, 0.05, eigenpair)
    assert v.max() == pytest.approx(spec.a_at((0.5, 0.5)) - 0.05)
    report = check_subsolution(v, spec)
    assert report.passed


@pytest.mark.slow
def test_local_comparison_holds_inside_flat_core(fine_square):
    spec = make_spec(fine_square, theta=0.5, eps=1e-2)
    u, _ = solve_main(spec)
    report = local_comparison(u, spec, (0.5, 0.5), 0.1)
    assert report.certified
    assert report.holds is True


def test_picard_shift_is_local_decreasing_slope():
    f = Nonlinearity(theta=0.5)
    shift = picard_shift(np.array([0.0, 0.5, 0.99]), np.ones(3), 2.0, f, 1e-12)
    # growth dominates away from the coefficient
    assert shift[0] == 0.0
    assert shift[1] == 0.0
    assert shift[2] == pytest.approx(0.99 * 0.5 * 0.01 ** -0.5 - 0.01 ** 0.5, rel=1e-9)
    smooth = picard_shift(np.array([0.9]), np.ones(1), 2.0, Nonlinearity(theta=1.5), 0.0)
    assert smooth[0] == pytest.approx(0.9 * 1.5 * 0.1 ** 0.5 - 0.1 ** 1.5)
    with pytest.raises(InvalidConfiguration):
        picard_shift(np.ones(1), np.ones(1), 2.0, f, 0.0)


def test_solve_main_iterates_never_increase(unit_square):
    spec = make_spec(unit_square, theta=0.5, eps=1e-2)
    u, report = solve_main(spec)
    assert report.converged
    assert report.monotonicity_violations == 0
    assert report.iterations > 0
    assert len(report.stages) == 1
    assert report.stages[0]['sigma'] <= 1e-12
    assert u.min() >= 0.0
    assert np.all(u.values <= spec.a.values)


def test_solve_main_rejects_increasing_iterates(unit_square):
    spec = make_spec(unit_square, theta=0.5, eps=1e-2)
    with pytest.raises(ConvergenceFailure) as info:
        solve_main(spec, SolveConfig(shift=1.0))
    assert info.value.report.monotonicity_violations > 0
    assert 'increased' in str(info.value)


@pytest.mark.slow
def test_solution_is_sandwiched_away_from_the_boundary(fine_square):
    spec = make_spec(fine_square, theta=0.5, eps=1e-3)
    u, _ = solve_main(spec)
    report = check_sandwich(u, spec.a, 0.05, 10.0, spec.eps, spec.exponents.p)
    assert report.passed
    assert report.n_checked > 0
    assert fit_sandwich_K(u, spec.a, 0.05, spec.eps, spec.exponents.p) <= 10.0
