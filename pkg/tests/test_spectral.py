import math

import numpy as np
import pytest

from flatcore.errors import ConvergenceFailure, InvalidArgument
from flatcore.models.mesh import ScalarField
from flatcore.services.mesh import build_disk_mesh, build_rect_mesh
from flatcore.services.spectral import (eps_threshold, first_eigenpair, rayleigh_quotient,
                                        weighted_first_eigenvalue)

from .conftest import make_spec

BESSEL_J0_ZERO_SQUARED = 2.404825557695773 ** 2


def test_square_eigenvalue_p2():
    result = first_eigenpair(build_rect_mesh(1.0, 1.0, 32, 32), 2.0)
    assert result.lambda1 == pytest.approx(2 * math.pi ** 2, rel=0.02)
    assert result.residual < 1e-6
    assert result.z.max() == pytest.approx(1.0)
    assert result.z.min() >= 0.0


def test_disk_eigenvalue_p2(unit_disk):
    result = first_eigenpair(unit_disk, 2.0)
    assert result.lambda1 == pytest.approx(BESSEL_J0_ZERO_SQUARED, rel=0.02)


def test_eigenfunction_vanishes_on_boundary(unit_disk):
    z = first_eigenpair(unit_disk, 2.0).z
    assert np.all(z.values[unit_disk.boundary] == 0.0)
    assert z.values[0] == pytest.approx(1.0, abs=1e-2)


def test_eigenvalue_scales_under_dilation():
    mesh = build_rect_mesh(1.0, 1.0, 8, 8)
    small = first_eigenpair(mesh, 3.0).lambda1
    large = first_eigenpair(mesh.transformed(scale=2.0), 3.0).lambda1
    assert large == pytest.approx(small * 2.0 ** -3, rel=1e-3)


def test_minimizer_beats_linear_guess():
    mesh = build_rect_mesh(1.0, 1.0, 12, 12)
    linear = first_eigenpair(mesh, 2.0).z
    result = first_eigenpair(mesh, 1.5)
    assert result.lambda1 <= rayleigh_quotient(linear, 1.5) * (1 + 1e-8)


def test_weighted_eigenvalue_of_constant_weight(unit_square):
    plain = first_eigenpair(unit_square, 2.0).lambda1
    weighted = weighted_first_eigenvalue(unit_square, 2.0, np.full(unit_square.n_vertices, 4.0))
    assert weighted == pytest.approx(plain / 4.0, rel=1e-8)
    with pytest.raises(InvalidArgument):
        weighted_first_eigenvalue(unit_square, 2.0, np.zeros(unit_square.n_vertices))


def test_eps_threshold():
    assert eps_threshold(3.0, 2.0, 10.0) == math.inf
    assert eps_threshold(2.0, 2.0, 20.0) == pytest.approx(0.05)
    with pytest.raises(InvalidArgument):
        eps_threshold(2.0, 3.0, 1.0)


def test_eigen_solve_raises_when_minimization_stops_early():
    mesh = build_rect_mesh(1.0, 1.0, 32, 32)
    with pytest.raises(ConvergenceFailure) as info:
        first_eigenpair(mesh, 3.0, max_iter=2)
    assert info.value.exit_code == 4
    assert info.value.report.rayleigh_history
    assert isinstance(info.value.last_iterate, ScalarField)


def test_eigenvalue_decreases_on_larger_rectangle():
    half = first_eigenpair(build_rect_mesh(0.5, 1.0, 16, 32), 2.0).lambda1
    full = first_eigenpair(build_rect_mesh(1.0, 1.0, 32, 32), 2.0).lambda1
    assert half >= full
    assert half == pytest.approx(math.pi ** 2 * (4.0 + 1.0), rel=0.03)


def test_weighted_eigenvalue_is_bracketed_by_extreme_weights(unit_square):
    spec = make_spec(unit_square, theta=0.5)
    weight = spec.f(spec.a.values)
    plain = first_eigenpair(unit_square, 2.0).lambda1
    weighted = weighted_first_eigenvalue(unit_square, 2.0, weight)
    assert plain / weight.max() <= weighted <= plain / weight.min()
    assert weight.max() == pytest.approx(math.sqrt(1.1))


@pytest.mark.slow
def test_square_eigenvalue_on_fine_mesh():
    result = first_eigenpair(build_rect_mesh(1.0, 1.0, 128, 128), 2.0)
    assert result.lambda1 == pytest.approx(2 * math.pi ** 2, rel=0.01)


@pytest.mark.slow
def test_disk_eigenvalue_on_fine_mesh():
    result = first_eigenpair(build_disk_mesh(32, 128), 2.0)
    assert result.lambda1 == pytest.approx(BESSEL_J0_ZERO_SQUARED, rel=0.02)
