import numpy as np
import pytest
from pydantic import ValidationError

from flatcore.errors import InvalidArgument
from flatcore.models.problem import Oracle1DSpec, ProblemParams
from flatcore.models.solve import SolveConfig
from flatcore.services.oned_oracle import (cross_check_2d, layer_sweep_1d, layer_width_1d,
                                           richardson_gap, solve_1d)


def test_oracle_spec_validation():
    with pytest.raises(ValidationError):
        Oracle1DSpec(n=100)
    with pytest.raises(ValidationError):
        Oracle1DSpec(p=2.0, q=3.0)
    with pytest.raises(InvalidArgument):
        Oracle1DSpec.from_params(ProblemParams(slope=(0.1, 0.2)))
    spec = Oracle1DSpec.from_params(ProblemParams(eps=1e-2), length=2.0)
    assert spec.length == 2.0
    assert spec.eps == 1e-2


def test_layer_width_1d():
    x = np.linspace(0.0, 1.0, 11)
    a = np.ones(11)
    u = np.where((x > 0.25) & (x < 0.75), 1.0, 0.5)
    assert layer_width_1d(u, a, x, 1e-6) == pytest.approx(0.2)
    assert layer_width_1d(a, a, x, 1e-6) == 0.0


def test_flat_core_for_sublinear_reaction():
    result = solve_1d(Oracle1DSpec(theta=0.5, eps=1e-3))
    assert result.report.converged
    left, right = result.flat_core
    assert 0.0 < left < right < 1.0
    assert result.n_components == 1
    assert np.all(result.u <= result.a + 1e-12)
    assert result.u[0] == result.u[-1] == 0.0


def test_no_flat_core_for_superlinear_reaction():
    result = solve_1d(Oracle1DSpec(theta=1.5, eps=1e-3))
    assert result.flat_core is None
    assert result.gap[1:-1].min() > result.tau_c


def test_richardson_gap():
    assert richardson_gap(Oracle1DSpec(theta=1.5, eps=1e-2), SolveConfig(residual_tol=1e-8)) <= 1e-6


def test_cross_check_rejects_narrow_strips():
    with pytest.raises(InvalidArgument):
        cross_check_2d(0.5)


@pytest.mark.slow
def test_flat_core_fills_interval_at_small_eps():
    result = solve_1d(Oracle1DSpec(theta=0.5, eps=1e-6))
    left, right = result.flat_core
    assert right - left >= 0.8


@pytest.mark.slow
@pytest.mark.parametrize('p', [1.5, 2.0, 3.0])
def test_layer_sweep_follows_power_law(p):
    spec = Oracle1DSpec(theta=0.5, p=p, q=min(2.0, p))
    samples, fit = layer_sweep_1d(spec, [1e-3, 3e-4, 1e-4, 3e-5, 1e-5])
    assert len(samples) == 5
    assert fit.slope == pytest.approx(1.0 / p, abs=0.05)


@pytest.mark.slow
def test_cross_check_on_long_strip():
    report = cross_check_2d(10.0, ProblemParams(theta=1.5, eps=1e-2), nx=64)
    assert report.max_deviation <= 5e-3
    assert not report.core_1d
    assert not report.core_2d


@pytest.mark.slow
def test_cross_check_core_agreement():
    report = cross_check_2d(10.0, ProblemParams(theta=0.5, eps=1e-3), nx=64)
    assert report.core_1d and report.core_2d
    assert report.core_agreement >= 0.9
