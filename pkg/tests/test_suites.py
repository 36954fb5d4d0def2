import pytest

from flatcore.services.suites import (comparison_suite, exponent_suite, gradient_suite, lemma_suite,
                                      run_suites)


def test_lemma_suite_passes():
    result = lemma_suite(seed=1, n_samples=20000)
    assert result.passed
    assert result.checks == 5


def test_lemma_suite_detects_perturbed_constant():
    result = lemma_suite(seed=1, n_samples=20000, lower_scale=1.01)
    assert not result.passed
    assert result.details[2.0]['failures']['ge'] > 0


def test_exponent_suite_passes():
    result = exponent_suite(seed=3)
    assert result.passed
    assert result.details['max_identity_error'] < 1e-12


def test_gradient_suite_passes():
    result = gradient_suite(seed=2, n_fields=2)
    assert result.passed
    assert result.checks == 6


def test_comparison_suite_on_small_grid():
    result = comparison_suite(seed=4, n_pairs=5, n=12)
    assert result.passed
    assert result.details['inconclusive'] == 0
    assert result.details['max_excess'] <= 1e-8


def test_run_suites_selects_by_name():
    results = run_suites(seed=0, names=['exponents'])
    assert [r.name for r in results] == ['exponents']
    assert results[0].to_dict() == {'suite': 'exponents', 'passed': True,
                                    'checks': results[0].checks, 'failures': 0}


@pytest.mark.slow
def test_all_suites_pass_with_defaults():
    assert all(result.passed for result in run_suites(seed=0))
