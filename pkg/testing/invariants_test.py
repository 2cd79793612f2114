"""
Tests for the invariant suite registry and a selection of its cheaper checks.
"""

import pytest

from harmonic.exceptions import DegeneracyError
from harmonic.invariants import CHECKS, CheckResult, run_suite

EXPECTED_CHECKS = {
    'fft_plancherel', 'reproducing_pairs', 'p2_poisson_identity', 'cone_factorization',
    'poisson_derivative_identity', 'riesz_poisson_decay', 'carleson_bmo_band',
    'hardy_equivalence_bands', 'discrete_equivalence_bands', 'adjoint_p2_symmetry',
    'determinism', 'quantum_torus_algebra', 'quantum_commutative_limit',
    'quantum_hardy_bands',
}


def test_registry_holds_every_check():
    assert set(CHECKS) == EXPECTED_CHECKS


@pytest.mark.parametrize('name', ['fft_plancherel', 'reproducing_pairs',
                                  'poisson_derivative_identity', 'quantum_torus_algebra'])
def test_fast_checks_pass(name):
    suite = run_suite([name], seed=3)
    result = suite.results[0]
    assert result.name == name
    assert result.passed, result.measured
    assert result.seconds >= 0


@pytest.mark.slow
@pytest.mark.parametrize('name', ['p2_poisson_identity', 'cone_factorization',
                                  'adjoint_p2_symmetry', 'determinism',
                                  'quantum_commutative_limit'])
def test_identity_checks_pass(name):
    assert run_suite([name]).passed


def test_unknown_names_are_rejected():
    with pytest.raises(KeyError):
        run_suite(['fft_plancherel', 'no_such_check'])


def test_library_errors_fail_the_check_without_stopping_the_suite(monkeypatch):
    def broken(seed):
        raise DegeneracyError("no witness")

    def fine(seed):
        return CheckResult('', True, {'seed': seed})

    monkeypatch.setitem(CHECKS, 'broken', broken)
    monkeypatch.setitem(CHECKS, 'fine', fine)
    suite = run_suite(['broken', 'fine'], seed=5)
    assert not suite.passed
    assert suite.failed == ['broken']
    assert suite.results[0].detail == 'DegeneracyError: no witness'
    assert suite.results[1].measured == {'seed': 5}
    payload = suite.to_dict()
    assert payload['seed'] == 5
    assert [r['name'] for r in payload['results']] == ['broken', 'fine']
