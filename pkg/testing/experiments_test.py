"""
Tests for corpus generation and the norm-equivalence experiment runner.
"""

import math

import numpy as np
import pytest

from harmonic import experiments
from harmonic.exceptions import ConfigurationError, InvariantViolation
from harmonic.experiments import (DEFAULT_METHOD_PAIRS, EXPERIMENT_KINDS, EquivalenceReport,
                                  ExperimentConfig, commutative_counterpart, gen_corpus,
                                  random_band_field, ratio_of, run_experiment,
                                  transferred_corpus)
from harmonic.opfield import GridSpec, fft_transform


def small_config(**overrides):
    options = dict(kind='hardy_equiv', seed=7, d=1, N=16, n=2, band_m=4, corpus_size=4,
                   scales=48, p_list=[1, 2, 'inf'])
    options.update(overrides)
    return ExperimentConfig(**options)


class TestConfig:

    def test_exponents_are_parsed(self):
        cfg = small_config(p_list=['1.5', 2, 'inf'])
        assert cfg.p_list == [1.5, 2.0, math.inf]
        assert cfg.to_dict()['p_list'] == ['1.5', '2.0', 'inf']

    def test_dict_round_trip(self):
        cfg = small_config(methods=[['phi_radial', 'poisson_radial']])
        again = ExperimentConfig(**cfg.to_dict())
        assert again == cfg
        assert again.method_pairs == [('phi_radial', 'poisson_radial')]

    def test_default_pairs_exist_for_every_kind(self):
        assert set(DEFAULT_METHOD_PAIRS) == set(EXPERIMENT_KINDS)
        assert small_config().method_pairs == DEFAULT_METHOD_PAIRS['hardy_equiv']

    @pytest.mark.parametrize('overrides', [
        {'kind': 'spectral'},
        {'corpus_size': 0},
        {'band_m': 8},
        {'band_m': -1},
        {'threads': 0},
        {'p_list': ['two']},
        {'p_list': [0.5, 2]},
        {'N': 12, 'band_m': 2},
        {'d': 4},
        {'symbol': 'heat'},
        {'discrete_symbol': 'riesz_poisson(-2)'},
        {'methods': [('carleson', 'bmo')]},
        {'methods': [('phi_radial', 'poisson_radial', 'poisson_conic')]},
        {'kind': 'qt_hardy', 'd': 1},
        {'kind': 'qt_hardy', 'd': 2, 'theta': 'one third'},
        {'kind': 'qt_hardy', 'd': 2, 'theta': '1/0'},
        {'kind': 'qt_hardy', 'd': 2, 'theta': 0.1234567891},
    ])
    def test_invalid_configurations(self, overrides):
        with pytest.raises(ConfigurationError):
            small_config(**overrides)


class TestCorpus:

    def test_corpus_is_deterministic(self):
        first, second = gen_corpus(small_config()), gen_corpus(small_config())
        assert all(np.array_equal(a.values, b.values) for a, b in zip(first, second))
        other = gen_corpus(small_config(seed=8))
        assert not np.array_equal(first[2].values, other[2].values)

    def test_fields_are_band_limited_and_zero_mean(self):
        for f in gen_corpus(small_config(corpus_size=6)):
            spectrum = fft_transform(f, 'forward')
            assert spectrum.band_m <= 4
            assert np.allclose(spectrum.zero_mode(), 0, atol=1e-14)

    def test_exemplars_lead_the_corpus(self):
        lacunary, single = gen_corpus(small_config())[:2]
        modes = {m for m in range(-8, 8)
                 if np.abs(fft_transform(lacunary, 'forward').coefficient((m,))).max() > 1e-12}
        assert modes == {2, 4}
        spectrum = fft_transform(single, 'forward')
        assert spectrum.band_m == 1
        assert np.abs(spectrum.coefficient((-1,))).max() < 1e-12

    def test_without_a_band_there_are_only_constants(self):
        corpus = gen_corpus(small_config(band_m=0, zero_mean=False))
        assert len(corpus) == 4
        for f in corpus:
            assert np.allclose(f.values, f.values[0])

    def test_transformations(self):
        base = gen_corpus(small_config())
        scaled = gen_corpus(small_config(scale=2.5))
        assert np.allclose(scaled[3].values, 2.5 * base[3].values)
        hermitian = gen_corpus(small_config(hermitian=True))
        assert all(f.hermitian for f in hermitian)
        adjoint = gen_corpus(small_config(adjoint=True))
        assert np.allclose(adjoint[3].values, base[3].adjoint().values)

    def test_quantum_corpus_shares_scalar_coefficients(self):
        cfg = small_config(kind='qt_hardy', d=2, N=16, band_m=3, theta='0')
        fields = transferred_corpus(cfg)
        scalar = gen_corpus(commutative_counterpart(cfg))
        for x, f in zip(fields, scalar):
            assert np.allclose(x.values, f.values, atol=1e-14)

    def test_coefficient_power_matches_the_gaussian_model(self):
        cfg = small_config(N=32, n=3, band_m=6, corpus_size=10)
        band = [m for m in range(-6, 7) if m]
        powers = []
        for f in gen_corpus(cfg)[2:]:
            spectrum = fft_transform(f, 'forward')
            for m in band:
                powers.extend(np.abs(spectrum.coefficient((m,))).ravel() ** 2)
        # |z|^2 of a standard complex Gaussian is Exp(1): mean 1, variance 1
        assert len(powers) == 8 * 12 * 9
        assert abs(np.mean(powers) - 1.0) <= 3 / math.sqrt(len(powers))

    def test_random_band_field(self, rng, grid_2d):
        f = random_band_field(rng, grid_2d, 3, 2, zero_mean=False)
        assert f.n == 3
        assert fft_transform(f, 'forward').band_m == 2


class TestRunExperiment:

    def test_rows_and_summary(self):
        cfg = small_config()
        report = run_experiment(cfg)
        pairs = DEFAULT_METHOD_PAIRS['hardy_equiv']
        assert len(report.rows) == cfg.corpus_size * len(cfg.p_list) * len(pairs)
        assert report.rows[0]['field_id'] == 0
        assert report.rows[-1]['field_id'] == cfg.corpus_size - 1
        assert len(report.summary) == len(cfg.p_list) * len(pairs)
        for entry in report.summary:
            ratios = [row['ratio'] for row in report.rows
                      if (row['p'], row['method_a'], row['method_b']) ==
                      (entry['p'], entry['method_a'], entry['method_b'])]
            assert entry['count'] == cfg.corpus_size
            assert entry['min'] == min(ratios)
            assert entry['geometric_mean'] == pytest.approx(math.exp(np.mean(np.log(ratios))))
            assert 0 < entry['min'] <= entry['geometric_mean'] <= entry['max'] < math.inf

    def test_summary_geometric_mean(self):
        rows = [{'p': p, 'method_a': 'phi_radial', 'method_b': 'poisson_radial', 'ratio': r}
                for p, r in (('2.0', 2.0), ('2.0', 8.0), ('inf', 3.0))]
        summary = EquivalenceReport('hardy_equiv', {}, rows).summarize()
        by_p = {entry['p']: entry for entry in summary}
        assert by_p['2.0']['geometric_mean'] == pytest.approx(4.0)
        assert by_p['2.0']['log_band'] == pytest.approx(math.log(4.0))
        assert by_p['inf']['count'] == 1
        assert by_p['inf']['geometric_mean'] == pytest.approx(3.0)

    def test_runs_are_reproducible_across_thread_counts(self):
        cfg = small_config(methods=[('phi_radial', 'poisson_radial')])
        serial = run_experiment(cfg).rows
        assert run_experiment(cfg).rows == serial
        assert run_experiment(small_config(methods=cfg.methods, threads=3)).rows == serial

    def test_constants_give_unit_ratios(self):
        report = run_experiment(small_config(band_m=0, zero_mean=False))
        assert all(row['ratio'] == pytest.approx(1.0) for row in report.rows)

    def test_ratios_are_scale_invariant(self):
        methods = [('poisson_conic', 'poisson_radial')]
        base = run_experiment(small_config(methods=methods)).rows
        scaled = run_experiment(small_config(methods=methods, scale=3.0)).rows
        for a, b in zip(base, scaled):
            assert b['norm_a'] == pytest.approx(3 * a['norm_a'], rel=1e-10)
            assert b['ratio'] == pytest.approx(a['ratio'], rel=1e-10)

    def test_adjoint_and_original_agree_at_p2_for_hermitian_corpora(self):
        methods = [('phi_radial', 'poisson_radial')]
        plain = run_experiment(small_config(methods=methods, hermitian=True, p_list=[2]))
        flipped = run_experiment(small_config(methods=methods, hermitian=True, p_list=[2],
                                              adjoint=True))
        for a, b in zip(plain.rows, flipped.rows):
            assert b['ratio'] == pytest.approx(a['ratio'], rel=1e-10)

    def test_discrete_kind(self):
        report = run_experiment(small_config(kind='hardy_equiv_discrete', p_list=[2]))
        assert {row['method_a'] for row in report.rows} == {'phi_radial_discrete',
                                                            'phi_conic_discrete'}

    def test_bmo_kind(self):
        report = run_experiment(small_config(kind='bmo_poisson', corpus_size=3))
        assert {row['p'] for row in report.rows} == {'inf'}
        assert len(report.rows) == 3

    @pytest.mark.slow
    def test_carleson_kind(self):
        report = run_experiment(small_config(kind='carleson', corpus_size=3))
        assert len(report.rows) == 6
        assert all(0 < row['ratio'] < math.inf for row in report.rows)

    @pytest.mark.slow
    def test_radial_conic_kind_notes_the_domination_constant(self):
        report = run_experiment(small_config(kind='radial_conic', corpus_size=3, p_list=[2]))
        assert math.isfinite(report.notes['max_domination_constant'])

    def test_quantum_kind_reduces_to_the_commutative_run(self):
        cfg = small_config(kind='qt_hardy', d=2, N=16, band_m=3, theta='0', p_list=[1, 2])
        quantum = run_experiment(cfg)
        scalar = run_experiment(commutative_counterpart(cfg))
        assert quantum.notes['representation_size'] == 1
        for a, b in zip(quantum.rows, scalar.rows):
            assert a['ratio'] == pytest.approx(b['ratio'], rel=1e-8)

    def test_quantum_kind_with_rational_theta(self):
        cfg = small_config(kind='qt_hardy', d=2, N=16, band_m=3, theta='1/3', corpus_size=3)
        report = run_experiment(cfg)
        assert report.notes['representation_size'] == 3
        assert len(report.rows) == 3 * 3 * 2


class TestRatios:

    def test_ratio_of(self):
        assert ratio_of(0.0, 0.0) == 1.0
        assert ratio_of(3.0, 1.5) == 2.0
        assert ratio_of(1.0, 0.0) == math.inf

    def test_degenerate_ratios_raise(self):
        cfg = small_config(methods=[('phi_radial', 'poisson_radial')])
        with pytest.raises(InvariantViolation):
            experiments._pair_rows(cfg, 0, 2.0, {'phi_radial': 1.0, 'poisson_radial': 0.0})
        with pytest.raises(InvariantViolation):
            experiments._pair_rows(cfg, 0, 2.0, {'phi_radial': math.nan, 'poisson_radial': 1.0})

    def test_p2_identity_is_enforced(self):
        experiments._check_p2_identity(0, 0.5, 1.0)
        with pytest.raises(InvariantViolation):
            experiments._check_p2_identity(0, 0.52, 1.0)
