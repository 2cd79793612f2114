"""
Tests for radial, conic and dyadic square functions, the tent projection and the
derivative and domination checks built on them.
"""

import math

import numpy as np
import pytest

from harmonic.exceptions import BandError, ConditioningError, DomainError, ShapeError
from harmonic.opfield import (GridSpec, OperatorField, is_hermitian, lp_field_norm,
                              schatten_norm)
from harmonic.square_functions import (HARDY_METHODS, ConeSpec, ScaleField, TentField,
                                       convolve_scales, fd_weights, hardy_norm,
                                       poisson_deriv_identity_check,
                                       radial_conic_domination_check, row_hardy_norm,
                                       scale_field_l2_norm, square_fn, square_function,
                                       square_sum, tent_embed, tent_l2_norm, tent_project,
                                       tent_square_fn, truncated_conic, unit_ball_volume)
from harmonic.square_functions import _cached_ball_kernel_hat, ball_sum
from harmonic.testfn import DyadicLevels, RadialSymbol, ScaleGrid

D_POISSON = RadialSymbol('d_poisson')


@pytest.fixture
def field_1d(grid_1d, random_field):
    return random_field(grid_1d, n=2, band=6)


class TestPoissonSquareFunction:

    def test_p2_norm_is_half_the_field_norm(self, grid_1d, grid_2d, random_field):
        for grid in (grid_1d, grid_2d):
            f = random_field(grid, n=3)
            s = square_function(f, 'poisson_radial')
            assert lp_field_norm(s, 2) == pytest.approx(0.5 * lp_field_norm(f, 2), rel=1e-3)

    def test_output_is_positive_semidefinite(self, field_1d):
        s = square_function(field_1d, 'poisson_radial')
        assert is_hermitian(s.values)
        assert np.min(np.linalg.eigvalsh(s.values)) > -1e-10

    def test_constant_field_has_zero_square_function(self, grid_2d, random_matrix):
        a = random_matrix(2)
        f = OperatorField.constant(grid_2d, a)
        assert np.max(np.abs(square_function(f, 'poisson_radial').values)) < 1e-12
        for p in (1, 2, math.inf):
            assert hardy_norm(f, p, 'poisson_radial') == pytest.approx(schatten_norm(a, p))

    def test_unitary_conjugation_and_scaling(self, field_1d, random_matrix):
        q, _ = np.linalg.qr(random_matrix(2))
        base = square_function(field_1d, 'poisson_radial')
        rotated = square_function(field_1d.conjugated(q), 'poisson_radial')
        assert np.allclose(rotated.values, q @ base.values @ np.conj(q.T), atol=1e-10)
        scaled = square_function(field_1d.scaled(-2.5j), 'poisson_radial')
        assert np.allclose(scaled.values, 2.5 * base.values, atol=1e-10)

    def test_translation_equivariance(self, grid_2d, random_field):
        f = random_field(grid_2d)
        s = square_function(f, 'poisson_radial').values
        moved = square_function(f.translated((3, -5)), 'poisson_radial').values
        assert np.allclose(moved, np.roll(s, (3, -5), axis=(0, 1)), atol=1e-10)

    def test_band_limit_is_enforced(self, grid_1d):
        f = OperatorField.from_modes(grid_1d, {(16,): np.eye(2)})
        with pytest.raises(BandError):
            square_function(f, 'poisson_radial')


class TestMethods:

    @pytest.mark.parametrize('method', HARDY_METHODS)
    def test_every_method_gives_a_finite_norm(self, method, grid_1d, random_field):
        f = random_field(grid_1d, band=5)
        value = hardy_norm(f, 2, method)
        assert math.isfinite(value)
        assert value > 0

    def test_row_norm_is_column_norm_of_adjoint(self, field_1d):
        assert row_hardy_norm(field_1d, 1.5, 'phi_radial') == \
            pytest.approx(hardy_norm(field_1d.adjoint(), 1.5, 'phi_radial'))

    def test_row_and_column_agree_for_hermitian_fields(self, field_1d):
        h = OperatorField(field_1d.grid, field_1d.values + field_1d.adjoint().values,
                          hermitian=True)
        assert row_hardy_norm(h, 3, 'poisson_radial') == \
            pytest.approx(hardy_norm(h, 3, 'poisson_radial'), rel=1e-12)

    def test_conic_energy_is_ball_volume_times_radial_energy(self, grid_2d, random_field):
        f = random_field(grid_2d)
        sgrid = ScaleGrid(1e-3, 1.0, 48)
        for aperture in (1, 2):
            cone = ConeSpec(aperture=aperture)
            radial = square_function(f, 'phi_radial', symbol=D_POISSON, sgrid=sgrid)
            conic = square_function(f, 'phi_conic', symbol=D_POISSON, sgrid=sgrid, cone=cone)
            expected = unit_ball_volume(2) * aperture ** 2 * lp_field_norm(radial, 2) ** 2
            assert lp_field_norm(conic, 2) ** 2 == pytest.approx(expected, rel=1e-9)

    def test_dyadic_family_uses_dyadic_kinds(self, field_1d):
        sf = convolve_scales(field_1d, RadialSymbol('annulus_bump'), DyadicLevels.for_grid(32))
        with pytest.raises(DomainError):
            square_sum(sf, 'radial')
        assert np.all(np.isfinite(square_fn(sf, 'radial_discrete').values))

    def test_rejections(self, field_1d):
        with pytest.raises(DomainError):
            square_function(field_1d, 'heat_radial')
        with pytest.raises(DomainError):
            hardy_norm(field_1d, 0.5, 'poisson_radial')
        with pytest.raises(DomainError):
            square_function(field_1d, 'phi_conic', cone=ConeSpec(eps_max=16.0))
        with pytest.raises(DomainError):
            ConeSpec(aperture=3)
        with pytest.raises(DomainError):
            ConeSpec(rule='simpson')


class TestScaleField:

    def test_lazy_and_materialized_agree(self, field_1d):
        sgrid = ScaleGrid(0.01, 1.0, 5)
        sf = convolve_scales(field_1d, D_POISSON, sgrid)
        explicit = ScaleField.from_values(sf.grid, sf.nodes, sf.weights, sf.materialize())
        assert np.allclose(square_sum(sf, 'radial'), square_sum(explicit, 'radial'))

    def test_single_mode_scale_values(self, grid_1d):
        f = OperatorField.from_modes(grid_1d, {(3,): np.eye(2)})
        sf = convolve_scales(f, D_POISSON, ScaleGrid(0.05, 0.1, 2))
        expected = D_POISSON(0.05 * 3) * f.values
        assert np.allclose(sf.at_scale(0), expected)

    def test_shape_validation(self, grid_1d):
        with pytest.raises(ShapeError):
            ScaleField(grid_1d, 2, [0.1, 0.2], [1.0])
        with pytest.raises(ShapeError):
            ScaleField(grid_1d, 2, [0.1], [1.0])
        with pytest.raises(ShapeError):
            ScaleField.from_values(grid_1d, [0.1, 0.2], [1.0, 1.0], np.zeros((2, 16, 2, 2)))


class TestTentSpace:

    @pytest.fixture
    def scale_field(self, grid_1d, random_field):
        f = random_field(grid_1d, band=4)
        return convolve_scales(f, D_POISSON, ScaleGrid(0.02, 0.25, 6))

    def test_projection_inverts_embedding(self, scale_field):
        back = tent_project(tent_embed(scale_field))
        assert np.allclose(back.materialize(), scale_field.materialize(), atol=1e-12)

    def test_embedding_is_isometric(self, scale_field):
        assert tent_l2_norm(tent_embed(scale_field)) == \
            pytest.approx(scale_field_l2_norm(scale_field), rel=1e-12)

    def test_projection_is_a_contraction(self, scale_field, rng):
        tent = TentField.sampled(
            scale_field,
            lambda u, k: rng.standard_normal(scale_field.grid.shape + (2, 2)) + 0j)
        assert scale_field_l2_norm(tent_project(tent)) <= tent_l2_norm(tent) * (1 + 1e-12)

    def test_tent_square_function_of_embedding(self, scale_field):
        cone = ConeSpec(eps_max=0.25)
        direct = square_fn(scale_field, 'conic', cone)
        assert np.allclose(tent_square_fn(tent_project(tent_embed(scale_field)), cone).values,
                           direct.values, atol=1e-10)

    def test_slices_are_validated(self, grid_1d):
        with pytest.raises(ShapeError):
            TentField(grid_1d, [0.1], [1.0], [np.zeros((3, 1))], [np.zeros((2, 32, 2, 2))])


class TestTruncatedProfiles:

    @pytest.fixture
    def scale_field(self):
        grid = GridSpec(1, 16)
        f = OperatorField.from_modes(grid, {(1,): np.eye(2), (-3,): [[0, 1], [1j, 0]]})
        return convolve_scales(f, D_POISSON, ScaleGrid(1 / 32, 1.0, 12))

    def test_larger_balls_dominate(self, scale_field):
        s = truncated_conic(scale_field, 'S').squares
        sbar = truncated_conic(scale_field, 'Sbar').squares
        gap = np.linalg.eigvalsh(s - sbar)
        assert gap.min() > -1e-12 * np.abs(s).max()

    def test_dyadic_majorant_is_constant_on_cubes(self, scale_field):
        profile = truncated_conic(scale_field, 'Sdyadic')
        assert profile.levels.tolist() == [0, 1, 2, 3, 4]
        level_two = profile.squares[2]
        for block in range(4):
            cube = level_two[4 * block:4 * block + 4]
            assert np.allclose(cube, cube[0])
        assert np.all(np.isfinite(profile.values()))

    @pytest.mark.parametrize('variant', ['S', 'Sbar'])
    def test_profiles_vanish_at_the_top_and_decrease_in_eps(self, scale_field, variant):
        profile = truncated_conic(scale_field, variant)
        assert profile.eps[-1] == pytest.approx(1.0)
        assert np.all(profile.squares[-1] == 0)
        scale = np.abs(profile.squares).max()
        assert scale > 0
        for finer, coarser in zip(profile.squares[:-1], profile.squares[1:]):
            assert np.linalg.eigvalsh(finer - coarser).min() > -1e-12 * scale

    def test_dyadic_profiles_vanish_at_the_top_and_grow_with_the_level(self):
        # one mode keeps |g|^2 constant in s, so only the radius range moves with the level
        grid = GridSpec(1, 16)
        f = OperatorField.from_modes(grid, {(2,): [[1, 1j], [0, 2]]})
        sf = convolve_scales(f, D_POISSON, ScaleGrid(1 / 32, 1.0, 12))
        profile = truncated_conic(sf, 'Sdyadic')
        assert np.all(profile.squares[0] == 0)
        scale = np.abs(profile.squares).max()
        assert scale > 0
        even_sides = profile.squares[:-1]
        for coarse, fine in zip(even_sides[:-1], even_sides[1:]):
            assert np.linalg.eigvalsh(fine - coarse).min() > -1e-12 * scale

    def test_rejections(self, scale_field, field_1d):
        with pytest.raises(DomainError):
            truncated_conic(scale_field, 'T')
        dyadic = convolve_scales(field_1d, D_POISSON, DyadicLevels(3))
        with pytest.raises(DomainError):
            truncated_conic(dyadic, 'S')


class TestBallSums:

    def test_constant_field_gives_the_ball_weight(self):
        grid = GridSpec(1, 16)
        g = np.ones(grid.shape + (1, 1))
        total = ball_sum(g, grid, 3.5 / 16, rule='lattice')
        assert np.allclose(total, 7 / 16)

    def test_kernel_cache_skips_large_lattices(self):
        _cached_ball_kernel_hat.cache_clear()
        small = GridSpec(1, 16)
        ball_sum(np.ones(small.shape + (1, 1)), small, 0.1)
        assert _cached_ball_kernel_hat.cache_info().currsize == 1

        large = GridSpec(3, 64)
        total = ball_sum(np.ones(large.shape + (1, 1)), large, 0.05, rule='lattice')
        assert _cached_ball_kernel_hat.cache_info().currsize == 1
        assert np.all(np.isfinite(total))


class TestDerivativeIdentity:

    def test_fd_weights_first_order(self):
        assert np.allclose(fd_weights(1), [-0.5, 0.0, 0.5])

    @pytest.mark.parametrize('k', [1, 2])
    def test_riesz_potential_matches_scale_derivative(self, k, grid_1d, random_field):
        report = poisson_deriv_identity_check(random_field(grid_1d), k, [0.05, 0.1, 0.5])
        assert report.max_discrepancy <= 1e-4

    def test_rejections(self, field_1d):
        with pytest.raises(DomainError):
            poisson_deriv_identity_check(field_1d, 4, [0.1])
        with pytest.raises(ConditioningError):
            poisson_deriv_identity_check(field_1d, 1, [1e-9])


@pytest.mark.slow
def test_radial_square_function_is_dominated_by_conic_derivatives(grid_1d, random_field):
    f = random_field(grid_1d, band=5)
    report = radial_conic_domination_check(f, D_POISSON, ScaleGrid(1e-3, 1.0, 32))
    assert report.multi_indices == [(0,), (1,)]
    assert report.finite
    assert report.max_constant > 0
    assert report.radial_squares.shape == f.values.shape
