"""
Tests for cube families, BMO norms and Carleson norms of matrix fields.
"""

import math

import numpy as np
import pytest

from harmonic.bmo_carleson import (Cube, CubeFamily, box_means, bmo_norm, carleson_norm,
                                   cube_mean, default_r_nodes, discrete_carleson_norm,
                                   poisson_bmo_norm)
from harmonic.exceptions import DomainError, UnsupportedError
from harmonic.opfield import GridSpec, OperatorField
from harmonic.testfn import RadialSymbol, ScaleGrid, build_companion

GRID = GridSpec(1, 16)


def _brute_force_bmo(f, family):
    worst = 0.0
    for cube in family.cubes():
        block = f.values[cube.indices()].reshape(-1, f.n, f.n)
        centred = block - block.mean(axis=0)
        osc = np.einsum('kji,kjl->il', np.conj(centred), centred) / len(block)
        worst = max(worst, float(np.linalg.norm(osc, 2)))
    return max(float(np.linalg.norm(f.mean(), 2)), math.sqrt(worst))


@pytest.fixture(scope='module')
def d_poisson_pair():
    return build_companion(RadialSymbol('d_poisson'), 'discrete', N=16)


class TestCubes:

    @pytest.mark.parametrize('shifts, count', [('none', 31), ('half', 45), ('lattice', 65)])
    def test_family_sizes(self, shifts, count):
        assert sum(1 for _ in CubeFamily(GRID, shifts=shifts).cubes()) == count

    def test_family_validation(self):
        with pytest.raises(DomainError):
            CubeFamily(GRID, max_level=5)
        with pytest.raises(DomainError):
            CubeFamily(GRID, shifts='quarter')
        with pytest.raises(DomainError):
            Cube(GRID, 5, (0,)).indices()

    def test_box_means_match_cube_means(self, random_field):
        f = random_field(GridSpec(2, 8), band=2)
        means = box_means(f.values, f.grid, 4)
        for anchor in ((0, 0), (6, 3), (7, 7)):
            assert np.allclose(means[anchor], cube_mean(f, Cube(f.grid, 1, anchor)))

    def test_whole_torus_is_level_zero(self, random_field):
        f = random_field(GRID, zero_mean=False)
        assert np.allclose(cube_mean(f, Cube(GRID, 0, (0,))), f.mean())


class TestBMO:

    @pytest.mark.parametrize('shifts', ['none', 'half', 'lattice'])
    def test_matches_direct_cube_scan(self, shifts, random_field):
        f = random_field(GRID, n=2, band=5)
        family = CubeFamily(GRID, shifts=shifts)
        assert bmo_norm(f, family) == pytest.approx(_brute_force_bmo(f, family), rel=1e-10)

    def test_more_cubes_never_lower_the_norm(self, random_field):
        f = random_field(GridSpec(2, 8), band=3)
        plain = bmo_norm(f, CubeFamily(f.grid))
        half = bmo_norm(f, CubeFamily(f.grid, shifts='half'))
        every = bmo_norm(f, CubeFamily(f.grid, shifts='lattice'))
        assert plain <= half * (1 + 1e-12)
        assert half <= every * (1 + 1e-12)

    def test_lattice_family_is_translation_invariant(self, random_field):
        f = random_field(GRID, band=6)
        family = CubeFamily(GRID, shifts='lattice')
        assert bmo_norm(f.translated(5), family) == pytest.approx(bmo_norm(f, family))

    def test_single_mode_norm_is_operator_norm(self, random_matrix):
        a = random_matrix(2)
        f = OperatorField.from_modes(GRID, {(3,): a})
        expected = np.linalg.norm(a, 2)
        assert bmo_norm(f, CubeFamily(GRID, shifts='half')) == pytest.approx(expected)
        assert poisson_bmo_norm(f) == pytest.approx(expected)

    def test_constant_field(self, random_matrix):
        a = random_matrix(3)
        f = OperatorField.constant(GRID, a)
        assert bmo_norm(f, CubeFamily(GRID)) == pytest.approx(np.linalg.norm(a, 2))
        assert poisson_bmo_norm(f) == pytest.approx(np.linalg.norm(a, 2))

    def test_finite_q_is_bounded_by_the_supremum(self, random_field):
        f = random_field(GRID, n=1, band=5)
        family = CubeFamily(GRID, shifts='half')
        sup = bmo_norm(f, family)
        for q in (3.0, 6.0):
            assert 0 < bmo_norm(f, family, q=q) <= sup * (1 + 1e-12)

    def test_q_restrictions(self, random_field):
        with pytest.raises(UnsupportedError):
            bmo_norm(random_field(GRID, n=2), CubeFamily(GRID), q=4.0)
        with pytest.raises(DomainError):
            bmo_norm(random_field(GRID, n=1), CubeFamily(GRID), q=2.0)

    def test_poisson_nodes(self, random_field):
        nodes = default_r_nodes()
        assert len(nodes) == 32
        assert nodes[0] == 0.0
        assert nodes[-1] < 1.0
        with pytest.raises(DomainError):
            poisson_bmo_norm(random_field(GRID), [0.5, 1.0])

    def test_unitary_conjugation_invariance(self, random_field, random_matrix):
        f = random_field(GRID, n=2, band=5)
        q, _ = np.linalg.qr(random_matrix(2))
        for shifts in ('none', 'half'):
            family = CubeFamily(GRID, shifts=shifts)
            assert bmo_norm(f.conjugated(q), family) == pytest.approx(bmo_norm(f, family),
                                                                      rel=1e-12)
        assert poisson_bmo_norm(f.conjugated(q)) == pytest.approx(poisson_bmo_norm(f),
                                                                  rel=1e-12)

    def test_zero_radius_is_the_whole_torus_oscillation(self, random_field):
        f = random_field(GRID, n=2, band=5, zero_mean=False)
        mean = cube_mean(f, Cube(GRID, 0, (0,)))
        centred = f.values - mean
        osc = np.einsum('kji,kjl->il', np.conj(centred), centred) / GRID.N
        expected = max(np.linalg.norm(mean, 2), math.sqrt(np.linalg.norm(osc, 2)))
        assert poisson_bmo_norm(f, [0.0]) == pytest.approx(expected, rel=1e-10)

    def test_poisson_norm_on_the_largest_three_dimensional_lattice(self):
        grid = GridSpec(3, 64)
        zero = OperatorField(grid, np.zeros(grid.shape + (1, 1)))
        assert poisson_bmo_norm(zero, [0.0, 0.5]) == 0.0
        single = OperatorField.from_modes(grid, {(3, 0, 0): [[2.0]]})
        assert poisson_bmo_norm(single, [0.0, 0.5]) == pytest.approx(2.0, rel=1e-12)


class TestCarleson:

    @pytest.fixture
    def field(self, random_field):
        return random_field(GRID, n=2, band=5)

    def test_rows_cover_the_family_with_one_witness(self, field, d_poisson_pair):
        family = CubeFamily(GRID, shifts='half')
        report = carleson_norm(field, d_poisson_pair, family, sgrid=ScaleGrid(1e-4, 0.5, 48))
        assert len(report.rows) == 45
        witnesses = [row for row in report.rows if row['witness']]
        assert len(witnesses) == 1
        assert witnesses[0]['value_opnorm'] == report.sup_norm
        assert report.sup_norm == max(row['value_opnorm'] for row in report.export_rows())
        assert report.witness[0] == witnesses[0]['level']

    def test_single_mode_whole_torus_value(self, random_matrix, d_poisson_pair):
        a = random_matrix(2)
        f = OperatorField.from_modes(GRID, {(2,): a})
        sgrid = ScaleGrid(1e-4, 2.0, 64)
        report = carleson_norm(f, d_poisson_pair, CubeFamily(GRID), sgrid=sgrid)
        assert report.rows[0]['level'] == 0

        inside = sgrid.nodes * (1 - 1e-12) <= 0.5
        phi = RadialSymbol('d_poisson')
        mass = np.sum(sgrid.weights[inside] * np.abs(phi(2 * sgrid.nodes[inside])) ** 2)
        expected = mass * (np.conj(a.T) @ a)
        assert np.allclose(report.values[0], expected, rtol=1e-8, atol=1e-8 * mass)

    def test_norm_is_quadratic_in_the_field(self, field, d_poisson_pair):
        family = CubeFamily(GRID)
        sgrid = ScaleGrid(1e-4, 0.5, 48)
        base = carleson_norm(field, d_poisson_pair, family, sgrid=sgrid).norm
        tripled = carleson_norm(field.scaled(3.0), d_poisson_pair, family, sgrid=sgrid).norm
        assert tripled == pytest.approx(9 * base, rel=1e-10)

    def test_constants_carry_no_mass(self, random_matrix, d_poisson_pair):
        f = OperatorField.constant(GRID, random_matrix(2))
        assert carleson_norm(f, d_poisson_pair, CubeFamily(GRID)).norm < 1e-20
        assert discrete_carleson_norm(f, d_poisson_pair, CubeFamily(GRID)).norm < 1e-20

    def test_finite_q_for_scalar_fields(self, random_field, d_poisson_pair):
        f = random_field(GRID, n=1, band=5)
        report = carleson_norm(f, d_poisson_pair, CubeFamily(GRID), q=4.0)
        assert report.norm == report.q_norm
        assert 0 < report.q_norm <= report.sup_norm * (1 + 1e-12)

    def test_discrete_measure(self, field, d_poisson_pair):
        family = CubeFamily(GRID)
        plain = discrete_carleson_norm(field, d_poisson_pair, family)
        companion = discrete_carleson_norm(field, d_poisson_pair, family, use_companion=True)
        assert len(plain.rows) == len(companion.rows) == 31
        assert plain.norm > 0
        assert companion.norm > 0
