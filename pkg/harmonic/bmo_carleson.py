"""
BMO norms and Carleson measure norms of matrix-valued fields on the torus.

Cubes are unions of lattice cells: a cube of level j has side 2^{-j} and is addressed by
its anchor (lowest corner) on the lattice. Cube averages for a whole family are computed
at once by FFT correlation with a box kernel; the whole torus is the single level-0 cube.

Classes:
    Cube, CubeFamily, CarlesonReport

Functions:
    cube_mean, bmo_norm, carleson_norm, discrete_carleson_norm, poisson_bmo_norm
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft
from scipy import ndimage

from .exceptions import DomainError, UnsupportedError
from .opfield import (GridSpec, OperatorField, SpectrumField, abs_square, fft_transform,
                      hermitian_part, op_norm, schatten_norm)
from .square_functions import convolve_scales
from .testfn import DyadicLevels, MultiplierPair, ScaleGrid

logger = logging.getLogger(__name__)

CUBE_SHIFTS = ('none', 'half', 'lattice')


@dataclass(frozen=True)
class Cube:
    grid: GridSpec
    level: int
    anchor: Tuple[int, ...]

    @property
    def side_points(self) -> int:
        return self.grid.N >> self.level if self.level <= int(math.log2(self.grid.N)) else 0

    def indices(self) -> Tuple[np.ndarray, ...]:
        side = self.side_points
        if side == 0:
            raise DomainError(f"Cube of level {self.level} contains no lattice cells.")
        ranges = [(a + np.arange(side)) % self.grid.N for a in self.anchor]
        return np.ix_(*ranges)


def cube_mean(f: OperatorField, cube: Cube) -> np.ndarray:
    """|Q|^{-1} h^d sum_{s in Q} f(s)."""
    block = f.values[cube.indices()]
    return block.reshape(-1, f.n, f.n).mean(axis=0)


@dataclass
class CubeFamily:
    """
    Dyadic cubes of levels 0..max_level, optionally translated.

    shifts 'none': the dyadic partition of each level.
    shifts 'half': the dyadic partition and its half-side translates (2^d families per
        level, which covers the 3^d - 1 half-side shifts modulo the period).
    shifts 'lattice': every lattice translate of every level.
    """
    grid: GridSpec
    max_level: Optional[int] = None
    shifts: str = 'none'

    def __post_init__(self):
        deepest = int(math.log2(self.grid.N))
        if self.max_level is None:
            self.max_level = deepest
        if not 0 <= self.max_level <= deepest:
            raise DomainError(f"Cube levels must lie in 0..{deepest}, got {self.max_level}.")
        if self.shifts not in CUBE_SHIFTS:
            raise DomainError(f"Unknown cube shift option '{self.shifts}'.")

    def side_points(self, level: int) -> int:
        return self.grid.N >> level

    def shift_vectors(self, level: int) -> List[Tuple[int, ...]]:
        side = self.side_points(level)
        d = self.grid.d
        if level == 0 or self.shifts == 'none' or (self.shifts == 'half' and side % 2):
            return [(0,) * d]
        if self.shifts == 'half':
            return list(product((0, side // 2), repeat=d))
        return list(product(range(side), repeat=d))

    def anchors(self, level: int, shift: Tuple[int, ...]) -> np.ndarray:
        """Anchor indices (k, d) of the cubes of one level and shift, in row-major order."""
        side = self.side_points(level)
        starts = [np.arange(0, self.grid.N, side) + s for s in shift]
        mesh = np.meshgrid(*starts, indexing='ij')
        return np.stack(mesh, axis=-1).reshape(-1, self.grid.d) % self.grid.N

    def __iter__(self) -> Iterator[Tuple[int, Tuple[int, ...], np.ndarray]]:
        for level in range(self.max_level + 1):
            for shift in self.shift_vectors(level):
                yield level, shift, self.anchors(level, shift)

    def cubes(self) -> Iterator[Cube]:
        for level, _, anchors in self:
            for anchor in anchors:
                yield Cube(self.grid, level, tuple(int(v) for v in anchor))


@lru_cache(maxsize=256)
def _box_kernel_hat(N: int, d: int, side: int) -> np.ndarray:
    # mean over [s, s + side) is a convolution with the reflected box
    kernel = np.zeros((N,) * d)
    reflected = (-np.arange(side)) % N
    kernel[np.ix_(*([reflected] * d))] = 1.0 / side ** d
    return sfft.fftn(kernel)


def box_means(values: np.ndarray, grid: GridSpec, side: int) -> np.ndarray:
    """Mean of a matrix field over the cube [s, s + side h)^d for every anchor s."""
    hat = _box_kernel_hat(grid.N, grid.d, side)
    return sfft.ifftn(sfft.fftn(values, axes=grid.axes) * hat[..., None, None], axes=grid.axes)


def _oscillations(f: OperatorField, side: int) -> np.ndarray:
    """|Q|^{-1} int_Q |f - f_Q|^2 for the cubes of the given side at every anchor."""
    means = box_means(f.values, f.grid, side)
    second = box_means(abs_square(f.values), f.grid, side)
    return hermitian_part(second - abs_square(means))


def _spread_sup(grid: GridSpec, side: int, anchors: np.ndarray,
                values: np.ndarray) -> np.ndarray:
    """a(s) = max over the given cubes Q containing s of values[Q]."""
    marks = np.zeros(grid.shape)
    marks[tuple(anchors.T)] = np.maximum(values, 0.0)
    if side == 1:
        return marks
    centred = ndimage.maximum_filter(marks, size=side, mode='wrap')
    return np.roll(centred, side - 1 - side // 2, axis=grid.axes)


def _q_norm(a: np.ndarray, grid: GridSpec, exponent: float) -> float:
    return float((grid.cell_volume * np.sum(a ** exponent)) ** (1.0 / exponent))


def _check_q(q: float, n: int) -> None:
    if not q > 2:
        raise DomainError(f"BMO_q and q-Carleson norms need q > 2, got {q}.")
    if math.isfinite(q) and n > 1:
        raise UnsupportedError("BMO_q with q < inf is implemented for scalar fields only.")


def bmo_norm(f: OperatorField, family: CubeFamily, q: float = math.inf) -> float:
    """
    q = inf: max{||f_T||, sup_Q || |Q|^{-1} int_Q |f - f_Q|^2 ||^{1/2}}.
    q < inf (scalar): max{|f_T|, ||a||_{q/2}^{1/2}} with a(s) the largest oscillation over
    the cubes of the family containing s.
    """
    _check_q(q, f.n)
    mean_term = schatten_norm(fft_transform(f, 'forward').zero_mode(), math.inf)
    sup_osc = 0.0
    majorant = np.zeros(f.grid.shape)
    for level in range(family.max_level + 1):
        side = family.side_points(level)
        osc = _oscillations(f, side)
        for shift in family.shift_vectors(level):
            anchors = family.anchors(level, shift)
            picked = osc[tuple(anchors.T)]
            norms = op_norm(picked)
            sup_osc = max(sup_osc, float(norms.max(initial=0.0)))
            if math.isfinite(q):
                majorant = np.maximum(majorant, _spread_sup(f.grid, side, anchors,
                                                            picked[:, 0, 0].real))
    if math.isinf(q):
        return max(mean_term, math.sqrt(sup_osc))
    return max(mean_term, math.sqrt(_q_norm(majorant, f.grid, q / 2)))


@dataclass
class CarlesonReport:
    """Averaged tent masses per cube; `sup_norm` is the largest operator norm."""
    rows: List[Dict[str, Any]]
    sup_norm: float
    witness: Optional[Tuple[int, Tuple[int, ...], Tuple[int, ...]]]
    q: float = math.inf
    q_norm: Optional[float] = None
    values: List[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def norm(self) -> float:
        return self.sup_norm if math.isinf(self.q) else float(self.q_norm)

    def export_rows(self) -> List[Dict[str, Any]]:
        return [dict(row) for row in self.rows]


def _tent_snapshots(sf_iter, thresholds: Sequence[float], shape) -> List[np.ndarray]:
    """
    Cumulative sums of w_k |sf_k|^2 over scales eps_k <= threshold, for each threshold.
    Scales must arrive in increasing order.
    """
    order = np.argsort(thresholds)
    snaps: List[Optional[np.ndarray]] = [None] * len(thresholds)
    acc = np.zeros(shape, dtype=np.complex128)
    pos = 0
    for _, eps, weight, values in sf_iter:
        while pos < len(order) and thresholds[order[pos]] < eps * (1 - 1e-12):
            snaps[order[pos]] = acc.copy()
            pos += 1
        acc = acc + weight * abs_square(values)
    while pos < len(order):
        snaps[order[pos]] = acc.copy()
        pos += 1
    return snaps


def _carleson_from_scales(f: OperatorField, sf, family: CubeFamily, q: float,
                          level_height: Dict[int, float]) -> CarlesonReport:
    shape = f.grid.shape + (f.n, f.n)
    levels = list(range(family.max_level + 1))
    snaps = _tent_snapshots(sf, [level_height[j] for j in levels], shape)
    rows, values = [], []
    best, witness = -1.0, None
    majorant = np.zeros(f.grid.shape)
    for level, snap in zip(levels, snaps):
        side = family.side_points(level)
        averaged = hermitian_part(box_means(snap, f.grid, side))
        for shift in family.shift_vectors(level):
            anchors = family.anchors(level, shift)
            picked = averaged[tuple(anchors.T)]
            norms = op_norm(picked)
            for index, (anchor, value, norm) in enumerate(zip(anchors, picked, norms)):
                rows.append({'level': level, 'shift': list(shift), 'cube_index': index,
                             'anchor': anchor.tolist(), 'value_opnorm': float(norm),
                             'witness': False})
                values.append(value)
                if norm > best:
                    best, witness = float(norm), len(rows) - 1
            if math.isfinite(q):
                majorant = np.maximum(majorant, _spread_sup(f.grid, side, anchors,
                                                            picked[:, 0, 0].real))
    if witness is not None:
        rows[witness]['witness'] = True
        w = rows[witness]
        witness_id = (w['level'], tuple(w['shift']), tuple(w['anchor']))
    else:
        witness_id = None
    q_norm = _q_norm(majorant, f.grid, q / 2) if math.isfinite(q) else None
    return CarlesonReport(rows, max(best, 0.0), witness_id, q, q_norm, values)


def carleson_norm(f: OperatorField, pair: MultiplierPair, family: CubeFamily,
                  q: float = math.inf, sgrid: Optional[ScaleGrid] = None) -> CarlesonReport:
    """
    Carleson norm of d mu(f) = |Phi_eps * f(s)|^2 ds d eps / eps over tents
    T(Q) = Q x (0, side(Q)/2].
    """
    _check_q(q, f.n)
    sgrid = sgrid or ScaleGrid.for_square_functions(f.grid.N)
    sf = convolve_scales(f, pair.phi, sgrid)
    heights = {j: 2.0 ** -j / 2 for j in range(family.max_level + 1)}
    report = _carleson_from_scales(f, sf, family, q, heights)
    logger.debug("Carleson norm %.4g over %d cubes", report.norm, len(report.rows))
    return report


def discrete_carleson_norm(f: OperatorField, pair: MultiplierPair, family: CubeFamily,
                           use_companion: bool = False,
                           levels: Optional[DyadicLevels] = None) -> CarlesonReport:
    """Carleson norm of the dyadic measure sum_j |Phi_{2^{-j}} * f|^2 ds x delta_{2^{-j}}."""
    levels = levels or DyadicLevels.for_grid(f.grid.N)
    symbol = pair.companion if use_companion else pair.phi
    sf = convolve_scales(f, symbol, levels)
    ascending = sorted(iter(sf), key=lambda item: item[1])
    heights = {j: 2.0 ** -j / 2 for j in range(family.max_level + 1)}
    return _carleson_from_scales(f, ascending, family, math.inf, heights)


def default_r_nodes() -> np.ndarray:
    """32 nodes (1 - 2^{-10}) sin(pi k / 62), k = 0..31, on [0, 1 - 2^{-10}]."""
    return (1 - 2.0 ** -10) * np.sin(np.pi * np.arange(32) / 62)


def _padded_size(grid: GridSpec, band: int) -> int:
    """
    Points per axis of the lattice the quadratic term is formed on: a power of two at least
    N and at least 4 band + 1, so |g|^2 of a band-`band` polynomial g has no aliasing.
    The public lattice budget does not apply to this internal array.
    """
    size = grid.N
    while size < 4 * band + 1:
        size *= 2
    return size


def _padded_coeffs(spectrum: SpectrumField, size: int) -> np.ndarray:
    """Zero-pad a band-limited spectrum onto `size` points per axis (same polynomial)."""
    freqs = spectrum.grid.frequencies().reshape(-1, spectrum.grid.d)
    coeffs = np.zeros((size,) * spectrum.grid.d + (spectrum.n, spectrum.n),
                      dtype=np.complex128)
    coeffs[tuple((freqs % size).T)] = spectrum.coeffs.reshape(-1, spectrum.n, spectrum.n)
    return coeffs


def _padded_frequency_norms(d: int, size: int) -> np.ndarray:
    k = np.rint(sfft.fftfreq(size, d=1.0 / size))
    mesh = np.meshgrid(*([k] * d), indexing='ij')
    return np.sqrt(sum(axis ** 2 for axis in mesh))


def poisson_bmo_norm(f: OperatorField, r_nodes: Optional[Sequence[float]] = None) -> float:
    """
    max{||f^(0)||, sup_r || P_r(|f - P_r f|^2) ||_inf^{1/2}} with the circular Poisson
    multiplier r^{|m|}. The quadratic term is formed on a padded lattice so that the
    square of the band-limited field is represented without aliasing.
    """
    nodes = default_r_nodes() if r_nodes is None else np.asarray(r_nodes, dtype=float)
    if np.any(nodes < 0) or np.any(nodes >= 1):
        raise DomainError("Poisson radii must lie in [0, 1).")
    spectrum = fft_transform(f, 'forward')
    spectrum.check_band()
    size = _padded_size(f.grid, spectrum.band_m)
    coeffs = _padded_coeffs(spectrum, size)
    norms = _padded_frequency_norms(f.grid.d, size)
    axes = f.grid.axes
    logger.debug("Poisson BMO on %d^%d padded points, %d radii", size, f.grid.d, len(nodes))
    best = 0.0
    for r in nodes:
        weights = (r ** norms)[..., None, None]
        values = sfft.ifftn(coeffs * (1 - weights), axes=axes, norm='forward')
        square = sfft.fftn(abs_square(values), axes=axes, norm='forward')
        averaged = sfft.ifftn(square * weights, axes=axes, norm='forward')
        best = max(best, float(op_norm(hermitian_part(averaged)).max()))
    mean_term = schatten_norm(spectrum.zero_mode(), math.inf)
    return max(mean_term, math.sqrt(best))
