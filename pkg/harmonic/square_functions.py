"""
Column square functions of matrix-valued fields on the torus.

Every square function here aggregates |Phi_eps * f|^2 over a set of scales, either at
the point itself (radial), or averaged over the cone {|t| < eps} (conic), then takes the
pointwise PSD square root. Scale families are continuous log grids (measure d eps / eps)
or dyadic levels 2^{-j}.

Classes:
    ConeSpec: cone aperture, truncation and ball quadrature rule.
    ScaleField: the family eps -> Phi_eps * f, streamed one scale at a time.
    TruncatedProfile: truncated conic profiles S, Sbar and the dyadic majorant.
    TentField: fields on lattice x cone samples, the domain of the tent projection.

Functions:
    convolve_scales, square_fn, truncated_conic, radial_conic_domination_check,
    poisson_deriv_identity_check, tent_embed, tent_project, tent_square_fn,
    square_function, hardy_norm, row_hardy_norm.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft
from scipy import special

from .exceptions import ConditioningError, DomainError, ShapeError
from .opfield import (GridSpec, OperatorField, SpectrumField, abs_square, fft_transform,
                      hermitian_part, lp_field_norm, op_norm, psd_sqrt, schatten_norm)
from .testfn import DerivativeSymbol, DyadicLevels, RadialSymbol, ScaleGrid

logger = logging.getLogger(__name__)

SQUARE_FN_KINDS = ('radial', 'conic', 'radial_discrete', 'conic_discrete')
HARDY_METHODS = ('poisson_radial', 'poisson_conic', 'circular_radial', 'phi_radial',
                 'phi_conic', 'phi_radial_discrete', 'phi_conic_discrete', 'riesz_poisson',
                 'poisson_deriv_k')
BALL_RULES = ('volume', 'lattice')
ZERO_FLOOR = 1e-14
BALL_CACHE_ENTRIES = 256
BALL_CACHE_BYTES = 2 ** 28


def unit_ball_volume(d: int) -> float:
    return float(np.pi ** (d / 2) / special.gamma(d / 2 + 1))


@dataclass(frozen=True)
class ConeSpec:
    """
    Cone {(t, eps): |t| < aperture * eps, eps <= eps_max}.

    rule 'volume' integrates over a ball as (exact ball volume) x (lattice mean over the
    ball); rule 'lattice' uses plain h^d lattice sums, whose weights grow with the radius.
    """
    aperture: int = 1
    eps_max: float = 1.0
    rule: str = 'volume'

    def __post_init__(self):
        if self.aperture not in (1, 2):
            raise DomainError(f"Cone aperture must be 1 or 2, got {self.aperture}.")
        if not self.eps_max > 0:
            raise DomainError(f"Cone truncation must be positive, got {self.eps_max}.")
        if self.rule not in BALL_RULES:
            raise DomainError(f"Unknown ball quadrature rule '{self.rule}'.")


def dilated(sym) -> Callable[[float, np.ndarray], np.ndarray]:
    """Per-scale multiplier xi -> Phi^(eps xi) for a symbol with a `multiplier` method."""
    def multiplier(eps, xi):
        return sym.multiplier(eps * xi)
    return multiplier


class ScaleField:
    """
    The values Phi_{eps_k} * f on the lattice for every scale node eps_k.

    A lazily evaluated ScaleField keeps the spectrum of f and a per-scale multiplier and
    computes one scale at a time; an explicit ScaleField holds an array of shape
    (K,) + grid.shape + (n, n).
    """

    def __init__(self, grid: GridSpec, n: int, nodes, weights, discrete: bool = False,
                 spectrum: Optional[SpectrumField] = None,
                 multiplier: Optional[Callable] = None, values=None, label: str = ''):
        self.grid = grid
        self.n = n
        self.nodes = np.asarray(nodes, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.discrete = discrete
        self.label = label
        self._spectrum = spectrum
        self._multiplier = multiplier
        self._values = None if values is None else np.asarray(values, dtype=np.complex128)
        self._freqs = grid.frequencies().astype(float)
        if self.nodes.shape != self.weights.shape:
            raise ShapeError("Scale nodes and weights differ in length.")
        if self._values is None and (spectrum is None or multiplier is None):
            raise ShapeError("A lazy ScaleField needs both a spectrum and a multiplier.")
        if self._values is not None and \
                self._values.shape != (self.K,) + grid.shape + (n, n):
            raise ShapeError(f"Scale values of shape {self._values.shape} do not match "
                             f"{self.K} scales on grid {grid.shape} with n={n}.")

    @classmethod
    def from_values(cls, grid: GridSpec, nodes, weights, values,
                    discrete: bool = False) -> 'ScaleField':
        values = np.asarray(values, dtype=np.complex128)
        return cls(grid, values.shape[-1], nodes, weights, discrete=discrete, values=values)

    @property
    def K(self) -> int:
        return self.nodes.size

    def at_scale(self, k: int) -> np.ndarray:
        if self._values is not None:
            return self._values[k]
        symbol = self._multiplier(self.nodes[k], self._freqs)
        return sfft.ifftn(self._spectrum.coeffs * symbol[..., None, None],
                          axes=self.grid.axes, norm='forward')

    def __iter__(self):
        for k in range(self.K):
            yield k, self.nodes[k], self.weights[k], self.at_scale(k)

    def materialize(self) -> np.ndarray:
        if self._values is not None:
            return self._values
        return np.stack([self.at_scale(k) for k in range(self.K)])


def convolve_scales(f: OperatorField, sym, sgrid) -> ScaleField:
    """
    Phi_eps * f for every node of `sgrid` by frequency-side multiplication.

    Raises:
        BandError: f is not band-limited below the Nyquist frequency.
    """
    spectrum = fft_transform(f, 'forward')
    spectrum.check_band()
    return ScaleField(f.grid, f.n, sgrid.nodes, sgrid.weights,
                      discrete=getattr(sgrid, 'discrete', False), spectrum=spectrum,
                      multiplier=dilated(sym), label=getattr(sym, 'label', ''))


def _ball_kernel_hat(N: int, d: int, rho: float, offset: Tuple[float, ...],
                     rule: str) -> np.ndarray:
    """
    Transform of the periodized ball weights: ball_sum(g)(s) = sum_o w(o) g(s + o h), the
    ball centred at s + offset*h. Lattice offsets are counted with multiplicity (images).
    """
    h = 1.0 / N
    reach = int(math.ceil(rho / h)) + 1
    axis = np.arange(-reach, reach + 1)
    o = np.stack(np.meshgrid(*([axis] * d), indexing='ij'), axis=-1).reshape(-1, d)
    centre = np.asarray(offset, dtype=float)
    inside = np.linalg.norm((o - centre) * h, axis=-1) < rho
    o = o[inside]
    volume = unit_ball_volume(d) * rho ** d
    if rule == 'volume':
        weights = np.full(len(o), volume / len(o)) if len(o) else np.zeros(0)
    else:
        at_centre = np.all(o == centre, axis=-1)
        weights = np.where(at_centre, min(volume, h ** d), h ** d)
    kernel = np.zeros((N,) * d)
    np.add.at(kernel, tuple(((-o) % N).T), weights)
    return sfft.fftn(kernel)


_cached_ball_kernel_hat = lru_cache(maxsize=BALL_CACHE_ENTRIES)(_ball_kernel_hat)


def _ball_hat(N: int, d: int, rho: float, offset: Tuple[float, ...], rule: str) -> np.ndarray:
    """Kernel transforms are cached only while a full cache stays under BALL_CACHE_BYTES."""
    if BALL_CACHE_ENTRIES * 16 * N ** d <= BALL_CACHE_BYTES:
        return _cached_ball_kernel_hat(N, d, rho, offset, rule)
    return _ball_kernel_hat(N, d, rho, offset, rule)


def ball_sum(g: np.ndarray, grid: GridSpec, rho: float, rule: str = 'volume',
             offset: Optional[Tuple[float, ...]] = None) -> np.ndarray:
    """Integral of the matrix field g over the ball of radius rho around each point."""
    offset = tuple(float(v) for v in offset) if offset is not None else (0.0,) * grid.d
    hat = _ball_hat(grid.N, grid.d, float(rho), offset, rule)
    return sfft.ifftn(sfft.fftn(g, axes=grid.axes) * hat[..., None, None], axes=grid.axes)


def _sqrt_field(acc: np.ndarray) -> np.ndarray:
    """Pointwise PSD root; matrices at round-off level relative to the field are zeroed."""
    acc = hermitian_part(acc)
    norms = op_norm(acc)
    top = float(norms.max(initial=0.0))
    if top == 0.0:
        return np.zeros_like(acc)
    acc = np.where((norms < ZERO_FLOOR * top)[..., None, None], 0.0, acc)
    return psd_sqrt(acc)


def _check_cone(cone: ConeSpec, sf: ScaleField) -> None:
    if sf.K and cone.eps_max > sf.nodes.max() * (1 + 1e-12):
        raise DomainError(
            f"Cone truncation {cone.eps_max} exceeds the largest scale {sf.nodes.max():g}.")


def square_sum(sf: ScaleField, kind: str, cone: Optional[ConeSpec] = None) -> np.ndarray:
    """The PSD aggregate whose root is the square function (shape grid + (n, n))."""
    if kind not in SQUARE_FN_KINDS:
        raise DomainError(f"Unknown square function kind '{kind}'.")
    if sf.K == 0:
        raise DomainError("Square functions need a nonempty scale grid.")
    if kind.endswith('_discrete') != sf.discrete:
        raise DomainError(f"Kind '{kind}' does not match the scale family of the field.")
    conic = kind.startswith('conic')
    cone = cone or ConeSpec()
    if conic:
        _check_cone(cone, sf)
    d = sf.grid.d
    acc = np.zeros(sf.grid.shape + (sf.n, sf.n), dtype=np.complex128)
    for k, eps, weight, values in sf:
        squares = abs_square(values)
        if not conic:
            acc += weight * squares
            continue
        if eps > cone.eps_max * (1 + 1e-12):
            continue
        acc += weight * eps ** -d * ball_sum(squares, sf.grid, cone.aperture * eps, cone.rule)
        logger.debug("Conic scale %d (eps=%.3e) accumulated.", k, eps)
    return hermitian_part(acc)


def square_fn(sf: ScaleField, kind: str, cone: Optional[ConeSpec] = None) -> OperatorField:
    """
    Radial or conic square function of a ScaleField, continuous or discrete.

    radial: (sum_k w_k |sf_k(s)|^2)^{1/2}
    conic:  (sum_k w_k eps_k^{-d} int_{|t| < a eps_k} |sf_k(s + t)|^2 dt)^{1/2}
    """
    return OperatorField(sf.grid, _sqrt_field(square_sum(sf, kind, cone)), hermitian=True)


def tent_square_fn(G: ScaleField, cone: Optional[ConeSpec] = None) -> OperatorField:
    """Conic aggregate of an arbitrary tent-space element (e.g. a tent projection)."""
    return square_fn(G, 'conic_discrete' if G.discrete else 'conic', cone)


@dataclass
class TruncatedProfile:
    """
    Squared truncated conic profiles.

    For S and Sbar, `squares[i]` is the profile at eps = eps[i]; for Sdyadic it is the
    dyadic majorant at level `levels[i]`, constant on each cube of side 2^{-levels[i]}.
    """
    variant: str
    eps: np.ndarray
    squares: np.ndarray
    levels: Optional[np.ndarray] = None
    grid: Optional[GridSpec] = field(default=None, repr=False)

    def values(self) -> np.ndarray:
        return np.stack([_sqrt_field(sq) for sq in self.squares])


def _subrange_weights(log_nodes: np.ndarray, start: int) -> np.ndarray:
    """Trapezoid weights in log eps on nodes[start:], zero elsewhere."""
    w = np.zeros_like(log_nodes)
    if start >= len(log_nodes) - 1:
        return w
    gaps = np.diff(log_nodes[start:])
    w[start:-1] += gaps / 2
    w[start + 1:] += gaps / 2
    return w


def truncated_conic(sf: ScaleField, variant: str,
                    cone: Optional[ConeSpec] = None) -> TruncatedProfile:
    """
    Truncated conic profiles on the continuous scale grid.

    S(s, eps):     r in [eps, eps_max], ball radius r - eps/2
    Sbar(s, eps):  r in [eps, eps_max], ball radius r/2
    Sdyadic(s, j): r in [sqrt(d) 2^{-j}, eps_max], ball of radius r about the centre of
                   the level-j dyadic cube containing s
    """
    if variant not in ('S', 'Sbar', 'Sdyadic'):
        raise DomainError(f"Unknown truncated profile '{variant}'.")
    if sf.discrete:
        raise DomainError("Truncated profiles are defined on continuous scale grids.")
    cone = cone or ConeSpec(rule='lattice')
    _check_cone(cone, sf)
    grid, d, a = sf.grid, sf.grid.d, cone.aperture
    keep = np.flatnonzero(sf.nodes <= cone.eps_max * (1 + 1e-12))
    nodes = sf.nodes[keep]
    log_nodes = np.log(nodes)
    squares = [abs_square(sf.at_scale(k)) for k in keep]
    shape = grid.shape + (sf.n, sf.n)

    def profile(start, radius_of, offset=None):
        acc = np.zeros(shape, dtype=np.complex128)
        weights = _subrange_weights(log_nodes, start)
        for i in range(start, len(nodes)):
            if weights[i] == 0.0:
                continue
            acc += weights[i] * nodes[i] ** -d * ball_sum(
                squares[i], grid, a * radius_of(nodes[i]), cone.rule, offset)
        return hermitian_part(acc)

    if variant in ('S', 'Sbar'):
        out = []
        for i, eps in enumerate(nodes):
            if variant == 'S':
                out.append(profile(i, lambda r, e=eps: r - e / 2))
            else:
                out.append(profile(i, lambda r: r / 2))
        return TruncatedProfile(variant, nodes, np.stack(out), grid=grid)

    levels = np.arange(int(math.log2(grid.N)) + 1)
    out = []
    for j in levels:
        start = int(np.searchsorted(nodes, math.sqrt(d) * 2.0 ** -j * (1 - 1e-12)))
        side = grid.N >> j
        offset = (0.5 if side % 2 else 0.0,) * d
        full = profile(start, lambda r: r, offset)
        base = np.arange(0, grid.N, side) + side // 2
        cube_values = full[np.ix_(*([base] * d))]
        for axis in range(d):
            cube_values = np.repeat(cube_values, side, axis=axis)
        out.append(cube_values)
    return TruncatedProfile(variant, nodes, np.stack(out), levels=levels, grid=grid)


@dataclass
class DominationReport:
    constants: np.ndarray
    max_constant: float
    multi_indices: List[Tuple[int, ...]]
    radial_squares: Optional[np.ndarray] = None
    conic_squares: Optional[np.ndarray] = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.max_constant)


def _relative_constant(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> float:
    """Smallest C with a <= C b in PSD order, inf if a leaks out of the range of b."""
    norm_a, norm_b = float(op_norm(a)), float(op_norm(b))
    if norm_a == 0.0:
        return 0.0
    if norm_b == 0.0:
        return math.inf
    eigvals, eigvecs = np.linalg.eigh(b)
    in_range = eigvals > tol * norm_b
    outside = eigvecs[:, ~in_range]
    if outside.size and op_norm(np.conj(outside.T) @ a @ outside) > tol * norm_a:
        return math.inf
    basis = eigvecs[:, in_range] / np.sqrt(eigvals[in_range])
    return float(np.linalg.eigvalsh(hermitian_part(np.conj(basis.T) @ a @ basis))[-1])


def radial_conic_domination_check(f: OperatorField, sym: RadialSymbol,
                                  sgrid: Optional[ScaleGrid] = None,
                                  cone: Optional[ConeSpec] = None) -> DominationReport:
    """
    Measures C(s) = min {C : s_Phi(f)(s)^2 <= C sum_{|m|_1 <= d} S_{D^m Phi}(f)(s)^2}.
    """
    sgrid = sgrid or ScaleGrid.for_square_functions(f.grid.N)
    radial = square_sum(convolve_scales(f, sym, sgrid), 'radial')
    indices = [m for m in product(range(f.grid.d + 1), repeat=f.grid.d) if sum(m) <= f.grid.d]
    conic = np.zeros_like(radial)
    for m in indices:
        symbol = sym if not any(m) else DerivativeSymbol(sym, m)
        conic += square_sum(convolve_scales(f, symbol, sgrid), 'conic', cone)
    flat_a = radial.reshape(-1, f.n, f.n)
    flat_b = conic.reshape(-1, f.n, f.n)
    constants = np.array([_relative_constant(a, b) for a, b in zip(flat_a, flat_b)])
    report = DominationReport(constants.reshape(f.grid.shape),
                              float(constants.max(initial=0.0)), indices,
                              radial_squares=radial, conic_squares=conic)
    logger.debug("Radial/conic domination constant %.4g", report.max_constant)
    return report


def fd_weights(k: int) -> np.ndarray:
    """Central stencil c_{-k..k} with sum_j c_j j^i = k! delta_{ik} for i <= 2k."""
    offsets = np.arange(-k, k + 1, dtype=float)
    vander = np.vander(offsets, 2 * k + 1, increasing=True).T
    rhs = np.zeros(2 * k + 1)
    rhs[k] = math.factorial(k)
    return np.linalg.solve(vander, rhs)


@dataclass
class IdentityReport:
    k: int
    eps: List[float]
    discrepancies: List[float]

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancies, default=0.0)


def poisson_deriv_identity_check(f: OperatorField, k: int,
                                 eps_list: Sequence[float]) -> IdentityReport:
    """
    Compares f * I^k(P)_eps with (-1/2pi)^k eps^k d^k/d eps^k P_eps(f), the latter by a
    central finite difference with step eps * 1e-3.
    """
    if k < 1 or k > 3:
        raise DomainError(f"Derivative order must be 1, 2 or 3, got {k}.")
    spectrum = fft_transform(f, 'forward')
    spectrum.check_band()
    norms = f.grid.frequency_norms()
    riesz = RadialSymbol('riesz_poisson', alpha=float(k))
    weights = fd_weights(k)

    def synth(symbol):
        return sfft.ifftn(spectrum.coeffs * symbol[..., None, None], axes=f.grid.axes,
                          norm='forward')

    discrepancies = []
    for eps in eps_list:
        if eps < 1e-8:
            raise ConditioningError(f"eps={eps} is too small for stable differencing.")
        step = eps * 1e-3
        lhs = synth(riesz(eps * norms))
        derivative = sum(c * synth(np.exp(-2 * np.pi * (eps + j * step) * norms))
                         for j, c in zip(range(-k, k + 1), weights)) / step ** k
        rhs = (-1 / (2 * np.pi)) ** k * eps ** k * derivative
        scale = float(np.max(np.abs(lhs)))
        diff = float(np.max(np.abs(lhs - rhs)))
        discrepancies.append(0.0 if scale == 0.0 and diff < 1e-14 else diff / max(scale, 1e-300))
    return IdentityReport(k, list(eps_list), discrepancies)


def cone_offsets(grid: GridSpec, radius: float) -> np.ndarray:
    """Integer lattice offsets o with |o h| < radius; the zero offset is always included."""
    reach = int(math.ceil(radius * grid.N))
    axis = np.arange(-reach, reach + 1)
    o = np.stack(np.meshgrid(*([axis] * grid.d), indexing='ij'), axis=-1).reshape(-1, grid.d)
    inside = (np.linalg.norm(o * grid.h, axis=-1) < radius) | np.all(o == 0, axis=-1)
    return o[inside]


class TentField:
    """
    A matrix field F(s, u, eps_k) on lattice points s, cone offsets |u| < a eps_k and scale
    nodes eps_k. `values[k]` has shape (len(offsets[k]),) + grid.shape + (n, n).
    """

    def __init__(self, grid: GridSpec, nodes, weights, offsets: List[np.ndarray],
                 values: List[np.ndarray], discrete: bool = False):
        if len(offsets) != len(values) or len(nodes) != len(values):
            raise ShapeError("Tent offsets, values and scale nodes differ in length.")
        for o, v in zip(offsets, values):
            if v.shape[0] != len(o) or v.shape[1:1 + grid.d] != grid.shape:
                raise ShapeError(f"Tent slice of shape {v.shape} does not fit its offsets.")
        self.grid = grid
        self.nodes = np.asarray(nodes, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.offsets = offsets
        self.values = values
        self.discrete = discrete

    @classmethod
    def sampled(cls, G: ScaleField, fn: Callable, cone: Optional[ConeSpec] = None):
        """Tent field with F(s, u, eps) = fn(s_index, u, k) evaluated slice by slice."""
        cone = cone or ConeSpec()
        offsets, values = [], []
        for k, eps in enumerate(G.nodes):
            o = cone_offsets(G.grid, cone.aperture * eps)
            offsets.append(o)
            values.append(np.stack([fn(u, k) for u in o]))
        return cls(G.grid, G.nodes, G.weights, offsets, values, G.discrete)


def tent_embed(G: ScaleField, cone: Optional[ConeSpec] = None) -> TentField:
    """G -> F(s, u, eps) = G(s + u, eps)."""
    axes = G.grid.axes
    table = G.materialize()
    return TentField.sampled(
        G, lambda u, k: np.roll(table[k], tuple(-int(v) for v in u), axis=axes), cone)


def tent_project(F: TentField) -> ScaleField:
    """P(F)(s, eps) = average over lattice offsets |u| < a eps of F(s - u, u, eps)."""
    axes = F.grid.axes
    out = []
    for o, slab in zip(F.offsets, F.values):
        acc = np.zeros(slab.shape[1:], dtype=np.complex128)
        for u, values in zip(o, slab):
            acc += np.roll(values, tuple(int(v) for v in u), axis=axes)
        out.append(acc / len(o))
    return ScaleField.from_values(F.grid, F.nodes, F.weights, np.stack(out), F.discrete)


def tent_l2_norm(F: TentField) -> float:
    """(sum_k w_k h^d sum_s mean_u ||F(s, u, eps_k)||_HS^2)^{1/2}."""
    total = 0.0
    for w, slab in zip(F.weights, F.values):
        total += w * F.grid.cell_volume * float(np.sum(np.abs(slab) ** 2)) / slab.shape[0]
    return math.sqrt(total)


def scale_field_l2_norm(G: ScaleField) -> float:
    total = 0.0
    for _, _, w, values in G:
        total += w * G.grid.cell_volume * float(np.sum(np.abs(values) ** 2))
    return math.sqrt(total)


def _circular_scale_field(f: OperatorField, sgrid: ScaleGrid) -> ScaleField:
    """d/dr of the circular Poisson integral, r = e^{-2 pi eps}, weight (1 - r) dr."""
    spectrum = fft_transform(f, 'forward')
    spectrum.check_band()
    eps = sgrid.nodes
    r = np.exp(-2 * np.pi * eps)
    weights = sgrid.weights * (1 - r) * 2 * np.pi * r * eps

    def multiplier(e, xi):
        m = np.linalg.norm(xi, axis=-1)
        radius = math.exp(-2 * np.pi * e)
        return np.where(m > 0, m * radius ** np.maximum(m - 1, 0.0), 0.0)

    return ScaleField(f.grid, f.n, eps, weights, spectrum=spectrum, multiplier=multiplier,
                      label='circular_poisson')


def _method_setup(method: str, N: int, symbol=None, alpha: float = 1.0, k: int = 1,
                  sgrid=None, cone=None):
    """Symbol, scale family, square function kind and cone for a Hardy-norm method."""
    if method not in HARDY_METHODS:
        raise DomainError(f"Unknown Hardy norm method '{method}'.")
    discrete = method.endswith('_discrete')
    if sgrid is None:
        sgrid = DyadicLevels.for_grid(N) if discrete else ScaleGrid.for_square_functions(N)
    if method in ('poisson_radial', 'poisson_conic', 'circular_radial'):
        symbol = RadialSymbol('d_poisson')
    elif method == 'riesz_poisson':
        symbol = RadialSymbol('riesz_poisson', alpha=alpha)
    elif method == 'poisson_deriv_k':
        symbol = RadialSymbol('poisson_deriv', order=k)
    elif symbol is None:
        symbol = RadialSymbol('annulus_bump' if discrete else 'd_poisson')
    conic = 'conic' in method
    kind = ('conic' if conic else 'radial') + ('_discrete' if discrete else '')
    if conic and cone is None:
        cone = ConeSpec(aperture=2) if method == 'poisson_conic' else ConeSpec()
    return symbol, sgrid, kind, cone


def square_function(f: OperatorField, method: str, symbol=None, alpha: float = 1.0,
                    k: int = 1, sgrid=None, cone: Optional[ConeSpec] = None) -> OperatorField:
    """The column square function of f selected by a Hardy-norm method name."""
    symbol, sgrid, kind, cone = _method_setup(method, f.grid.N, symbol, alpha, k, sgrid, cone)
    if method == 'circular_radial':
        sf = _circular_scale_field(f, sgrid)
    else:
        sf = convolve_scales(f, symbol, sgrid)
    return square_fn(sf, kind, cone)


def hardy_norm(f: OperatorField, p: float, method: str, **options) -> float:
    """
    ||f||_{H^c_p} = ||f^(0)||_p + ||s^c(f)||_{L_p}, the square function chosen by `method`.

    Options (symbol, alpha, k, sgrid, cone) are passed to `square_function`.
    """
    if p < 1:
        raise DomainError(f"Hardy norms need p >= 1, got {p}.")
    mean = fft_transform(f, 'forward').zero_mode()
    return schatten_norm(mean, p) + lp_field_norm(square_function(f, method, **options), p)


def row_hardy_norm(f: OperatorField, p: float, method: str, **options) -> float:
    """Row Hardy norm: the column norm of the adjoint field."""
    return hardy_norm(f.adjoint(), p, method, **options)
