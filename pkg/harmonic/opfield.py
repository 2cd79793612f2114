"""
Lattice-sampled matrix-valued fields on the d-torus.

This module is the numerical core of the library. The torus is identified with the unit
cube [0, 1)^d and sampled on a uniform lattice of N points per axis. A field carries an
n x n complex matrix at every lattice point; its spectrum is the exact trigonometric
Fourier transform of a band-limited field.

Conventions:
    * forward transform  f^(m) = h^d * sum_s f(s) exp(-2 pi i m.s)
    * inverse transform  f(s)  = sum_m f^(m) exp(2 pi i m.s)
    * unnormalized matrix trace on M_n, so ||I_n||_p = n^(1/p).
    * arrays of matrices have the matrix axes last: shape (..., n, n).

Classes:
    GridSpec: lattice geometry (dimension, points per axis, spacing).
    OperatorField: matrix values on the lattice.
    SpectrumField: matrix Fourier coefficients on the lattice frequencies.

Functions:
    fft_transform, plancherel_pairing, spectral_pairing, abs_square, psd_sqrt,
    schatten_norm, lp_field_norm, psd_leq and small helpers.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np
from scipy import fft as sfft

from .exceptions import BandError, DomainError, NotPSDError, ShapeError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
PSD_INPUT_TOL = 1e-10
PSD_CLIP_TOL = 1e-10
PSD_ERROR_TOL = 1e-8
MAX_LATTICE_POINTS = 2 ** 18


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice on the torus T^d = [0, 1)^d with N points per axis."""
    d: int
    N: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ShapeError(f"Dimension must be 1, 2 or 3, got {self.d}.")
        if self.N < 2 or self.N & (self.N - 1):
            raise ShapeError(f"Points per axis must be a power of two >= 2, got {self.N}.")
        if self.N ** self.d > MAX_LATTICE_POINTS:
            raise ShapeError(
                f"Lattice of {self.N}^{self.d} points exceeds the budget of "
                f"{MAX_LATTICE_POINTS} points.")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N ** self.d

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(range(self.d))

    def frequencies(self) -> np.ndarray:
        """Integer frequency vectors in FFT order, shape (N,)*d + (d,)."""
        k = np.rint(sfft.fftfreq(self.N, d=1.0 / self.N)).astype(int)
        mesh = np.meshgrid(*([k] * self.d), indexing='ij')
        return np.stack(mesh, axis=-1)

    def frequency_norms(self) -> np.ndarray:
        """Euclidean norms |m| of the lattice frequencies, shape (N,)*d."""
        return np.linalg.norm(self.frequencies(), axis=-1)

    def points(self) -> np.ndarray:
        """Lattice points s = j/N, shape (N,)*d + (d,)."""
        s = np.arange(self.N) / self.N
        mesh = np.meshgrid(*([s] * self.d), indexing='ij')
        return np.stack(mesh, axis=-1)

    def index_of(self, m) -> Tuple[int, ...]:
        """Array index of frequency m (components taken modulo N)."""
        m = tuple(int(v) for v in np.atleast_1d(m))
        if len(m) != self.d:
            raise ShapeError(f"Frequency {m} does not have {self.d} components.")
        return tuple(v % self.N for v in m)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    """Entrywise a == a* within tol relative to the largest entry (absolute below 1)."""
    a = np.asarray(a)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    return bool(np.max(np.abs(a - np.conj(np.swapaxes(a, -1, -2))), initial=0.0) <= tol * scale)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def op_norm(a: np.ndarray) -> np.ndarray:
    """Largest singular value of each matrix in a batch."""
    return np.linalg.norm(np.asarray(a, dtype=complex), ord=2, axis=(-2, -1))


class OperatorField:
    """
    A matrix-valued function sampled on a GridSpec lattice.

    `values` has shape grid.shape + (n, n). When `hermitian` is True the Hermitian
    property is verified on construction.
    """

    def __init__(self, grid: GridSpec, values, hermitian: bool = False):
        values = np.asarray(values, dtype=np.complex128)
        if values.ndim != grid.d + 2 or values.shape[:grid.d] != grid.shape:
            raise ShapeError(
                f"Field values of shape {values.shape} do not fit grid {grid.shape}.")
        if values.shape[-1] != values.shape[-2]:
            raise ShapeError(f"Field values must be square matrices, got {values.shape[-2:]}.")
        if hermitian and not is_hermitian(values):
            raise DomainError("Field flagged Hermitian is not Hermitian within 1e-12.")
        self.grid = grid
        self.values = values
        self.hermitian = hermitian

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    def flat(self) -> np.ndarray:
        """Values as an array of shape (N^d, n, n) in row-major lattice order."""
        return self.values.reshape(-1, self.n, self.n)

    def adjoint(self) -> 'OperatorField':
        return OperatorField(self.grid, np.conj(np.swapaxes(self.values, -1, -2)),
                             hermitian=self.hermitian)

    def scaled(self, lam: complex) -> 'OperatorField':
        hermitian = self.hermitian and np.isreal(lam)
        return OperatorField(self.grid, lam * self.values, hermitian=hermitian)

    def translated(self, shift) -> 'OperatorField':
        """f(s - shift*h) for an integer lattice shift."""
        shift = tuple(int(v) for v in np.atleast_1d(shift))
        return OperatorField(self.grid, np.roll(self.values, shift, axis=self.grid.axes),
                             hermitian=self.hermitian)

    def conjugated(self, u: np.ndarray) -> 'OperatorField':
        """Pointwise u f(s) u* for a constant matrix u."""
        return OperatorField(self.grid, u @ self.values @ np.conj(u.T), hermitian=self.hermitian)

    def mean(self) -> np.ndarray:
        """Lattice quadrature of the field: equals the zeroth Fourier coefficient."""
        return self.grid.cell_volume * self.flat().sum(axis=0)

    def same_shape(self, other: 'OperatorField') -> bool:
        return self.grid == other.grid and self.n == other.n

    @classmethod
    def constant(cls, grid: GridSpec, a) -> 'OperatorField':
        a = np.atleast_2d(np.asarray(a, dtype=np.complex128))
        values = np.broadcast_to(a, grid.shape + a.shape).copy()
        return cls(grid, values, hermitian=is_hermitian(a))

    @classmethod
    def from_modes(cls, grid: GridSpec, modes: Dict[tuple, np.ndarray]) -> 'OperatorField':
        """Field sum_m a_m exp(2 pi i m.s) from a {m: a_m} map."""
        return fft_transform(SpectrumField.from_modes(grid, modes), 'inverse')

    def __repr__(self):
        return f"OperatorField(d={self.grid.d}, N={self.grid.N}, n={self.n})"


class SpectrumField:
    """
    Matrix Fourier coefficients of a field, indexed like the lattice in FFT order.

    The band limit `band_m` is the largest sup-norm of a frequency carrying a nonzero
    coefficient (relative threshold 1e-13 of the largest coefficient).
    """

    BAND_THRESHOLD = 1e-13

    def __init__(self, grid: GridSpec, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.ndim != grid.d + 2 or coeffs.shape[:grid.d] != grid.shape:
            raise ShapeError(
                f"Spectrum of shape {coeffs.shape} does not fit grid {grid.shape}.")
        self.grid = grid
        self.coeffs = coeffs

    @property
    def n(self) -> int:
        return self.coeffs.shape[-1]

    @property
    def band_m(self) -> int:
        magnitude = np.max(np.abs(self.coeffs), axis=(-2, -1))
        top = float(magnitude.max(initial=0.0))
        if top == 0.0:
            return 0
        active = magnitude > self.BAND_THRESHOLD * top
        sup_norms = np.max(np.abs(self.grid.frequencies()), axis=-1)
        return int(sup_norms[active].max())

    def check_band(self) -> None:
        if self.band_m >= self.grid.N // 2:
            raise BandError(
                f"Band limit {self.band_m} reaches the Nyquist frequency {self.grid.N // 2}.")

    def coefficient(self, m) -> np.ndarray:
        return self.coeffs[self.grid.index_of(m)]

    def zero_mode(self) -> np.ndarray:
        return self.coeffs[(0,) * self.grid.d]

    def multiplied(self, symbol_values: np.ndarray) -> 'SpectrumField':
        """Fourier multiplier: coefficient m scaled by symbol_values[m]."""
        return SpectrumField(self.grid, self.coeffs * symbol_values[..., None, None])

    @classmethod
    def from_modes(cls, grid: GridSpec, modes: Dict[tuple, np.ndarray]) -> 'SpectrumField':
        items = list(modes.items())
        if not items:
            raise ShapeError("At least one mode is required.")
        n = np.atleast_2d(items[0][1]).shape[-1]
        coeffs = np.zeros(grid.shape + (n, n), dtype=np.complex128)
        for m, a in items:
            coeffs[grid.index_of(m)] += np.atleast_2d(np.asarray(a, dtype=np.complex128))
        return cls(grid, coeffs)


def fft_transform(field: Union[OperatorField, SpectrumField], direction: str = 'forward'):
    """
    Entrywise discrete Fourier transform of a matrix field.

    forward: OperatorField -> SpectrumField with f^(m) = h^d sum_s f(s) e^{-2 pi i m.s}.
    inverse: SpectrumField -> OperatorField, exact trigonometric interpolation at the
    lattice points.
    """
    if direction == 'forward':
        if not isinstance(field, OperatorField):
            raise ShapeError("Forward transform expects an OperatorField.")
        coeffs = sfft.fftn(field.values, axes=field.grid.axes, norm='forward')
        return SpectrumField(field.grid, coeffs)
    if direction == 'inverse':
        if not isinstance(field, SpectrumField):
            raise ShapeError("Inverse transform expects a SpectrumField.")
        values = sfft.ifftn(field.coeffs, axes=field.grid.axes, norm='forward')
        return OperatorField(field.grid, values)
    raise DomainError(f"Unknown transform direction '{direction}'.")


def plancherel_pairing(f: OperatorField, g: OperatorField) -> np.ndarray:
    """Lattice quadrature of the operator pairing  int g(s)* f(s) ds."""
    if not f.same_shape(g):
        raise ShapeError("Plancherel pairing needs fields on the same grid with equal n.")
    return f.grid.cell_volume * np.einsum('pji,pjk->ik', np.conj(g.flat()), f.flat())


def spectral_pairing(F: SpectrumField, G: SpectrumField) -> np.ndarray:
    """Frequency-side pairing  sum_m G^(m)* F^(m)."""
    if F.grid != G.grid or F.n != G.n:
        raise ShapeError("Spectral pairing needs spectra on the same grid with equal n.")
    n = F.n
    return np.einsum('pji,pjk->ik', np.conj(G.coeffs.reshape(-1, n, n)),
                     F.coeffs.reshape(-1, n, n))


def abs_square(a: np.ndarray) -> np.ndarray:
    """|a|^2 = a* a, batched over leading axes."""
    a = np.asarray(a, dtype=np.complex128)
    return np.conj(np.swapaxes(a, -1, -2)) @ a


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """
    Square root of a (batch of) Hermitian PSD matrices by eigendecomposition.

    Eigenvalues in [-1e-8 ||a||, 0) are clipped to zero; anything more negative raises
    NotPSDError. Non-Hermitian input raises DomainError.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ShapeError(f"psd_sqrt expects square matrices, got shape {a.shape}.")
    if not is_hermitian(a, PSD_INPUT_TOL):
        raise DomainError("psd_sqrt requires a Hermitian matrix.")
    eigvals, eigvecs = np.linalg.eigh(hermitian_part(a))
    scale = np.max(np.abs(eigvals), axis=-1, keepdims=True)
    if np.any(eigvals < -PSD_ERROR_TOL * scale):
        worst = float(np.min(eigvals / np.where(scale > 0, scale, 1.0)))
        raise NotPSDError(f"Matrix is not PSD: relative eigenvalue {worst:.3e}.")
    if np.any(eigvals < -PSD_CLIP_TOL * scale):
        logger.debug("psd_sqrt: clipping eigenvalues beyond round-off level.")
    roots = np.sqrt(np.clip(eigvals, 0.0, None))
    return (eigvecs * roots[..., None, :]) @ np.conj(np.swapaxes(eigvecs, -1, -2))


def _check_exponent(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise DomainError(f"Exponent p must be >= 1 or inf, got {p}.")
    return p


def singular_values(a: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(a, dtype=np.complex128), compute_uv=False)


def schatten_norm(a: np.ndarray, p: float) -> float:
    """(sum_i sigma_i^p)^(1/p) with the unnormalized trace; p = inf gives the operator norm."""
    p = _check_exponent(p)
    sigma = singular_values(np.atleast_2d(a))
    if math.isinf(p):
        return float(sigma.max(initial=0.0))
    return float(np.sum(sigma ** p) ** (1.0 / p))


def lp_field_norm(f: OperatorField, p: float) -> float:
    """Noncommutative L_p norm on L_inf(T^d) (x) M_n: (h^d sum_s tr|f(s)|^p)^(1/p)."""
    p = _check_exponent(p)
    sigma = singular_values(f.flat())
    if math.isinf(p):
        return float(sigma.max(initial=0.0))
    return float((f.grid.cell_volume * np.sum(sigma ** p)) ** (1.0 / p))


def psd_leq(a: np.ndarray, b: np.ndarray, tol: float = 0.0) -> bool:
    """True iff b - a is PSD up to tol * (1 + ||b||_op)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if not (is_hermitian(a, PSD_INPUT_TOL) and is_hermitian(b, PSD_INPUT_TOL)):
        raise DomainError("psd_leq compares Hermitian matrices only.")
    smallest = np.linalg.eigvalsh(hermitian_part(b - a))[..., 0]
    bound = -tol * (1.0 + op_norm(b))
    return bool(np.all(smallest >= bound))
