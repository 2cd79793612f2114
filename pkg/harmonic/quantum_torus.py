"""
Twisted Fourier algebra of the quantum torus T^d_theta and its transference to
matrix-valued fields on the commutative torus.

Elements are finitely supported series x = sum_m a_m U^m with U^m = U_1^{m_1} ... U_d^{m_d}
and U_k U_j = e^{2 pi i theta_kj} U_j U_k. Normal ordering gives

    U^m U^n = lambda(m, n) U^{m+n},   lambda(m, n) = exp(2 pi i sum_{j<k} theta_kj m_k n_j)
    (U^m)*  = mu(m) U^{-m},           mu(m)      = exp(2 pi i sum_{j<k} theta_kj m_k m_j)

and both phases are certified against the clock-and-shift matrices by `certify_phases`.
For rational theta_21 = p/q in d = 2 the clock U_1 = diag(w^k) and the cyclic shift U_2
(ones at [k, k+1 mod q]) satisfy U_2 U_1 = w U_1 U_2 with w = e^{2 pi i p/q}.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import BandError, DegeneracyError, DomainError, ShapeError, UnsupportedError
from .opfield import (GridSpec, OperatorField, SpectrumField, fft_transform, lp_field_norm,
                      schatten_norm)
from .square_functions import square_function
from .testfn import RadialSymbol, check_nondegenerate, lattice_radii

logger = logging.getLogger(__name__)

QT_HARDY_METHODS = ('poisson_radial', 'circular_radial', 'phi_radial', 'phi_radial_discrete',
                    'phi_conic')
TRACES = ('matrix', 'normalized')
Number = Union[int, float, Fraction, str]


def _exact(value: Number) -> Union[Fraction, float]:
    """Fractions for exact input (int, Fraction, 'p/q'); floats stay floats unless dyadic."""
    if isinstance(value, (int, Fraction, str)):
        return Fraction(value)
    frac = Fraction(float(value))
    return frac if frac.denominator <= 1024 else float(value)


def _turns_to_phase(turns) -> complex:
    if isinstance(turns, Fraction):
        turns = turns - math.floor(turns)
    return complex(np.exp(2j * np.pi * float(turns)))


class Theta:
    """Real skew-symmetric d x d matrix; entries are Fractions when rational."""

    def __init__(self, entries: Sequence[Sequence[Number]]):
        rows = tuple(tuple(_exact(v) for v in row) for row in entries)
        d = len(rows)
        if d == 0 or any(len(row) != d for row in rows):
            raise ShapeError("Theta must be a nonempty square matrix.")
        for j in range(d):
            if rows[j][j] != 0:
                raise DomainError(f"Theta must vanish on the diagonal (entry {j},{j}).")
            for k in range(j + 1, d):
                if rows[k][j] != -rows[j][k]:
                    raise DomainError(f"Theta is not skew-symmetric at ({k},{j}).")
        self.entries = rows

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def rational(self) -> bool:
        return all(isinstance(v, Fraction) for row in self.entries for v in row)

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for row in self.entries for v in row)

    @classmethod
    def planar(cls, theta_21: Number) -> 'Theta':
        value = _exact(theta_21)
        return cls([[0, -value], [value, 0]])

    @classmethod
    def zero(cls, d: int) -> 'Theta':
        return cls([[0] * d for _ in range(d)])

    def _bilinear(self, m, n):
        total = Fraction(0) if self.rational else 0.0
        for k in range(self.d):
            for j in range(k):
                total += self.entries[k][j] * int(m[k]) * int(n[j])
        return total

    def product_phase(self, m, n) -> complex:
        """lambda(m, n) with U^m U^n = lambda(m, n) U^{m+n}."""
        return _turns_to_phase(self._bilinear(m, n))

    def adjoint_phase(self, m) -> complex:
        """mu(m) with (U^m)* = mu(m) U^{-m}."""
        return _turns_to_phase(self._bilinear(m, m))

    def __eq__(self, other):
        return isinstance(other, Theta) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"Theta({[[str(v) for v in row] for row in self.entries]})"


Mode = Tuple[int, ...]


class QTElement:
    """A finitely supported twisted Fourier series sum_m a_m U^m."""

    def __init__(self, theta: Theta, coeffs: Dict[Mode, complex]):
        self.theta = theta
        clean = {}
        for m, c in coeffs.items():
            m = tuple(int(v) for v in m)
            if len(m) != theta.d:
                raise ShapeError(f"Mode {m} does not have {theta.d} components.")
            if c != 0:
                clean[m] = clean.get(m, 0j) + complex(c)
        self.coeffs = clean

    @classmethod
    def unit(cls, theta: Theta, scalar: complex = 1.0) -> 'QTElement':
        return cls(theta, {(0,) * theta.d: scalar})

    @classmethod
    def monomial(cls, theta: Theta, m: Sequence[int], scalar: complex = 1.0) -> 'QTElement':
        return cls(theta, {tuple(m): scalar})

    @property
    def support(self):
        return sorted(self.coeffs)

    @property
    def band(self) -> int:
        return max((max(abs(v) for v in m) for m in self.coeffs), default=0)

    def coefficient(self, m: Sequence[int]) -> complex:
        return self.coeffs.get(tuple(m), 0j)

    def scaled(self, lam: complex) -> 'QTElement':
        return QTElement(self.theta, {m: lam * c for m, c in self.coeffs.items()})

    def __add__(self, other: 'QTElement') -> 'QTElement':
        _same_theta(self, other)
        total = dict(self.coeffs)
        for m, c in other.coeffs.items():
            total[m] = total.get(m, 0j) + c
        return QTElement(self.theta, total)

    def __sub__(self, other: 'QTElement') -> 'QTElement':
        return self + other.scaled(-1)

    def l2_norm(self) -> float:
        """(sum_m |a_m|^2)^{1/2}, the norm in L_2 of the normalized trace."""
        return math.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def __repr__(self):
        return f"QTElement(d={self.theta.d}, support={len(self.coeffs)})"


def _same_theta(x: QTElement, y: QTElement) -> None:
    if x.theta != y.theta:
        raise DomainError("Quantum torus elements live over different theta.")


def qt_mul(x: QTElement, y: QTElement) -> QTElement:
    _same_theta(x, y)
    out: Dict[Mode, complex] = {}
    for m, a in x.coeffs.items():
        for n, b in y.coeffs.items():
            key = tuple(i + j for i, j in zip(m, n))
            out[key] = out.get(key, 0j) + a * b * x.theta.product_phase(m, n)
    return QTElement(x.theta, out)


def qt_adjoint(x: QTElement) -> QTElement:
    return QTElement(x.theta, {
        tuple(-v for v in m): np.conj(a) * x.theta.adjoint_phase(m)
        for m, a in x.coeffs.items()
    })


def qt_trace(x: QTElement) -> complex:
    """The normalized trace tau(x) = a_0."""
    return x.coefficient((0,) * x.theta.d)


def qt_fourier(x: QTElement, m: Sequence[int]) -> complex:
    """x^(m) = tau((U^m)* x)."""
    return qt_trace(qt_mul(qt_adjoint(QTElement.monomial(x.theta, m)), x))


def qt_poisson(x: QTElement, r: float) -> QTElement:
    """P_r(x) = sum_m a_m r^{|m|} U^m with the Euclidean |m|."""
    if not 0 <= r < 1:
        raise DomainError(f"Poisson radius must lie in [0, 1), got {r}.")
    return QTElement(x.theta, {m: a * r ** float(np.linalg.norm(m))
                               for m, a in x.coeffs.items()})


def qt_poisson_derivative(x: QTElement, r: float) -> QTElement:
    """d/dr P_r(x) = sum_m a_m |m| r^{|m| - 1} U^m."""
    if not 0 <= r < 1:
        raise DomainError(f"Poisson radius must lie in [0, 1), got {r}.")
    out = {}
    for m, a in x.coeffs.items():
        size = float(np.linalg.norm(m))
        if size > 0:
            out[m] = a * size * r ** (size - 1)
    return QTElement(x.theta, out)


def qt_multiplier(x: QTElement, fn: Callable[[np.ndarray], np.ndarray]) -> QTElement:
    """Coefficient multiplier a_m -> fn(m) a_m; fn receives the modes as an (k, d) array."""
    modes = x.support
    if not modes:
        return QTElement(x.theta, {})
    factors = np.asarray(fn(np.asarray(modes, dtype=float)))
    return QTElement(x.theta, {m: x.coeffs[m] * complex(f) for m, f in zip(modes, factors)})


@dataclass
class ClockShiftRep:
    """Unitaries U_1..U_d of size q realizing the commutation relations of theta."""
    theta: Theta
    q: int
    p: int
    generators: Tuple[np.ndarray, ...]

    def unitary(self, m: Sequence[int]) -> np.ndarray:
        """rep(U^m) = rep(U_1)^{m_1} ... rep(U_d)^{m_d}."""
        if self.q == 1:
            return np.ones((1, 1), dtype=np.complex128)
        a, b = int(m[0]), int(m[1])
        k = np.arange(self.q)
        clock = np.exp(2j * np.pi * ((self.p * a * k) % self.q) / self.q)
        shift = np.zeros((self.q, self.q), dtype=np.complex128)
        shift[k, (k + b) % self.q] = 1.0
        return clock[:, None] * shift

    def __call__(self, x: QTElement) -> np.ndarray:
        out = np.zeros((self.q, self.q), dtype=np.complex128)
        for m, a in x.coeffs.items():
            out += a * self.unitary(m)
        return out

    def commutation_residual(self) -> float:
        if self.theta.d != 2:
            return 0.0
        u1, u2 = self.generators
        phase = _turns_to_phase(self.theta.entries[1][0])
        return float(np.max(np.abs(u2 @ u1 - phase * (u1 @ u2))))


def clock_shift_rep(theta: Theta) -> ClockShiftRep:
    """
    Clock-and-shift representation for d = 2 and rational theta_21 = p/q, or the trivial
    1 x 1 representation when theta = 0 in any dimension.

    Raises:
        UnsupportedError: theta is irrational or d != 2 with theta nonzero.
    """
    if theta.is_zero:
        ones = tuple(np.ones((1, 1), dtype=np.complex128) for _ in range(theta.d))
        return ClockShiftRep(theta, 1, 0, ones)
    if theta.d != 2:
        raise UnsupportedError("Matrix representations need d = 2 for nonzero theta.")
    if not theta.rational:
        raise UnsupportedError("Matrix representations need a rational theta.")
    value = theta.entries[1][0]
    q, p = value.denominator, value.numerator % value.denominator
    rep = ClockShiftRep(theta, q, p, ())
    rep.generators = (rep.unitary((1, 0)), rep.unitary((0, 1)))
    logger.debug("Clock-shift representation of size %d, residual %.2e", q,
                 rep.commutation_residual())
    return rep


def certify_phases(theta: Theta, rep: Optional[ClockShiftRep] = None,
                   window: Optional[int] = None) -> Dict[str, float]:
    """
    Compares the normal-ordering phases with matrix products over modes |m|_inf < window
    (default q): rep(U^m) rep(U^n) against lambda(m, n) rep(U^{m+n}), and rep(U^m)*
    against mu(m) rep(U^{-m}).
    """
    rep = rep or clock_shift_rep(theta)
    window = window or max(rep.q, 2)
    modes = list(product(range(-window + 1, window), repeat=theta.d))
    unitaries = {m: rep.unitary(m) for m in modes}
    product_residual = 0.0
    adjoint_residual = 0.0
    for m in modes:
        um = unitaries[m]
        minus = tuple(-v for v in m)
        adjoint_residual = max(adjoint_residual, float(np.max(np.abs(
            np.conj(um.T) - theta.adjoint_phase(m) * rep.unitary(minus)))))
        for n in modes:
            total = tuple(i + j for i, j in zip(m, n))
            expected = theta.product_phase(m, n) * rep.unitary(total)
            product_residual = max(product_residual,
                                   float(np.max(np.abs(um @ unitaries[n] - expected))))
    passed = product_residual <= 1e-10 and adjoint_residual <= 1e-10
    if not passed:
        logger.warning("Phase certification failed: product %.2e, adjoint %.2e",
                       product_residual, adjoint_residual)
    return {'product_residual': product_residual, 'adjoint_residual': adjoint_residual,
            'passed': passed, 'window': window}


def _check_grid(theta: Theta, grid: GridSpec) -> None:
    if grid.d != theta.d:
        raise ShapeError(f"Grid dimension {grid.d} differs from theta dimension {theta.d}.")


def qt_transfer(x: QTElement, grid: GridSpec, rep: ClockShiftRep) -> OperatorField:
    """x~(z) = sum_m a_m z^m rep(U^m) sampled on the lattice."""
    _check_grid(x.theta, grid)
    if x.band >= grid.N // 2:
        raise BandError(f"Element band {x.band} reaches the Nyquist frequency {grid.N // 2}.")
    coeffs = np.zeros(grid.shape + (rep.q, rep.q), dtype=np.complex128)
    for m, a in x.coeffs.items():
        coeffs[grid.index_of(m)] += a * rep.unitary(m)
    return fft_transform(SpectrumField(grid, coeffs), 'inverse')


def _band_modes(grid: GridSpec):
    freqs = grid.frequencies().reshape(-1, grid.d)
    return [tuple(int(v) for v in m) for m in freqs]


def qt_from_field(F: OperatorField, rep: ClockShiftRep, theta: Optional[Theta] = None,
                  tol: float = 1e-13) -> QTElement:
    """Coefficients a_m = tr(rep(U^m)* F^(m)) / q of the transference range component."""
    theta = theta or rep.theta
    if F.n != rep.q:
        raise ShapeError(f"Field matrices of size {F.n} do not match representation size {rep.q}.")
    spectrum = fft_transform(F, 'forward')
    coeffs = {}
    for m in _band_modes(F.grid):
        block = spectrum.coefficient(m)
        value = np.trace(np.conj(rep.unitary(m).T) @ block) / rep.q
        coeffs[m] = complex(value)
    top = max((abs(c) for c in coeffs.values()), default=0.0)
    return QTElement(theta, {m: c for m, c in coeffs.items() if abs(c) > tol * top})


def qt_cond_expectation(F: OperatorField, rep: ClockShiftRep) -> OperatorField:
    """
    Conditional expectation onto the transferred algebra: each Fourier coefficient F^(m)
    is projected onto the line spanned by rep(U^m) in the Hilbert-Schmidt inner product.

    When q divides N the projected fields form a subalgebra of the lattice fields and E is
    contractive in every L_p. Otherwise frequencies wrap mod N while rep(U^m) wraps mod q,
    and only the L_2 contraction survives.
    """
    if F.n != rep.q:
        raise ShapeError(f"Field matrices of size {F.n} do not match representation size {rep.q}.")
    if F.grid.N % rep.q:
        logger.debug("q = %d does not divide N = %d; E is an L_2 projection only", rep.q,
                     F.grid.N)
    spectrum = fft_transform(F, 'forward')
    projected = np.zeros_like(spectrum.coeffs)
    for m in _band_modes(F.grid):
        u = rep.unitary(m)
        idx = F.grid.index_of(m)
        projected[idx] = np.trace(np.conj(u.T) @ spectrum.coeffs[idx]) / rep.q * u
    return fft_transform(SpectrumField(F.grid, projected), 'inverse')


def _trace_factor(trace: str, q: int, p: float) -> float:
    if trace not in TRACES:
        raise DomainError(f"Unknown trace convention '{trace}'.")
    if trace == 'matrix' or math.isinf(p):
        return 1.0
    return q ** (-1.0 / p)


def qt_lp_norm(x: QTElement, p: float, grid: GridSpec, rep: ClockShiftRep,
               trace: str = 'matrix') -> float:
    """||x~||_p of the transferred field; 'normalized' rescales to tau(1) = 1."""
    return lp_field_norm(qt_transfer(x, grid, rep), p) * _trace_factor(trace, rep.q, p)


def qt_hardy_norm(x: QTElement, p: float, method: str, grid: GridSpec, rep: ClockShiftRep,
                  symbol: Optional[RadialSymbol] = None, sgrid=None, trace: str = 'matrix',
                  check: bool = True) -> float:
    """
    ||tau(x) 1||_p + ||s^c(x)||_p, the square function computed by transference: the multiplier
    Phi~_eps(x) = sum_m Phi^(eps m) a_m U^m transfers to Phi_eps * x~.

    'phi_conic' is the quantum analogue of the conic square function, obtained by
    transferring the commutative conic square function.

    Raises:
        DegeneracyError: the symbol has no nondegeneracy witness on the lattice radii.
    """
    if method not in QT_HARDY_METHODS:
        raise DomainError(f"Unknown quantum Hardy norm method '{method}'.")
    if p < 1:
        raise DomainError(f"Hardy norms need p >= 1, got {p}.")
    if check and method.startswith('phi'):
        discrete = method.endswith('_discrete')
        sym = symbol or RadialSymbol('annulus_bump' if discrete else 'd_poisson')
        report = check_nondegenerate(sym, 'discrete' if discrete else 'torus',
                                     lattice_radii(grid.N))
        if not report.passed:
            raise DegeneracyError(f"{sym.label} has no witness at {len(report.failing)} radii.")
    field = qt_transfer(x, grid, rep)
    square = square_function(field, method, symbol=symbol, sgrid=sgrid)
    mean = schatten_norm(qt_trace(x) * np.eye(rep.q), p)
    return (mean + lp_field_norm(square, p)) * _trace_factor(trace, rep.q, p)
