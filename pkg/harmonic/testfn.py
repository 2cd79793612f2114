"""
Radial test symbols, scale grids and Calderón companion pairs.

The symbols are Fourier multipliers on R^d that depend on |xi| only. They are sampled on
torus frequencies by the square-function module and by the Carleson functionals.

Classes:
    RadialSymbol: closed-form radial symbols (poisson, d_poisson, riesz_poisson,
        gauss_lp, annulus_bump, poisson_deriv).
    DerivativeSymbol: the spectral derivative (2 pi i xi)^m Phi^ of a radial symbol.
    BumpSpec: the cut-off eta used by the continuous companion construction.
    ScaleGrid / DyadicLevels: quadrature nodes for d eps / eps and dyadic scale sums.
    MultiplierPair: a symbol with its companion Psi^ and measured residual.

Usage:
    from .testfn import RadialSymbol, build_companion

    pair = build_companion(RadialSymbol('annulus_bump'), 'discrete')
    print(pair.residual)
"""

import json
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special

from .exceptions import AccuracyError, ConditioningError, DegeneracyError, DomainError
from .utils import opharm_setting

logger = logging.getLogger(__name__)

SYMBOL_KINDS = ('poisson', 'd_poisson', 'riesz_poisson', 'gauss_lp', 'annulus_bump',
                'poisson_deriv')
NONDEGENERACY_TOL = 1e-8
COMPANION_TABLE_NODES = 4096
COMPANION_TABLE_RANGE = (1e-4, 1e4)
DISCRETE_LEVEL_RANGE = 64
DISCRETE_TERM_FLOOR = 1e-16
CONTINUOUS_RESIDUAL_TOL = 1e-6
DISCRETE_RESIDUAL_TOL = 1e-10
H_FLOOR = 1e-12


def _bump(u: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - u^2)) on |u| < 1, zero elsewhere; peak value 1 at u = 0."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


@dataclass(frozen=True)
class RadialSymbol:
    """
    A radial Fourier symbol Phi^(xi) = phi(|xi|).

    Symbols:
        poisson          e^{-2 pi r}
        d_poisson        2 pi r e^{-2 pi r}
        riesz_poisson    r^alpha e^{-2 pi r}
        gauss_lp         r^2 e^{-r^2}
        annulus_bump     eta(r), smooth, supported in 1/2 < r < 2
        poisson_deriv    (-2 pi r)^k e^{-2 pi r}, the k-th scale derivative eps^k d^k/d eps^k
    """
    kind: str
    alpha: float = 1.0
    order: int = 1

    def __post_init__(self):
        if self.kind not in SYMBOL_KINDS:
            raise DomainError(f"Unknown symbol kind '{self.kind}'.")
        if self.kind == 'riesz_poisson' and not self.alpha > 0:
            raise DomainError(f"riesz_poisson needs alpha > 0, got {self.alpha}.")
        if self.kind == 'poisson_deriv' and self.order < 1:
            raise DomainError(f"poisson_deriv needs order >= 1, got {self.order}.")

    @property
    def vanishes_at_origin(self) -> bool:
        return self.kind != 'poisson'

    @property
    def params(self) -> Dict[str, Any]:
        if self.kind == 'riesz_poisson':
            return {'alpha': self.alpha}
        if self.kind == 'poisson_deriv':
            return {'order': self.order}
        return {}

    @property
    def label(self) -> str:
        if self.kind == 'riesz_poisson':
            return f"riesz_poisson({self.alpha:g})"
        if self.kind == 'poisson_deriv':
            return f"poisson_deriv({self.order})"
        return self.kind

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise DomainError("Radial symbols are evaluated at r >= 0 only.")
        if self.kind == 'poisson':
            return np.exp(-2 * np.pi * r)
        if self.kind == 'd_poisson':
            return 2 * np.pi * r * np.exp(-2 * np.pi * r)
        if self.kind == 'riesz_poisson':
            return r ** self.alpha * np.exp(-2 * np.pi * r)
        if self.kind == 'gauss_lp':
            return r ** 2 * np.exp(-r ** 2)
        if self.kind == 'annulus_bump':
            return BumpSpec()(r)
        return (-2 * np.pi * r) ** self.order * np.exp(-2 * np.pi * r)

    def multiplier(self, xi: np.ndarray) -> np.ndarray:
        """Symbol values at frequency vectors xi of shape (..., d)."""
        return self(np.linalg.norm(np.asarray(xi, dtype=float), axis=-1))

    @classmethod
    def from_name(cls, name: str) -> 'RadialSymbol':
        """Parses 'd_poisson', 'riesz_poisson(1.5)' or 'poisson_deriv(2)'."""
        name = name.strip()
        if '(' in name and name.endswith(')'):
            kind, arg = name[:-1].split('(', 1)
            if kind == 'poisson_deriv':
                return cls(kind, order=int(arg))
            return cls(kind, alpha=float(arg))
        return cls(name)


def eval_symbol(sym: RadialSymbol, r: float) -> float:
    return float(sym(r))


@dataclass(frozen=True)
class DerivativeSymbol:
    """The multiplier (2 pi i xi)^m Phi^(xi) for a multi-index m."""
    base: RadialSymbol
    index: Tuple[int, ...]

    def multiplier(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1] != len(self.index):
            raise DomainError(
                f"Multi-index {self.index} does not match frequency dimension {xi.shape[-1]}.")
        factor = np.ones(xi.shape[:-1], dtype=complex)
        for axis, power in enumerate(self.index):
            factor = factor * (2j * np.pi * xi[..., axis]) ** power
        return factor * self.base.multiplier(xi)

    @property
    def label(self) -> str:
        return f"D^{self.index} {self.base.label}"


@dataclass(frozen=True)
class BumpSpec:
    """eta(r) = exp(1 - 1/(1 - u^2)), u = (r - center)/half_width."""
    center: float = 1.25
    half_width: float = 0.75

    def __call__(self, r) -> np.ndarray:
        return _bump((np.asarray(r, dtype=float) - self.center) / self.half_width)

    @property
    def support(self) -> Tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width


@dataclass(frozen=True)
class ScaleGrid:
    """
    Logarithmic scale nodes eps_k on [eps_min, eps_max] with trapezoid weights in log eps,
    so that sum_k w_k g(eps_k) approximates int g(eps) d eps / eps.
    """
    eps_min: float
    eps_max: float
    K: int
    discrete = False

    def __post_init__(self):
        if not 0 < self.eps_min < self.eps_max:
            raise DomainError(
                f"Scale grid needs 0 < eps_min < eps_max, got [{self.eps_min}, {self.eps_max}].")
        if self.K < 2:
            raise DomainError(f"Scale grid needs at least two nodes, got K={self.K}.")

    @property
    def nodes(self) -> np.ndarray:
        return np.geomspace(self.eps_min, self.eps_max, self.K)

    @property
    def weights(self) -> np.ndarray:
        step = math.log(self.eps_max / self.eps_min) / (self.K - 1)
        w = np.full(self.K, step)
        w[0] = w[-1] = step / 2
        return w

    @classmethod
    def for_companion(cls, N: int) -> 'ScaleGrid':
        return cls(1.0 / (4 * N), 8.0, 256)

    @classmethod
    def for_square_functions(cls, N: int, K: Optional[int] = None) -> 'ScaleGrid':
        return cls(2.0 ** -10 / N, 8.0, int(K or opharm_setting('SCALES')))


@dataclass(frozen=True)
class DyadicLevels:
    """Dyadic scales 2^{-j}, j = 0..max_level, each with weight 1."""
    max_level: int
    discrete = True

    def __post_init__(self):
        if self.max_level < 0:
            raise DomainError(f"max_level must be >= 0, got {self.max_level}.")

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.max_level + 1)

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 ** -self.levels.astype(float)

    @property
    def weights(self) -> np.ndarray:
        return np.ones(self.max_level + 1)

    @property
    def K(self) -> int:
        return self.max_level + 1

    @classmethod
    def for_grid(cls, N: int) -> 'DyadicLevels':
        """Deepest level keeps 2^{-j} >= 1/(2N)."""
        return cls(int(math.log2(2 * N)))


Scales = Union[ScaleGrid, DyadicLevels]


def lattice_radii(N: int) -> np.ndarray:
    """Test radii 1 <= r <= N/2: the integers plus a geometric fill-in."""
    return np.unique(np.concatenate([np.arange(1, N // 2 + 1, dtype=float),
                                     np.geomspace(1.0, N / 2, 97)]))


@dataclass
class NondegeneracyReport:
    mode: str
    tol: float
    radii: List[float]
    failing: List[float]
    witnesses: Dict[float, Any]

    @property
    def passed(self) -> bool:
        return not self.failing

    @property
    def verdict(self) -> str:
        return "pass on tested set" if self.passed else "fail"


def check_nondegenerate(sym, mode: str, radii: Sequence[float],
                        tol: float = NONDEGENERACY_TOL) -> NondegeneracyReport:
    """
    Scans for nondegeneracy witnesses of a radial symbol at each test radius.

    continuous: some eps > 0 with |Phi^(eps r)| > tol.
    torus: the same with eps in (0, 1).
    discrete: a window (a, 2a] of scales on which |Phi^(eps r)| > tol throughout; window
        starts are scanned on the lattice 2^{k/8}.
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise DomainError("Nondegeneracy test set must be nonempty and exclude 0.")
    if mode not in ('continuous', 'discrete', 'torus'):
        raise DomainError(f"Unknown nondegeneracy mode '{mode}'.")

    failing, witnesses = [], {}
    for r in radii:
        if mode in ('continuous', 'torus'):
            eps = np.geomspace(1e-6, 1e6, 2401)
            if mode == 'torus':
                eps = eps[eps < 1.0]
            values = np.abs(sym(eps * r))
            best = int(np.argmax(values))
            if values[best] > tol:
                witnesses[r] = float(eps[best])
            else:
                failing.append(r)
        else:
            starts = 2.0 ** (np.arange(-8 * 24, 8 * 24 + 1) / 8.0)
            inner = 2.0 ** (np.arange(1, 65) / 64.0)
            window_min = np.abs(sym(np.outer(starts, inner) * r)).min(axis=1)
            good = np.flatnonzero(window_min > tol)
            if good.size:
                a = float(starts[good[np.argmax(window_min[good])]])
                witnesses[r] = (a, 2 * a)
            else:
                failing.append(r)
    report = NondegeneracyReport(mode, tol, radii, failing, witnesses)
    logger.debug("Nondegeneracy (%s) of %s: %s", mode, getattr(sym, 'label', sym),
                 report.verdict)
    return report


@dataclass
class MultiplierPair:
    """A test symbol Phi^ with its companion Psi^ and the measured reproducing residual."""
    phi: RadialSymbol
    mode: str
    xi_grid: np.ndarray
    psi_values: np.ndarray
    residual: float
    tolerance: float
    eta: Optional[BumpSpec] = None
    h: Optional[float] = None

    @property
    def valid(self) -> bool:
        return self.residual <= self.tolerance

    def psi(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.mode == 'continuous':
            return np.where(r > 0, self.phi(r) * self.eta(r) / self.h, 0.0)
        return discrete_psi(self.phi, r)

    def psi_multiplier(self, xi: np.ndarray) -> np.ndarray:
        return self.psi(np.linalg.norm(np.asarray(xi, dtype=float), axis=-1))

    def export(self) -> Dict[str, Any]:
        return {
            'phi_kind': self.phi.kind,
            'params': self.phi.params,
            'mode': self.mode,
            'xi_grid': self.xi_grid.tolist(),
            'psi_values': self.psi_values.tolist(),
            'residual': self.residual,
        }

    def to_json(self) -> str:
        return json.dumps(self.export())

    @property
    def companion(self) -> 'CompanionSymbol':
        return CompanionSymbol(self)


class CompanionSymbol:
    """Psi^ of a pair, usable wherever a symbol with `multiplier` is expected."""

    def __init__(self, pair: MultiplierPair):
        self.pair = pair

    def __call__(self, r) -> np.ndarray:
        return self.pair.psi(r)

    def multiplier(self, xi: np.ndarray) -> np.ndarray:
        return self.pair.psi_multiplier(xi)

    @property
    def label(self) -> str:
        return f"psi[{self.pair.phi.label}, {self.pair.mode}]"


def _dyadic_energy(sym, r: np.ndarray) -> np.ndarray:
    """sum_j |Phi^(2^j r)|^2 over |j| <= 64, terms below 1e-16 dropped."""
    r = np.asarray(r, dtype=float)
    j = np.arange(-DISCRETE_LEVEL_RANGE, DISCRETE_LEVEL_RANGE + 1, dtype=float)
    terms = np.abs(sym(np.multiply.outer(r, 2.0 ** j))) ** 2
    return np.where(terms >= DISCRETE_TERM_FLOOR, terms, 0.0).sum(axis=-1)


def discrete_psi(sym, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    energy = _dyadic_energy(sym, r)
    safe = np.where(energy > 0, energy, 1.0)
    return np.where(energy > 0, sym(r) / safe, 0.0)


def companion_normalizer(sym, eta: BumpSpec) -> float:
    """
    h = int |Phi^(eps r)|^2 eta(eps r) d eps / eps by Gauss-Legendre in log eps. The
    substitution u = eps r removes r, so h is one number for every r > 0.
    """
    lo, hi = eta.support
    nodes, weights = np.polynomial.legendre.leggauss(96)
    t = 0.5 * (nodes + 1.0) * math.log(hi / lo) + math.log(lo)
    w = 0.5 * math.log(hi / lo) * weights
    u = np.exp(t)
    return float(np.dot(w, np.abs(sym(u)) ** 2 * eta(u)))


def build_companion(phi: RadialSymbol, mode: str, eta: Optional[BumpSpec] = None,
                    N: int = 32, tolerance: Optional[float] = None) -> MultiplierPair:
    """
    Constructs the Calderón companion of a nondegenerate symbol.

    continuous: Psi^ = Phi^ eta / h with the scale-invariant normalizer h.
    discrete: Psi^ = Phi^ / sum_j |Phi^(2^j xi)|^2 in closed form.

    Raises:
        DegeneracyError: phi fails the nondegeneracy scan for the requested mode.
        ConditioningError: h falls below 1e-12.
    """
    if mode not in ('continuous', 'discrete'):
        raise DomainError(f"Companion mode must be continuous or discrete, got '{mode}'.")
    radii = lattice_radii(N)
    report = check_nondegenerate(phi, mode, radii)
    if not report.passed:
        raise DegeneracyError(
            f"{getattr(phi, 'label', phi)} is degenerate in {mode} mode at "
            f"{len(report.failing)} test radii.")

    xi_grid = np.geomspace(*COMPANION_TABLE_RANGE, COMPANION_TABLE_NODES)
    if mode == 'continuous':
        eta = eta or BumpSpec()
        h = companion_normalizer(phi, eta)
        if h < H_FLOOR:
            raise ConditioningError(
                f"Companion normalizer h = {h:.3e} is below {H_FLOOR}.")
        pair = MultiplierPair(phi, mode, xi_grid, np.zeros_like(xi_grid), math.inf,
                              tolerance or CONTINUOUS_RESIDUAL_TOL, eta=eta, h=h)
        pair.psi_values = pair.psi(xi_grid)
        pair.residual = reproducing_residual(pair, radii, ScaleGrid.for_companion(N))
    else:
        pair = MultiplierPair(phi, mode, xi_grid, discrete_psi(phi, xi_grid), math.inf,
                              tolerance or DISCRETE_RESIDUAL_TOL)
        pair.residual = reproducing_residual(pair, radii)
    logger.info("Companion of %s (%s): residual %.3e", phi.label, mode, pair.residual)
    return pair


def reproducing_residual(pair: MultiplierPair, radii: Sequence[float],
                         sgrid: Optional[Scales] = None) -> float:
    """
    max_r |sum_k w_k Phi^(eps_k r) conj(Psi^(eps_k r)) - 1|.

    For discrete pairs without explicit levels the sum runs over 2^j, |j| <= 64.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise DomainError("Residual test radii must exclude 0.")
    if pair.mode == 'discrete' and sgrid is None:
        nodes = 2.0 ** np.arange(-DISCRETE_LEVEL_RANGE, DISCRETE_LEVEL_RANGE + 1, dtype=float)
        weights = np.ones_like(nodes)
    else:
        if sgrid is None:
            raise DomainError("Continuous residual needs a scale grid.")
        nodes, weights = sgrid.nodes, sgrid.weights
    u = np.multiply.outer(radii, nodes)
    sums = (weights * pair.phi(u) * np.conj(pair.psi(u))).sum(axis=-1)
    return float(np.max(np.abs(sums - 1.0)))


def riesz_poisson_closed_form(alpha: float, s: float, d: int) -> float:
    """Exact I^alpha(P)(s) for d = 1 and d = 2 (real alpha > 0)."""
    r = abs(float(s)) if np.ndim(s) == 0 else float(np.linalg.norm(s))
    if d == 1:
        return float(2 * special.gamma(alpha + 1) / (2 * np.pi) ** (alpha + 1)
                     * ((1 - 1j * r) ** (-(alpha + 1))).real)
    if d == 2:
        a, b = 2 * np.pi, 2 * np.pi * r
        rho = math.hypot(a, b)
        return float(2 * np.pi * special.gamma(alpha + 2) * rho ** (-(alpha + 2))
                     * special.lpmv(0, alpha + 1, a / rho))
    raise DomainError(f"Closed form available for d = 1, 2 only, got d={d}.")


def riesz_poisson_spatial(alpha: float, s, d: int, tol: float = 1e-12,
                          max_panels: int = 200000) -> float:
    """
    I^alpha(P)(s) = int |xi|^alpha e^{-2 pi |xi|} e^{2 pi i s.xi} d xi by quadrature.

    d = 1: Fourier-weighted quad on [0, inf). d = 2: radial Hankel reduction
    2 pi int_0^R rho^{alpha+1} e^{-2 pi rho} J0(2 pi rho |s|) d rho on Gauss-Legendre panels,
    R chosen so that the tail bound 2 pi R^{alpha+1} e^{-2 pi R} / (2 pi - (alpha+1)/R)
    is below tol.

    Raises:
        AccuracyError: the quadrature cannot reach tol within its budget.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be > 0, got {alpha}.")
    r = abs(float(s)) if np.ndim(s) == 0 else float(np.linalg.norm(s))
    if d == 1:
        def integrand(x):
            return x ** alpha * np.exp(-2 * np.pi * x)

        if r == 0.0:
            value, err = integrate.quad(integrand, 0, np.inf, epsabs=tol, limit=200)
        else:
            value, err = integrate.quad(integrand, 0, np.inf, weight='cos',
                                        wvar=2 * np.pi * r, epsabs=tol, limlst=200)
        if not np.isfinite(value) or err > max(100 * tol, 1e-10):
            raise AccuracyError(f"quad error estimate {err:.2e} exceeds the target at s={r}.")
        return float(2 * value)
    if d != 2:
        raise DomainError(f"riesz_poisson_spatial supports d = 1, 2 only, got d={d}.")

    def tail(R):
        return 2 * np.pi * R ** (alpha + 1) * np.exp(-2 * np.pi * R) / \
            (2 * np.pi - (alpha + 1) / R)

    R = max(1.0, (alpha + 2) / np.pi)
    while tail(R) > tol:
        R *= 1.25
        if R > 1e3:
            raise AccuracyError(f"Tail bound cannot reach {tol} for alpha={alpha}.")
    width = min(0.25, 0.25 / r) if r > 0 else 0.25
    panels = int(math.ceil(R / width))
    if panels > max_panels:
        raise AccuracyError(f"{panels} quadrature panels needed at |s|={r}, budget {max_panels}.")
    x, w = np.polynomial.legendre.leggauss(24)
    edges = np.linspace(0.0, R, panels + 1)
    half = 0.5 * np.diff(edges)
    rho = (edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    values = rho ** (alpha + 1) * np.exp(-2 * np.pi * rho) * special.j0(2 * np.pi * rho * r)
    return float(2 * np.pi * np.dot(weights, values))


@dataclass
class DecayReport:
    radii: List[float]
    values: List[float]
    max_value: float
    trend_slope: float
    bounded: bool


def bessel_decay_report(alpha: float, sigma: float, radii: Sequence[float],
                        d: int = 1) -> DecayReport:
    """
    g(r) = (1 + r^2)^{(d + sigma)/2} |I^alpha(P)(s)| at |s| = r.

    Bounded when the log-log slope of g over the last decade of radii is at most 0.05.
    """
    if d not in (1, 2):
        raise DomainError(f"Decay report supports d = 1, 2 only, got d={d}.")
    radii = [float(r) for r in radii]
    values = [(1 + r * r) ** ((d + sigma) / 2) * abs(riesz_poisson_spatial(alpha, r, d))
              for r in radii]
    r_arr, g_arr = np.asarray(radii), np.asarray(values)
    tail = (r_arr >= r_arr.max() / 10) & (g_arr > 0)
    slope = 0.0
    if tail.sum() >= 2:
        slope = float(np.polyfit(np.log(r_arr[tail]), np.log(g_arr[tail]), 1)[0])
    bounded = bool(np.all(np.isfinite(g_arr)) and slope <= 0.05)
    return DecayReport(radii, values, float(g_arr.max()), slope, bounded)


@dataclass
class KernelDecayReport:
    observed_constant: float
    eps: List[float]
    radii: List[float]


def kernel_decay_report(alpha: float, sigma: float, d: int, eps: Sequence[float],
                        radii: Sequence[float]) -> KernelDecayReport:
    """
    Observed C in |Phi_eps(s)| <= C min(eps^{-d}, eps^sigma / |s|^{d+sigma}) for
    Phi = I^alpha(P), Phi_eps(s) = eps^{-d} Phi(s / eps).
    """
    worst = 0.0
    for e in eps:
        for r in radii:
            kernel = e ** -d * abs(riesz_poisson_closed_form(alpha, r / e, d))
            bound = min(e ** -d, e ** sigma / r ** (d + sigma)) if r > 0 else e ** -d
            worst = max(worst, kernel / bound)
    return KernelDecayReport(worst, list(eps), list(radii))


def cz_symbol_bound(sym, sgrid: Scales, radii: Sequence[float]) -> Dict[str, Any]:
    """sup over radii of (sum_k w_k |Phi^(eps_k r)|^2)^{1/2}."""
    radii = np.asarray(radii, dtype=float)
    per_radius = np.sqrt((sgrid.weights * np.abs(sym(np.multiply.outer(radii, sgrid.nodes)))
                          ** 2).sum(axis=-1))
    return {
        'symbol': getattr(sym, 'label', str(sym)),
        'sup': float(per_radius.max()),
        'per_radius': per_radius.tolist(),
    }
