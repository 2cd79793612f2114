"""
Corpus generation and norm-equivalence experiments.

An experiment evaluates pairs of competing norms (method A, method B) on every field of
a seeded corpus and every exponent p, and records the ratios A/B. The theorems behind
each kind assert that the ratios stay in a bounded band; the bands are measured and
reported, never asserted. Only exact identities are enforced (non-finite ratios and the
closed-form p = 2 Poisson identity), and a violation raises InvariantViolation.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .bmo_carleson import (CubeFamily, bmo_norm, carleson_norm, discrete_carleson_norm,
                           poisson_bmo_norm)
from .exceptions import ConfigurationError, HarmonicError, InvariantViolation
from .opfield import (GridSpec, OperatorField, SpectrumField, fft_transform, lp_field_norm,
                      schatten_norm)
from .quantum_torus import (QT_HARDY_METHODS, QTElement, Theta, clock_shift_rep,
                            qt_hardy_norm, qt_transfer)
from .square_functions import (HARDY_METHODS, _sqrt_field, radial_conic_domination_check,
                               square_function)
from .testfn import RadialSymbol, ScaleGrid, build_companion
from .utils import format_p, make_rng, opharm_setting, parse_p

logger = logging.getLogger(__name__)

EXPERIMENT_KINDS = ('hardy_equiv', 'hardy_equiv_discrete', 'carleson', 'bmo_poisson',
                    'radial_conic', 'qt_hardy')

DEFAULT_METHOD_PAIRS = {
    'hardy_equiv': [('phi_radial', 'poisson_radial'), ('phi_conic', 'poisson_conic'),
                    ('poisson_conic', 'poisson_radial'), ('riesz_poisson', 'poisson_radial'),
                    ('circular_radial', 'poisson_radial'), ('phi_conic', 'phi_radial')],
    'hardy_equiv_discrete': [('phi_radial_discrete', 'phi_radial'),
                             ('phi_conic_discrete', 'phi_conic'),
                             ('phi_conic_discrete', 'phi_radial_discrete')],
    'carleson': [('carleson', 'bmo_squared'), ('carleson_discrete', 'carleson')],
    'bmo_poisson': [('poisson_bmo', 'bmo')],
    'radial_conic': [('radial', 'conic_derivatives')],
    'qt_hardy': [('phi_radial', 'poisson_radial'), ('phi_radial_discrete', 'poisson_radial')],
}
KIND_METHODS = {
    'hardy_equiv': set(HARDY_METHODS),
    'hardy_equiv_discrete': set(HARDY_METHODS),
    'carleson': {'carleson', 'carleson_discrete', 'bmo_squared', 'bmo'},
    'bmo_poisson': {'poisson_bmo', 'bmo'},
    'radial_conic': {'radial', 'conic_derivatives'},
    'qt_hardy': set(QT_HARDY_METHODS),
}
P2_IDENTITY_TOL = 1e-3


@dataclass
class ExperimentConfig:
    """Parameters of one experiment run; JSON config files mirror these field names."""
    kind: str = 'hardy_equiv'
    seed: int = field(default_factory=lambda: int(opharm_setting('SEED')))
    d: int = field(default_factory=lambda: int(opharm_setting('D')))
    N: int = field(default_factory=lambda: int(opharm_setting('N')))
    n: int = field(default_factory=lambda: int(opharm_setting('n')))
    band_m: int = field(default_factory=lambda: int(opharm_setting('BAND_M')))
    p_list: List[Union[float, str]] = field(
        default_factory=lambda: list(opharm_setting('P_LIST')))
    corpus_size: int = field(default_factory=lambda: int(opharm_setting('CORPUS_SIZE')))
    scales: int = field(default_factory=lambda: int(opharm_setting('SCALES')))
    symbol: str = 'd_poisson'
    discrete_symbol: str = 'annulus_bump'
    alpha: float = 1.0
    theta: str = field(default_factory=lambda: str(opharm_setting('THETA')))
    zero_mean: bool = True
    hermitian: bool = False
    scale: float = 1.0
    adjoint: bool = False
    threads: int = field(default_factory=lambda: int(opharm_setting('THREADS')))
    methods: Optional[List[Tuple[str, str]]] = None

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigurationError(f"Unknown experiment kind '{self.kind}'.")
        if self.corpus_size < 1:
            raise ConfigurationError(f"corpus_size must be >= 1, got {self.corpus_size}.")
        if not 0 <= self.band_m < self.N // 2:
            raise ConfigurationError(
                f"band_m must satisfy 0 <= band_m < N/2, got {self.band_m} with N={self.N}.")
        if self.threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got {self.threads}.")
        try:
            self.p_list = [parse_p(p) for p in self.p_list]
        except ValueError as exc:
            raise ConfigurationError(f"Invalid exponent in p_list: {exc}") from exc
        if any(p < 1 for p in self.p_list):
            raise ConfigurationError("Every p in p_list must be >= 1.")
        if self.kind == 'qt_hardy' and self.d != 2:
            raise ConfigurationError("qt_hardy experiments run on the 2-torus (d = 2).")
        if self.methods is not None:
            self.methods = [tuple(pair) for pair in self.methods]
            named = {m for pair in self.methods for m in pair}
            unknown = sorted(named - KIND_METHODS[self.kind])
            if unknown or any(len(pair) != 2 for pair in self.methods):
                raise ConfigurationError(f"Invalid method pairs for {self.kind}: "
                                         f"{', '.join(unknown) or self.methods}")
        try:
            GridSpec(self.d, self.N)
            RadialSymbol.from_name(self.symbol)
            RadialSymbol.from_name(self.discrete_symbol)
            if self.kind == 'qt_hardy':
                clock_shift_rep(Theta.planar(self.theta))
        except (HarmonicError, ValueError, ZeroDivisionError) as exc:
            raise ConfigurationError(str(exc)) from exc

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.d, self.N)

    @property
    def phi(self) -> RadialSymbol:
        return RadialSymbol.from_name(self.symbol)

    @property
    def method_pairs(self) -> List[Tuple[str, str]]:
        return list(self.methods or DEFAULT_METHOD_PAIRS[self.kind])

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['p_list'] = [format_p(p) for p in self.p_list]
        if self.methods is not None:
            data['methods'] = [list(pair) for pair in self.methods]
        return data


@dataclass
class EquivalenceReport:
    kind: str
    config: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: List[Dict[str, Any]] = field(default_factory=list)
    notes: Dict[str, Any] = field(default_factory=dict)

    def summarize(self) -> List[Dict[str, Any]]:
        groups: Dict[Tuple[str, str, str], List[float]] = {}
        for row in self.rows:
            groups.setdefault((row['p'], row['method_a'], row['method_b']), []).append(
                row['ratio'])
        self.summary = []
        for (p, a, b), ratios in groups.items():
            logs = np.log(np.asarray(ratios))
            self.summary.append({
                'p': p, 'method_a': a, 'method_b': b, 'count': len(ratios),
                'min': float(min(ratios)), 'max': float(max(ratios)),
                'geometric_mean': float(np.exp(logs.mean())),
                'log_band': float(logs.max() - logs.min()),
            })
        return self.summary

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'config': self.config, 'rows': self.rows,
                'summary': self.summary, 'notes': self.notes}


def ratio_of(norm_a: float, norm_b: float) -> float:
    if norm_a == 0.0 and norm_b == 0.0:
        return 1.0
    if norm_b == 0.0:
        return math.inf
    return norm_a / norm_b


def _gaussian_spectrum(rng: np.random.Generator, grid: GridSpec, n: int, band: int,
                       zero_mean: bool) -> np.ndarray:
    coeffs = np.zeros(grid.shape + (n, n), dtype=np.complex128)
    modes = [m for m in np.ndindex(*((2 * band + 1,) * grid.d))]
    draws = (rng.standard_normal((len(modes), n, n))
             + 1j * rng.standard_normal((len(modes), n, n))) / math.sqrt(2)
    for m, block in zip(modes, draws):
        shifted = tuple(v - band for v in m)
        if zero_mean and not any(shifted):
            continue
        coeffs[grid.index_of(shifted)] = block
    return coeffs


def random_band_field(rng: np.random.Generator, grid: GridSpec, n: int, band_m: int,
                      zero_mean: bool = True) -> OperatorField:
    """Field with i.i.d. complex Gaussian coefficients on |m|_inf <= band_m."""
    return fft_transform(SpectrumField(grid, _gaussian_spectrum(rng, grid, n, band_m,
                                                                zero_mean)), 'inverse')


def _exemplar_spectra(rng: np.random.Generator, grid: GridSpec, n: int,
                      band: int) -> List[np.ndarray]:
    """Lacunary series sum_j e^{2 pi i 2^j s_1} a and a single mode e^{2 pi i s_1} b."""
    a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    b = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    lacunary = np.zeros(grid.shape + (n, n), dtype=np.complex128)
    j = 1
    while 2 ** j <= max(band, 1):
        lacunary[grid.index_of((2 ** j,) + (0,) * (grid.d - 1))] = a
        j += 1
    if j == 1:
        lacunary[grid.index_of((1,) + (0,) * (grid.d - 1))] = a
    single = np.zeros_like(lacunary)
    single[grid.index_of((min(1, band),) + (0,) * (grid.d - 1))] = b
    return [lacunary, single]


def _corpus_spectra(cfg: ExperimentConfig, n: int) -> List[np.ndarray]:
    rng = make_rng(cfg.seed)
    grid = cfg.grid
    spectra = _exemplar_spectra(rng, grid, n, cfg.band_m)[:cfg.corpus_size] if cfg.band_m else []
    while len(spectra) < cfg.corpus_size:
        spectra.append(_gaussian_spectrum(rng, grid, n, cfg.band_m, cfg.zero_mean))
    return spectra


def gen_corpus(cfg: ExperimentConfig) -> List[Union[OperatorField, QTElement]]:
    """
    Deterministic corpus for a config: two structured exemplars (lacunary, single mode)
    followed by fields with i.i.d. complex Gaussian coefficients on |m|_inf <= band_m.
    qt_hardy corpora hold quantum torus elements with the same scalar coefficients.
    """
    grid = cfg.grid
    if cfg.kind == 'qt_hardy':
        theta = Theta.planar(cfg.theta)
        corpus = []
        for spectrum in _corpus_spectra(cfg, 1):
            coeffs = {tuple(int(v) for v in m): cfg.scale * spectrum[grid.index_of(m)][0, 0]
                      for m in grid.frequencies().reshape(-1, grid.d)}
            corpus.append(QTElement(theta, coeffs))
        return corpus
    corpus = []
    for spectrum in _corpus_spectra(cfg, cfg.n):
        f = fft_transform(SpectrumField(grid, cfg.scale * spectrum), 'inverse')
        if cfg.hermitian:
            f = OperatorField(grid, 0.5 * (f.values + f.adjoint().values), hermitian=True)
        if cfg.adjoint:
            f = f.adjoint()
        corpus.append(f)
    return corpus


def _method_options(cfg: ExperimentConfig, method: str) -> Dict[str, Any]:
    options: Dict[str, Any] = {'alpha': cfg.alpha}
    if method.endswith('_discrete'):
        options['symbol'] = RadialSymbol.from_name(cfg.discrete_symbol)
    else:
        options['symbol'] = cfg.phi
        options['sgrid'] = ScaleGrid.for_square_functions(cfg.N, cfg.scales)
    return options


def _hardy_rows(cfg: ExperimentConfig, index: int, f: OperatorField) -> List[Dict[str, Any]]:
    methods = sorted({m for pair in cfg.method_pairs for m in pair})
    squares = {m: square_function(f, m, **_method_options(cfg, m)) for m in methods}
    mean = fft_transform(f, 'forward').zero_mode()
    rows = []
    for p in cfg.p_list:
        base = schatten_norm(mean, p)
        norms = {m: base + lp_field_norm(squares[m], p) for m in methods}
        if p == 2 and 'poisson_radial' in squares and np.allclose(mean, 0):
            _check_p2_identity(index, lp_field_norm(squares['poisson_radial'], 2),
                               lp_field_norm(f, 2))
        rows.extend(_pair_rows(cfg, index, p, norms))
    return rows


def _check_p2_identity(index: int, square_norm: float, field_norm: float) -> None:
    if field_norm == 0.0:
        return
    relative = abs(square_norm - 0.5 * field_norm) / (0.5 * field_norm)
    if relative > P2_IDENTITY_TOL:
        raise InvariantViolation(
            f"Field {index}: ||s(f)||_2 = {square_norm:.6g} differs from ||f||_2 / 2 = "
            f"{0.5 * field_norm:.6g} (relative {relative:.2e}).")


def _pair_rows(cfg: ExperimentConfig, index: int, p: float,
               norms: Dict[str, float]) -> List[Dict[str, Any]]:
    rows = []
    for a, b in cfg.method_pairs:
        ratio = ratio_of(norms[a], norms[b])
        if not math.isfinite(ratio) or ratio <= 0:
            raise InvariantViolation(
                f"Field {index}, p={format_p(p)}: ratio {a}/{b} = {ratio} is not finite "
                f"and positive.")
        rows.append({'field_id': index, 'p': format_p(p), 'method_a': a, 'method_b': b,
                     'norm_a': norms[a], 'norm_b': norms[b], 'ratio': ratio})
    return rows


class _RunContext:
    """Objects shared by every corpus item of one run (pairs, families, representation)."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.family = CubeFamily(cfg.grid)
        self.sgrid = ScaleGrid.for_square_functions(cfg.N, cfg.scales)
        self.pair = None
        self.discrete_pair = None
        self.rep = None
        if cfg.kind == 'carleson':
            self.pair = build_companion(cfg.phi, 'continuous', N=cfg.N)
            self.discrete_pair = build_companion(
                RadialSymbol.from_name(cfg.discrete_symbol), 'discrete', N=cfg.N)
        if cfg.kind == 'qt_hardy':
            self.rep = clock_shift_rep(Theta.planar(cfg.theta))


def _carleson_rows(ctx: _RunContext, index: int, f: OperatorField):
    bmo = bmo_norm(f, ctx.family)
    norms = {
        'carleson': carleson_norm(f, ctx.pair, ctx.family, sgrid=ctx.sgrid).norm,
        'carleson_discrete': discrete_carleson_norm(f, ctx.discrete_pair, ctx.family).norm,
        'bmo_squared': bmo ** 2,
        'bmo': bmo,
    }
    return _pair_rows(ctx.cfg, index, math.inf, norms)


def _bmo_poisson_rows(ctx: _RunContext, index: int, f: OperatorField):
    norms = {'poisson_bmo': poisson_bmo_norm(f), 'bmo': bmo_norm(f, ctx.family)}
    return _pair_rows(ctx.cfg, index, math.inf, norms)


def _radial_conic_rows(ctx: _RunContext, index: int, f: OperatorField):
    cfg = ctx.cfg
    report = radial_conic_domination_check(f, cfg.phi, ctx.sgrid)
    radial = OperatorField(f.grid, _sqrt_field(report.radial_squares), hermitian=True)
    conic = OperatorField(f.grid, _sqrt_field(report.conic_squares), hermitian=True)
    rows = []
    for p in cfg.p_list:
        norms = {'radial': lp_field_norm(radial, p),
                 'conic_derivatives': lp_field_norm(conic, p)}
        rows.extend(_pair_rows(cfg, index, p, norms))
    return rows, report.max_constant


def _qt_rows(ctx: _RunContext, index: int, x: QTElement):
    cfg = ctx.cfg
    methods = sorted({m for pair in cfg.method_pairs for m in pair})
    rows = []
    for p in cfg.p_list:
        norms = {}
        for m in methods:
            options = _method_options(cfg, m)
            norms[m] = qt_hardy_norm(x, p, m, cfg.grid, ctx.rep, symbol=options['symbol'],
                                     sgrid=options.get('sgrid'))
        rows.extend(_pair_rows(cfg, index, p, norms))
    return rows


def run_experiment(cfg: ExperimentConfig) -> EquivalenceReport:
    """
    Evaluates the method pairs of `cfg.kind` over the corpus and summarizes the ratio bands.
    Corpus items run on `cfg.threads` worker threads; rows keep corpus order.
    """
    logger.info("Experiment %s started: d=%d N=%d n=%d corpus=%d seed=%d", cfg.kind, cfg.d,
                cfg.N, cfg.n, cfg.corpus_size, cfg.seed)
    corpus = gen_corpus(cfg)
    ctx = _RunContext(cfg)
    report = EquivalenceReport(cfg.kind, cfg.to_dict())
    constants: List[float] = []

    def evaluate(item):
        index, element = item
        if cfg.kind in ('hardy_equiv', 'hardy_equiv_discrete'):
            return _hardy_rows(cfg, index, element)
        if cfg.kind == 'carleson':
            return _carleson_rows(ctx, index, element)
        if cfg.kind == 'bmo_poisson':
            return _bmo_poisson_rows(ctx, index, element)
        if cfg.kind == 'radial_conic':
            rows, constant = _radial_conic_rows(ctx, index, element)
            constants.append(constant)
            return rows
        return _qt_rows(ctx, index, element)

    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for rows in pool.map(evaluate, enumerate(corpus)):
            report.rows.extend(rows)

    report.summarize()
    report.notes['trace'] = 'unnormalized matrix trace'
    if constants:
        report.notes['max_domination_constant'] = max(constants)
    if cfg.kind == 'qt_hardy':
        report.notes['representation_size'] = ctx.rep.q
    logger.info("Experiment %s finished: %d rows", cfg.kind, len(report.rows))
    return report


def commutative_counterpart(cfg: ExperimentConfig) -> ExperimentConfig:
    """The scalar hardy_equiv run whose corpus matches a qt_hardy run coefficient by coefficient."""
    data = cfg.to_dict()
    data.update(kind='hardy_equiv', n=1, hermitian=False, adjoint=False,
                methods=[list(pair) for pair in cfg.method_pairs])
    return ExperimentConfig(**data)


def transferred_corpus(cfg: ExperimentConfig) -> List[OperatorField]:
    rep = clock_shift_rep(Theta.planar(cfg.theta))
    return [qt_transfer(x, cfg.grid, rep) for x in gen_corpus(cfg)]
