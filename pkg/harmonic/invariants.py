"""
The invariant suite run by `opharm check` and the nightly Celery task.

Each check is a named function returning a CheckResult with its measured values. A check
that raises a library error counts as failed; the suite never stops at the first failure.
Constants of the norm equivalences are not asserted, only their finiteness, seed
stability and exact scaling invariance.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .exceptions import HarmonicError
from .experiments import (ExperimentConfig, EquivalenceReport, commutative_counterpart,
                          random_band_field, run_experiment)
from .opfield import (GridSpec, OperatorField, fft_transform, lp_field_norm,
                      plancherel_pairing, spectral_pairing)
from .quantum_torus import (QTElement, Theta, certify_phases, clock_shift_rep,
                            qt_cond_expectation, qt_lp_norm, qt_poisson, qt_transfer)
from .square_functions import poisson_deriv_identity_check, square_function, unit_ball_volume
from .testfn import RadialSymbol, ScaleGrid, bessel_decay_report, build_companion
from .utils import make_rng, opharm_setting

logger = logging.getLogger(__name__)

CHECKS: Dict[str, Callable[[int], 'CheckResult']] = {}
SEED_STABILITY = 0.10
SCALING_LAMBDA = 7.3


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: Dict[str, Any] = field(default_factory=dict)
    detail: str = ''
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SuiteResult:
    results: List[CheckResult]
    seed: int

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed(self) -> List[str]:
        return [r.name for r in self.results if not r.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {'passed': self.passed, 'seed': self.seed,
                'results': [r.to_dict() for r in self.results]}


def invariant_check(name: str):
    def register(fn):
        CHECKS[name] = fn
        return fn
    return register


def _spread(values: Sequence[float]) -> float:
    values = np.asarray(values, dtype=float)
    return float((values.max() - values.min()) / values.min())


def _seed_stability(reports: Sequence[EquivalenceReport]) -> Dict[str, float]:
    """Largest relative spread of band endpoints across runs, per (p, A, B)."""
    endpoints: Dict[str, Dict[str, List[float]]] = {}
    for report in reports:
        for entry in report.summary:
            key = f"{entry['p']}:{entry['method_a']}/{entry['method_b']}"
            slot = endpoints.setdefault(key, {'min': [], 'max': []})
            slot['min'].append(entry['min'])
            slot['max'].append(entry['max'])
    return {key: max(_spread(v['min']), _spread(v['max'])) for key, v in endpoints.items()}


def _scaling_drift(cfg: ExperimentConfig, report: EquivalenceReport) -> float:
    data = cfg.to_dict()
    data['scale'] = SCALING_LAMBDA
    scaled = run_experiment(ExperimentConfig(**data))
    return max((abs(a['ratio'] - b['ratio']) for a, b in zip(report.rows, scaled.rows)),
               default=0.0)


def _band_check(base: ExperimentConfig, seed: int) -> CheckResult:
    reports = []
    for offset in range(3):
        data = base.to_dict()
        data['seed'] = seed + offset
        reports.append(run_experiment(ExperimentConfig(**data)))
    finite = all(math.isfinite(e['min']) and math.isfinite(e['max'])
                 for r in reports for e in r.summary)
    stability = _seed_stability(reports)
    drift = _scaling_drift(ExperimentConfig(**{**base.to_dict(), 'seed': seed}), reports[0])
    worst = max(stability.values(), default=0.0)
    measured = {'bands': [e for e in reports[0].summary], 'seed_spread': stability,
                'scaling_drift': drift}
    return CheckResult('', finite and worst < SEED_STABILITY and drift <= 1e-10, measured)


@invariant_check('fft_plancherel')
def check_fft_plancherel(seed: int) -> CheckResult:
    rng = make_rng(seed)
    worst_roundtrip = worst_pairing = worst_oracle = 0.0
    for d in (1, 2):
        for N in (8, 16, 32, 64):
            for n in (1, 2, 4):
                grid = GridSpec(d, N)
                f = random_band_field(rng, grid, n, N // 2 - 1, zero_mean=False)
                g = random_band_field(rng, grid, n, N // 2 - 1, zero_mean=False)
                F, G = fft_transform(f, 'forward'), fft_transform(g, 'forward')
                back = fft_transform(F, 'inverse')
                scale = float(np.max(np.abs(f.values)))
                worst_roundtrip = max(worst_roundtrip,
                                      float(np.max(np.abs(back.values - f.values))) / scale)
                lhs, rhs = plancherel_pairing(f, g), spectral_pairing(F, G)
                pairing_error = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
                worst_pairing = max(worst_pairing, pairing_error)
                if N <= 16:
                    worst_oracle = max(worst_oracle, _dft_oracle_error(f, F))
    measured = {'roundtrip': worst_roundtrip, 'pairing': worst_pairing, 'oracle': worst_oracle}
    return CheckResult('', max(measured.values()) <= 1e-10, measured)


def _dft_oracle_error(f: OperatorField, F) -> float:
    grid = f.grid
    freqs = grid.frequencies().reshape(-1, grid.d)
    points = grid.points().reshape(-1, grid.d)
    kernel = np.exp(-2j * np.pi * freqs @ points.T) * grid.cell_volume
    direct = np.einsum('ms,sij->mij', kernel, f.flat())
    computed = F.coeffs.reshape(direct.shape)
    return float(np.max(np.abs(direct - computed)) / np.max(np.abs(direct)))


@invariant_check('reproducing_pairs')
def check_reproducing_pairs(seed: int) -> CheckResult:
    N = int(opharm_setting('N'))
    measured = {}
    passed = True
    for name, mode in (('annulus_bump', 'discrete'), ('d_poisson', 'continuous'),
                       ('gauss_lp', 'continuous'), ('riesz_poisson(1)', 'continuous')):
        pair = build_companion(RadialSymbol.from_name(name), mode, N=N)
        measured[f"{name}:{mode}"] = pair.residual
        passed = passed and pair.valid
    return CheckResult('', passed, measured)


@invariant_check('p2_poisson_identity')
def check_p2_poisson_identity(seed: int) -> CheckResult:
    rng = make_rng(seed)
    grid = GridSpec(int(opharm_setting('D')), int(opharm_setting('N')))
    band = int(opharm_setting('BAND_M'))
    worst = 0.0
    for _ in range(50):
        f = random_band_field(rng, grid, int(opharm_setting('n')), band)
        half = 0.5 * lp_field_norm(f, 2)
        worst = max(worst, abs(lp_field_norm(square_function(f, 'poisson_radial'), 2) - half)
                    / half)
    return CheckResult('', worst <= 1e-3, {'max_relative_error': worst})


@invariant_check('cone_factorization')
def check_cone_factorization(seed: int) -> CheckResult:
    rng = make_rng(seed)
    worst = 0.0
    for d in (1, 2):
        grid = GridSpec(d, 32)
        sgrid = ScaleGrid.for_square_functions(grid.N, 128)
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        for m in ((1,) + (0,) * (d - 1), (3,) + (1,) * (d - 1)):
            f = OperatorField.from_modes(grid, {m: a})
            radial = lp_field_norm(square_function(f, 'phi_radial', sgrid=sgrid), 2)
            conic = lp_field_norm(square_function(f, 'phi_conic', sgrid=sgrid), 2)
            worst = max(worst, abs(conic / (math.sqrt(unit_ball_volume(d)) * radial) - 1))
    return CheckResult('', worst <= 0.02, {'max_relative_error': worst})


@invariant_check('poisson_derivative_identity')
def check_poisson_derivative_identity(seed: int) -> CheckResult:
    rng = make_rng(seed)
    f = random_band_field(rng, GridSpec(1, 32), 2, 7)
    measured = {}
    for k in (1, 2):
        report = poisson_deriv_identity_check(f, k, [0.02, 0.1, 0.5, 1.0])
        measured[f"k={k}"] = report.max_discrepancy
    return CheckResult('', max(measured.values()) <= 1e-4, measured)


@invariant_check('riesz_poisson_decay')
def check_riesz_poisson_decay(seed: int) -> CheckResult:
    radii = np.geomspace(1.0, 1e3, 13)
    measured = {}
    passed = True
    for alpha, sigma, d in ((1.0, 0.5, 1), (2.0, 1.0, 1), (1.0, 0.5, 2)):
        report = bessel_decay_report(alpha, sigma, radii, d)
        measured[f"alpha={alpha},sigma={sigma},d={d}"] = {
            'max': report.max_value, 'slope': report.trend_slope}
        passed = passed and report.bounded
    return CheckResult('', passed, measured)


@invariant_check('carleson_bmo_band')
def check_carleson_bmo_band(seed: int) -> CheckResult:
    base = ExperimentConfig(kind='carleson', seed=seed, methods=[('carleson', 'bmo_squared')])
    result = _band_check(base, seed)
    bands = result.measured['bands']
    width = max((math.log(e['max']) - math.log(e['min']) for e in bands), default=0.0)
    result.measured['log_width'] = width
    result.passed = result.passed and width <= 3.0
    return result


@invariant_check('hardy_equivalence_bands')
def check_hardy_equivalence_bands(seed: int) -> CheckResult:
    return _band_check(ExperimentConfig(kind='hardy_equiv', seed=seed), seed)


@invariant_check('discrete_equivalence_bands')
def check_discrete_equivalence_bands(seed: int) -> CheckResult:
    return _band_check(ExperimentConfig(kind='hardy_equiv_discrete', seed=seed), seed)


@invariant_check('adjoint_p2_symmetry')
def check_adjoint_p2_symmetry(seed: int) -> CheckResult:
    base = ExperimentConfig(kind='hardy_equiv', seed=seed, p_list=[2.0], corpus_size=10)
    plain = run_experiment(base)
    adjoint = run_experiment(ExperimentConfig(**{**base.to_dict(), 'adjoint': True}))
    drift = max(abs(a['ratio'] - b['ratio']) for a, b in zip(plain.rows, adjoint.rows))
    return CheckResult('', drift <= 1e-10, {'max_ratio_drift': drift})


@invariant_check('determinism')
def check_determinism(seed: int) -> CheckResult:
    cfg = ExperimentConfig(kind='hardy_equiv', seed=seed, corpus_size=5, threads=2)
    first, second = run_experiment(cfg), run_experiment(cfg)
    same = first.rows == second.rows and first.summary == second.summary
    return CheckResult('', same, {'rows': len(first.rows)})


@invariant_check('quantum_torus_algebra')
def check_quantum_torus_algebra(seed: int) -> CheckResult:
    rng = make_rng(seed)
    theta = Theta.planar(opharm_setting('THETA'))
    rep = clock_shift_rep(theta)
    grid = GridSpec(2, 16)
    phases = certify_phases(theta, rep)
    x = QTElement(theta, {(a, b): complex(*rng.standard_normal(2))
                          for a in range(-3, 4) for b in range(-3, 4)})
    F = qt_transfer(x, grid, rep)
    isometry = abs(qt_lp_norm(x, 2, grid, rep, trace='normalized') - x.l2_norm())
    noise = OperatorField(grid, rng.standard_normal(F.values.shape)
                          + 1j * rng.standard_normal(F.values.shape))
    once = qt_cond_expectation(noise, rep)
    twice = qt_cond_expectation(once, rep)
    idempotence = float(np.max(np.abs(twice.values - once.values)))
    contraction = lp_field_norm(once, 2) <= lp_field_norm(noise, 2) * (1 + 1e-12)
    fixed = float(np.max(np.abs(qt_cond_expectation(F, rep).values - F.values)))
    semigroup = (qt_poisson(qt_poisson(x, 0.3), 0.5) - qt_poisson(x, 0.15)).l2_norm()
    measured = {'commutation': rep.commutation_residual(),
                'product_phases': phases['product_residual'],
                'adjoint_phases': phases['adjoint_residual'],
                'transference_isometry': isometry, 'idempotence': idempotence,
                'range_fixed': fixed, 'contraction': contraction, 'semigroup': semigroup}
    passed = (measured['commutation'] <= 1e-12 and phases['passed'] and isometry <= 1e-10
              and idempotence <= 1e-10 and fixed <= 1e-10 and contraction
              and semigroup <= 1e-12)
    return CheckResult('', passed, measured)


@invariant_check('quantum_commutative_limit')
def check_quantum_commutative_limit(seed: int) -> CheckResult:
    cfg = ExperimentConfig(kind='qt_hardy', d=2, N=16, band_m=3, theta='0', seed=seed,
                           corpus_size=10)
    quantum = run_experiment(cfg)
    classical = run_experiment(commutative_counterpart(cfg))
    drift = max(abs(a['ratio'] - b['ratio']) for a, b in zip(quantum.rows, classical.rows))
    return CheckResult('', drift <= 1e-8, {'max_ratio_drift': drift})


@invariant_check('quantum_hardy_bands')
def check_quantum_hardy_bands(seed: int) -> CheckResult:
    cfg = ExperimentConfig(kind='qt_hardy', d=2, N=16, band_m=3, seed=seed, corpus_size=10)
    return _band_check(cfg, seed)


def run_suite(names: Optional[Sequence[str]] = None, seed: Optional[int] = None) -> SuiteResult:
    """Runs the named checks (all by default) and collects their results."""
    seed = int(opharm_setting('SEED')) if seed is None else int(seed)
    selected = list(names) if names else list(CHECKS)
    unknown = [name for name in selected if name not in CHECKS]
    if unknown:
        raise KeyError(f"Unknown invariant checks: {', '.join(unknown)}")
    logger.info("Invariant suite started: %d checks, seed %d", len(selected), seed)
    results = []
    for name in selected:
        started = time.perf_counter()
        try:
            result = CHECKS[name](seed)
        except HarmonicError as exc:
            logger.error("Check %s raised: %s", name, exc, exc_info=True)
            result = CheckResult(name, False, detail=f"{type(exc).__name__}: {exc}")
        result.name = name
        result.seconds = time.perf_counter() - started
        logger.info("Check %s: %s (%.1fs)", name, 'pass' if result.passed else 'FAIL',
                    result.seconds)
        results.append(result)
    suite = SuiteResult(results, seed)
    logger.info("Invariant suite finished: %s", 'passed' if suite.passed else
                f"failed ({', '.join(suite.failed)})")
    return suite
