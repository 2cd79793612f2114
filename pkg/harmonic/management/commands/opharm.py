"""
`manage.py opharm` (also installed as the `opharm` console script).

Subcommands:
    run        run one equivalence experiment and write its report
    check      run the invariant suite
    companion  print the MultiplierPair JSON of a test symbol

Exit codes: 0 success, 1 invariant violation or failed check, 2 configuration error.
"""

import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from harmonic.exceptions import (ConfigurationError, HarmonicError, InvariantViolation,
                                 ReportIOError)
from harmonic.experiments import EXPERIMENT_KINDS, run_experiment
from harmonic.invariants import CHECKS, run_suite
from harmonic.models import InvariantSuiteRecord
from harmonic.reporting import REPORT_FORMATS, emit_report, report_filename
from harmonic.serializers import ExperimentConfigSerializer
from harmonic.testfn import RadialSymbol, build_companion
from harmonic.utils import opharm_setting

logger = logging.getLogger(__name__)

EXIT_VIOLATION = 1
EXIT_CONFIGURATION = 2


class Command(BaseCommand):
    help = "Operator-valued Hardy space experiments, invariant checks and companion pairs."

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='subcommand', required=True)

        run = subparsers.add_parser('run', help="Run an equivalence experiment.")
        run.add_argument('--kind', choices=EXPERIMENT_KINDS)
        run.add_argument('--config', type=Path, help="JSON file mirroring ExperimentConfig.")
        run.add_argument('--out', type=Path, default=None)
        run.add_argument('--format', choices=REPORT_FORMATS, default='csv')
        run.add_argument('--seed', type=int)
        run.add_argument('--threads', type=int)

        check = subparsers.add_parser('check', help="Run the invariant suite.")
        check.add_argument('--only', nargs='+', choices=sorted(CHECKS), default=None)
        check.add_argument('--seed', type=int)
        check.add_argument('--record', action='store_true',
                           help="Store the outcome as an InvariantSuiteRecord.")
        check.add_argument('--out', type=Path, default=None,
                           help="Write the suite results as JSON to this file.")

        companion = subparsers.add_parser('companion', help="Emit a MultiplierPair as JSON.")
        companion.add_argument('--phi', default='d_poisson')
        companion.add_argument('--mode', choices=('continuous', 'discrete'),
                               default='continuous')
        companion.add_argument('--alpha', type=float)
        companion.add_argument('--N', type=int, default=32)
        companion.add_argument('--out', type=Path, default=None)

    def handle(self, *args, **options):
        handler = getattr(self, f"handle_{options['subcommand']}")
        return handler(options)

    @staticmethod
    def _load_config(options):
        data = {}
        if options['config'] is not None:
            try:
                data = json.loads(options['config'].read_text(encoding='utf-8'))
            except OSError as exc:
                raise CommandError(f"Cannot read config {options['config']}: {exc}",
                                   returncode=EXIT_CONFIGURATION) from exc
            except json.JSONDecodeError as exc:
                raise CommandError(f"Invalid JSON in {options['config']}: {exc}",
                                   returncode=EXIT_CONFIGURATION) from exc
            if not isinstance(data, dict):
                raise CommandError("A config file must hold a JSON object.",
                                   returncode=EXIT_CONFIGURATION)
        for key in ('kind', 'seed', 'threads'):
            if options.get(key) is not None:
                data[key] = options[key]
        serializer = ExperimentConfigSerializer(data=data)
        try:
            serializer.is_valid(raise_exception=True)
        except ValidationError as exc:
            raise CommandError(f"Invalid configuration: {json.dumps(exc.detail)}",
                               returncode=EXIT_CONFIGURATION) from exc
        return serializer.to_config()

    def handle_run(self, options):
        cfg = self._load_config(options)
        try:
            report = run_experiment(cfg)
        except InvariantViolation as exc:
            raise CommandError(f"Invariant violation: {exc}", returncode=EXIT_VIOLATION) from exc
        except ConfigurationError as exc:
            raise CommandError(str(exc), returncode=EXIT_CONFIGURATION) from exc
        except HarmonicError as exc:
            raise CommandError(f"{type(exc).__name__}: {exc}",
                               returncode=EXIT_VIOLATION) from exc

        out_dir = options['out'] or Path(opharm_setting('REPORT_DIR'))
        path = out_dir / report_filename(report, options['format'])
        try:
            emit_report(report, options['format'], path)
        except ReportIOError as exc:
            raise CommandError(str(exc), returncode=EXIT_CONFIGURATION) from exc

        for entry in report.summary:
            self.stdout.write(
                f"p={entry['p']:>4} {entry['method_a']:>20} / {entry['method_b']:<20} "
                f"min={entry['min']:.4g} max={entry['max']:.4g} "
                f"geo={entry['geometric_mean']:.4g}")
        self.stdout.write(self.style.SUCCESS(f"Report written to {path}"))

    def handle_check(self, options):
        suite = run_suite(options['only'], options['seed'])
        for result in suite.results:
            style = self.style.SUCCESS if result.passed else self.style.ERROR
            self.stdout.write(style(f"{'PASS' if result.passed else 'FAIL'} {result.name} "
                                    f"({result.seconds:.1f}s) {result.detail}"))
        if options['record']:
            InvariantSuiteRecord.objects.create(seed=suite.seed, passed=suite.passed,
                                                results=[r.to_dict() for r in suite.results])
        if options['out'] is not None:
            try:
                options['out'].parent.mkdir(parents=True, exist_ok=True)
                options['out'].write_text(json.dumps(suite.to_dict(), indent=2, default=str),
                                          encoding='utf-8')
            except OSError as exc:
                raise CommandError(f"{options['out']}: {exc}",
                                   returncode=EXIT_CONFIGURATION) from exc
        if not suite.passed:
            raise CommandError(f"Failed checks: {', '.join(suite.failed)}",
                               returncode=EXIT_VIOLATION)

    def handle_companion(self, options):
        name = options['phi']
        if options['alpha'] is not None and '(' not in name:
            name = f"{name}({options['alpha']})"
        try:
            symbol = RadialSymbol.from_name(name)
            pair = build_companion(symbol, options['mode'], N=options['N'])
        except (HarmonicError, ValueError) as exc:
            raise CommandError(str(exc), returncode=EXIT_CONFIGURATION) from exc
        text = pair.to_json()
        if options['out'] is None:
            self.stdout.write(text)
            return
        try:
            options['out'].write_text(text, encoding='utf-8')
        except OSError as exc:
            raise CommandError(f"{options['out']}: {exc}",
                               returncode=EXIT_CONFIGURATION) from exc
        self.stdout.write(self.style.SUCCESS(f"Companion written to {options['out']}"))
