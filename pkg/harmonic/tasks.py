"""
Celery task definitions for the harmonic application.

run_experiment_task evaluates a stored ExperimentRun on a worker; run_invariant_suite is
scheduled daily by celery beat and stores an InvariantSuiteRecord.
"""

import logging

from celery import shared_task
from django.utils import timezone

from .exceptions import HarmonicError
from .experiments import ExperimentConfig, run_experiment
from .invariants import run_suite
from .models import ExperimentRun, InvariantSuiteRecord

logger = logging.getLogger(__name__)


@shared_task
def run_experiment_task(run_id):
    """
    Runs the experiment stored as ExperimentRun `run_id` and saves rows and summary.
    Library errors mark the run failed; the task itself then completes normally.
    """
    logger.info("TASK: Starting run_experiment_task for run %s...", run_id)
    try:
        run = ExperimentRun.objects.get(pk=run_id)
    except ExperimentRun.DoesNotExist:
        msg = f"TASK: Experiment run {run_id} does not exist. Exiting."
        logger.info(msg)
        return {'status': 'graceful_exit', 'message': msg}

    run.mark_running()
    try:
        report = run_experiment(ExperimentConfig(**run.config))
    except HarmonicError as exc:
        logger.error("TASK: Experiment run %s failed.", run_id, exc_info=True)
        run.mark_failed(exc)
        return {'status': 'failed', 'run': run_id, 'error': run.error}
    except Exception as exc:
        logger.error("FATAL ERROR during run_experiment_task for run %s.", run_id, exc_info=True)
        run.mark_failed(exc)
        raise

    run.mark_done(report)
    msg = f"TASK: Experiment run {run_id} ({run.kind}) finished with {len(report.rows)} rows."
    logger.info(msg)
    return {'status': 'success', 'run': run_id, 'rows': len(report.rows)}


@shared_task
def run_invariant_suite(names=None, seed=None):
    """
    Runs the invariant suite and records the outcome. Returns a structured summary.
    """
    try:
        logger.info("TASK: Starting run_invariant_suite...")
        suite = run_suite(names, seed)
        record = InvariantSuiteRecord.objects.create(
            ran_at=timezone.now(),
            seed=suite.seed,
            passed=suite.passed,
            results=[r.to_dict() for r in suite.results],
        )
        outcome = "passed" if suite.passed else "failed"
        msg = f"TASK: Invariant suite recorded as {record.pk}: {outcome}."
        logger.info(msg)
        return {
            'status': 'success',
            'record': record.pk,
            'passed': suite.passed,
            'failed': suite.failed,
        }
    except Exception:
        logger.error("FATAL ERROR during run_invariant_suite.", exc_info=True)
        raise
