"""
Database models for the harmonic application.

ExperimentRun stores one equivalence experiment: its validated configuration, its state
while a Celery worker evaluates it, and the resulting rows and summary bands.
InvariantSuiteRecord keeps the outcome of every invariant suite run.
"""

from django.conf import settings
from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    """
    One run of `harmonic.experiments.run_experiment`. Rows and summary are filled by
    `run_experiment_task`; a failed run keeps the error text instead.
    """
    STATUS_PENDING = 'pending'
    STATUS_RUNNING = 'running'
    STATUS_DONE = 'done'
    STATUS_FAILED = 'failed'
    STATUS_CHOICES = [
        (STATUS_PENDING, 'Pending'),
        (STATUS_RUNNING, 'Running'),
        (STATUS_DONE, 'Done'),
        (STATUS_FAILED, 'Failed'),
    ]

    kind = models.CharField(max_length=32)
    config = models.JSONField(default=dict)
    status = models.CharField(max_length=16, choices=STATUS_CHOICES, default=STATUS_PENDING)
    summary = models.JSONField(default=list, blank=True)
    rows = models.JSONField(default=list, blank=True)
    notes = models.JSONField(default=dict, blank=True)
    error = models.TextField(blank=True)
    owner = models.ForeignKey(settings.AUTH_USER_MODEL, on_delete=models.SET_NULL,
                              null=True, blank=True, related_name='experiment_runs')
    created_at = models.DateTimeField(default=timezone.now)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        db_table = 'experiment_runs'
        ordering = ['-created_at']

    def mark_running(self):
        self.status = self.STATUS_RUNNING
        self.save(update_fields=['status'])

    def mark_done(self, report):
        self.status = self.STATUS_DONE
        self.rows = report.rows
        self.summary = report.summary
        self.notes = report.notes
        self.finished_at = timezone.now()
        self.save()

    def mark_failed(self, error):
        self.status = self.STATUS_FAILED
        self.error = f"{type(error).__name__}: {error}"
        self.finished_at = timezone.now()
        self.save()

    def __str__(self):
        return f"{self.kind} run {self.pk} ({self.status})"


class InvariantSuiteRecord(models.Model):
    """
    The outcome of one invariant suite run (nightly beat task or on demand).
    """
    ran_at = models.DateTimeField(default=timezone.now)
    seed = models.BigIntegerField()
    passed = models.BooleanField()
    results = models.JSONField(default=list)

    class Meta:
        db_table = 'invariant_suite_records'
        ordering = ['-ran_at']
        get_latest_by = 'ran_at'

    def __str__(self):
        return f"Invariant suite {self.ran_at:%Y-%m-%d %H:%M} ({'pass' if self.passed else 'fail'})"
