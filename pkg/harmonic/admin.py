"""
Configuration for the Django Admin interface for the 'harmonic' application models.
"""

from django.contrib import admin

from .models import ExperimentRun, InvariantSuiteRecord


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    """Experiment runs are produced by the Celery worker; results are read-only."""
    list_display = ('id', 'kind', 'status', 'owner', 'created_at', 'finished_at')
    list_filter = ('kind', 'status')
    readonly_fields = ('config', 'rows', 'summary', 'notes', 'error', 'created_at',
                       'finished_at')


@admin.register(InvariantSuiteRecord)
class InvariantSuiteRecordAdmin(admin.ModelAdmin):
    list_display = ('id', 'ran_at', 'seed', 'passed')
    list_filter = ('passed',)
    readonly_fields = ('ran_at', 'seed', 'passed', 'results')
