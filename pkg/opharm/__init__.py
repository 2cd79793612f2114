"""
Root package for the opharm Django project.

Importing the Celery application here makes shared tasks available as soon as Django
starts.
"""

from .celery import app as celery_app

__all__ = ('celery_app',)
