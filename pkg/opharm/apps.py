"""
Application configuration for the opharm project package.
"""

from django.apps import AppConfig


class OpharmConfig(AppConfig):
    name = 'opharm'
    verbose_name = "opharm project"
    default_auto_field = 'django.db.models.BigAutoField'
