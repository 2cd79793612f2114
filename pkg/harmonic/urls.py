"""
URL configuration for the harmonic application.

Routes:
1. experiments/ via DefaultRouter (list, create, retrieve, rows).
2. companion/ for Calderón companion pairs.
3. invariants/latest/ for the most recent invariant suite record.
"""

from django.urls import path
from rest_framework.routers import DefaultRouter

from .views import CompanionView, ExperimentRunViewSet, LatestInvariantSuiteView

router = DefaultRouter()
router.register(r'experiments', ExperimentRunViewSet, basename='experiment')

urlpatterns = [
    *router.urls,
    path('companion/', CompanionView.as_view(), name='companion'),
    path('invariants/latest/', LatestInvariantSuiteView.as_view(), name='invariants-latest'),
]
