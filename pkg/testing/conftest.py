"""
Pytest configuration file for setting up the Django environment.

Django is set up once per session so the service-layer tests can use models and the
REST client; the numerical tests share seeded generators, small grids and random
band-limited fields from the fixtures below.
"""

import os
import sys
from pathlib import Path

import django
import numpy as np
import pytest
from django.conf import settings

PROJECT_ROOT = Path(__file__).resolve().parent.parent
sys.path.append(str(PROJECT_ROOT))

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'opharm.settings')

FIXED_SEED = 20240601


def pytest_configure(config):
    """
    Pytest hook that runs once at the start of the test session.
    It performs the full Django setup.
    """
    try:
        if not settings.configured:
            django.setup()
    except Exception as e:
        print(f"Error during Django setup: {e}")


@pytest.fixture
def rng():
    """A fresh generator with the fixed seed for every test."""
    from harmonic.utils import make_rng
    return make_rng(FIXED_SEED)


@pytest.fixture
def grid_1d():
    from harmonic.opfield import GridSpec
    return GridSpec(1, 32)


@pytest.fixture
def grid_2d():
    from harmonic.opfield import GridSpec
    return GridSpec(2, 16)


@pytest.fixture
def random_field(rng):
    """Factory for zero-mean band-limited fields: random_field(grid, n=2, band=None)."""
    from harmonic.experiments import random_band_field

    def make(grid, n=2, band=None, zero_mean=True):
        band = grid.N // 4 if band is None else band
        return random_band_field(rng, grid, n, band, zero_mean=zero_mean)

    return make


@pytest.fixture
def random_matrix(rng):
    def make(n=2):
        return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return make


@pytest.fixture
def random_psd(random_matrix):
    def make(n=2):
        a = random_matrix(n)
        return np.conj(a.T) @ a
    return make
