"""
Utility functions for the harmonic application.

This module provides small helpers shared by the numerical modules: access to the
`OPHARM` settings block (with library defaults when Django is not configured), the
seeded random generator factory, and tolerant parsing of p-exponents.
"""

import math

import numpy as np

DEFAULTS = {
    'D': 1,
    'N': 32,
    'n': 2,
    'BAND_M': 7,
    'SCALES': 128,
    'CORPUS_SIZE': 50,
    'P_LIST': [1.0, 2.0, 4.0],
    'THETA': '1/3',
    'SEED': 20240601,
    'THREADS': 1,
    'REPORT_DIR': 'reports',
}


def opharm_setting(key):
    """Returns `settings.OPHARM[key]`, falling back to the library default."""
    try:
        from django.conf import settings
        if settings.configured:
            return getattr(settings, 'OPHARM', {}).get(key, DEFAULTS[key])
    except ImportError:
        pass
    return DEFAULTS[key]


def make_rng(seed):
    """Deterministic generator; the same seed always yields the same stream."""
    return np.random.Generator(np.random.PCG64(int(seed) & (2 ** 64 - 1)))


def parse_p(value):
    """Accepts numbers and the strings 'inf'/'infinity'/'∞' for the exponent p."""
    if isinstance(value, str):
        if value.strip().lower() in ('inf', 'infinity', '∞'):
            return math.inf
        return float(value)
    return float(value)


def format_p(p):
    return 'inf' if math.isinf(p) else repr(float(p))
