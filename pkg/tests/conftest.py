"""Shared cycles for the test suite."""

import math

import pytest

from hus_hill.models import Family, PeriodicCycle

# (values, h) pairs covering contracting, expanding and mixed cycles, and
# constant cycles on both sides of 1/h and 2/h
SOUNDNESS_CONFIGS = [
    ((0.0, 0.5, -0.5), 1.0),
    ((0.0, 2.0, -2.0), 1.0),
    ((1.0, 2.0), 0.3),
    ((2.0, 0.5), 1.0),
    ((math.pi, 2 * math.pi), 0.1),
    ((0.5,), 1.0),
    ((1.5,), 1.0),
    ((3.0,), 1.0),
    ((-0.5,), 1.0),
    ((0.3, -0.7, 1.1), 0.5),
]

TRACKED_FAMILIES = [
    Family.FIRST_HOMOG,
    Family.FIRST_NONHOMOG,
    Family.HILL,
    Family.PQR,
    Family.PQR2,
    Family.PQR3,
    Family.PQR4,
]

THIRD_ORDER = [Family.PQR, Family.PQR2, Family.PQR3, Family.PQR4]


def make_cycle(values, h):
    return PeriodicCycle(h=h, values=tuple(values))


@pytest.fixture
def small_cycle():
    """{0, 1/2, −1/2} with h = 1; e(3h) = 3/4 for both signs."""
    return make_cycle((0.0, 0.5, -0.5), 1.0)


@pytest.fixture
def pi_cycle():
    """{π, 2π} with h = 0.1."""
    return make_cycle((math.pi, 2 * math.pi), 0.1)


@pytest.fixture
def soundness_cycles():
    return [make_cycle(values, h) for values, h in SOUNDNESS_CONFIGS]
