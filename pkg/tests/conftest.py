import math

import pytest

from relatom import semiclassics as sc
from relatom import thomas_fermi as tf


@pytest.fixture(scope="session")
def neutral_solution():
    return tf.solve(tf.TFParams(lam=1.0, Z=1.0))


@pytest.fixture(scope="session")
def ion_solution():
    return tf.solve(tf.TFParams(lam=0.5, Z=1.0))


@pytest.fixture(scope="session")
def neutral_eq_solution():
    return tf.solve(tf.TFParams(lam=1.0, Z=1.0, gamma_kin=sc.self_consistent_gamma()))


@pytest.fixture(scope="session")
def ion_eq_solution():
    return tf.solve(tf.TFParams(lam=0.5, Z=1.0, gamma_kin=sc.self_consistent_gamma()))


@pytest.fixture(scope="session")
def reference_bump():
    return sc.CoherentSpec.reference(0.55)


def gaussian(width=1.0):
    c = (math.pi * width**2) ** -0.75

    def f(r):
        return c * math.exp(-0.5 * (r / width) ** 2)

    return f
