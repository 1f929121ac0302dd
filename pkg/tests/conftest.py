import numpy as np
import pytest

from eulerlab import PRESET, SolutionParams, Variant


@pytest.fixture
def preset():
    return PRESET


@pytest.fixture
def ns_inverse():
    return SolutionParams(a=1.0, k=0.8, t_star=1.0, nu=0.5,
                          variant=Variant.NS_INVERSE_R)


@pytest.fixture
def ns_decaying():
    return SolutionParams(a=0.5, k=0.8, t_star=1.0, nu=0.5,
                          variant=Variant.NS_DECAYING_SWIRL)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


def random_params(rng, variant=Variant.EULER, a_hi=4.0, k_hi=4.0,
                  t_star_hi=4.0, nu_hi=2.0):
    """One random parameter draw with signed a and k."""
    a = rng.uniform(0.25, a_hi) * rng.choice([-1.0, 1.0])
    k = rng.uniform(0.25, k_hi) * rng.choice([-1.0, 1.0])
    t_star = rng.uniform(0.5, t_star_hi)
    nu = 0.0 if variant is Variant.EULER else rng.uniform(0.1, nu_hi)
    return SolutionParams(a=a, k=k, t_star=t_star, nu=nu, variant=variant)
