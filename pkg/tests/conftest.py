import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from syzlab.ff_linalg import Prime, random_prime
from syzlab.graded_modules import (CurveModel, build_ambient_module,
                                   build_restriction_module, random_form)
from syzlab.multilinear import DivisorClass, SurfaceModel, P2


@pytest.fixture(scope="session")
def prime():
    return random_prime(31, 20260810)


@pytest.fixture(scope="session")
def prime2():
    return random_prime(31, 987654)


@pytest.fixture(scope="session")
def p2_surface():
    return SurfaceModel(P2)


@pytest.fixture(scope="session")
def veronese(p2_surface, prime):
    """Ambient module of P^2 polarized by O(2)."""
    return build_ambient_module(p2_surface, DivisorClass.degree(0),
                                DivisorClass.degree(2), 3, prime)


@pytest.fixture(scope="session")
def cubics_module(p2_surface, prime):
    """Ambient module of P^2 polarized by O(3)."""
    return build_ambient_module(p2_surface, DivisorClass.degree(0),
                                DivisorClass.degree(3), 3, prime)


def make_plane_curve_module(d, k, prime, seed=5):
    surf = SurfaceModel(P2)
    rng = random.Random(("test-plane", d, k, seed).__repr__())
    f = random_form(surf, DivisorClass.degree(d), prime, rng)
    curve = CurveModel(surf, f, DivisorClass.degree(d), prime)
    amb = build_ambient_module(surf, DivisorClass.degree(0),
                               DivisorClass.degree(k), 3, prime)
    sub = build_ambient_module(surf, DivisorClass.degree(-d),
                               DivisorClass.degree(k), 3, prime)
    return build_restriction_module(amb, sub, f, DivisorClass.degree(d),
                                    curve=curve)


@pytest.fixture(scope="session")
def quartic_module(prime):
    """Section ring of a random plane quartic with L = O_X(3)."""
    return make_plane_curve_module(4, 3, prime)


@pytest.fixture(scope="session")
def quintic_module(prime):
    """Section ring of a random plane quintic with L = O_X(3)."""
    return make_plane_curve_module(5, 3, prime)
