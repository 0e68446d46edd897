import random

import pytest

from esem import scheme
from esem.snodbpv import ESEM_PARAMS, SnodParams

TOY_PARAMS = SnodParams(v=3, n=8, l=2, check_combination_bound=False)


@pytest.fixture()
def rng():
    return random.Random(0xE5E3)


@pytest.fixture(scope="session")
def default_keyset():
    """One full-size keyset (v=18, n=1024, l=3), shared read-only."""
    rng = random.Random(20240809)
    sk, pk, shares = scheme.keygen(ESEM_PARAMS, rng)
    return sk, pk, shares


@pytest.fixture(scope="session")
def toy_keyset():
    rng = random.Random(7)
    sk, pk, shares = scheme.keygen(TOY_PARAMS, rng)
    return sk, pk, shares


@pytest.fixture(scope="session")
def esem2_keyset():
    """Smallest full-security keyset (v=40, n=128, l=3); key files carrying
    toy parameters are refused at load, so file-level tests use this one."""
    rng = random.Random(424242)
    sk, pk, shares = scheme.keygen(scheme.ESEM2_PARAMS, rng)
    return sk, pk, shares
