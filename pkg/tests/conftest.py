import random

import pytest

from comhash import (
    modp_group,
    secp256k1,
    toy_ec,
    toy_modp_primitive,
    toy_modp_subgroup,
)


@pytest.fixture(scope="session")
def toy_subgroup():
    return toy_modp_subgroup()


@pytest.fixture(scope="session")
def toy_primitive():
    return toy_modp_primitive()


@pytest.fixture(scope="session")
def toy_curve():
    return toy_ec()


@pytest.fixture(scope="session")
def secp():
    return secp256k1()


@pytest.fixture(scope="session")
def modp2048():
    return modp_group(2048)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
