import random

import pytest

from roamauth.curve import P256, TOY
from roamauth.suite import CryptoSuite


@pytest.fixture(scope="session")
def toy_suite() -> CryptoSuite:
    return CryptoSuite(TOY)


@pytest.fixture(scope="session")
def p256_suite() -> CryptoSuite:
    return CryptoSuite(P256)


@pytest.fixture()
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
