import random

import pytest

from ainfinity.rings import RATIONALS, fraction_field, poly_ring, prime_field


@pytest.fixture
def rng():
    return random.Random(20240817)


ALL_RINGS = [
    RATIONALS,
    prime_field(5),
    prime_field(13),
    poly_ring("h", RATIONALS),
    poly_ring("t", prime_field(7)),
    fraction_field(poly_ring("h", RATIONALS)),
]
