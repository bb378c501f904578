import numpy as np
import pytest

from graphon_opinion import rng

M = 0xFFFFFFFF
u = np.uint64

# Known-answer vectors of the Random123 reference implementation
KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((M, M, M, M), (M, M), (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    (
        (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
        (0xA4093822, 0x299F31D0),
        (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1),
    ),
]


@pytest.mark.parametrize("ctr,key,expected", KAT)
def test_philox_known_answers(ctr, key, expected):
    out = rng.philox4x32(*(u(c) for c in ctr), *(u(k) for k in key))
    assert tuple(int(v) for v in out) == expected


def test_uniform_block_properties():
    a = rng.philox_uniforms(200_000, seed=12, step=3)
    assert a.shape == (200_000, 4)
    assert a.min() > 0.0 and a.max() < 1.0
    assert np.allclose(a.mean(axis=0), 0.5, atol=4 * np.sqrt(1 / 12 / 2e5))
    b = rng.philox_uniforms(200_000, seed=12, step=3)
    assert np.array_equal(a, b)
    c = rng.philox_uniforms(200_000, seed=12, step=4)
    assert not np.array_equal(a, c)
    d = rng.philox_uniforms(10, seed=13, step=3)
    assert not np.array_equal(a[:10], d)


def test_seed_key_splits_words():
    lo, hi = rng.seed_key((7 << 32) | 5)
    assert (int(lo), int(hi)) == (5, 7)
    with pytest.raises(ValueError):
        rng.seed_key(-1)
