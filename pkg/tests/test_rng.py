import pytest
from hypothesis import given, strategies as st

from blockpart.rng import SplitMix64


def test_reference_vectors():
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_below_rejects_empty_range():
    with pytest.raises(ValueError):
        SplitMix64(1).below(0)


@given(st.integers(0, 2 ** 64 - 1), st.integers(1, 10 ** 12))
def test_below_in_range(seed, n):
    rng = SplitMix64(seed)
    assert all(0 <= rng.below(n) < n for _ in range(20))


@given(st.integers(0, 2 ** 64 - 1), st.lists(st.integers(), max_size=30))
def test_shuffle_is_a_seeded_permutation(seed, items):
    a, b = list(items), list(items)
    SplitMix64(seed).shuffle(a)
    SplitMix64(seed).shuffle(b)
    assert a == b and sorted(a) == sorted(items)
