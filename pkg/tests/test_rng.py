import collections

from hypothesis import given, strategies as st

from popproto.rng import MASK64, RngStream, derive_seed


def test_same_seed_same_stream():
    a = RngStream(1234)
    b = RngStream(1234)
    assert [a.next_u64() for _ in range(100)] == [
        b.next_u64() for _ in range(100)
    ]


def test_different_seeds_differ():
    a = RngStream(1)
    b = RngStream(2)
    assert [a.next_u64() for _ in range(10)] != [
        b.next_u64() for _ in range(10)
    ]


@given(st.integers(min_value=0, max_value=2**64 - 1))
def test_outputs_are_64_bit(seed):
    r = RngStream(seed)
    for _ in range(8):
        assert 0 <= r.next_u64() <= MASK64


@given(
    st.integers(min_value=0, max_value=2**64 - 1),
    st.integers(min_value=1, max_value=10**9),
)
def test_randbelow_in_range(seed, bound):
    r = RngStream(seed)
    for _ in range(8):
        assert 0 <= r.randbelow(bound) < bound


def test_randbelow_roughly_uniform():
    r = RngStream(7)
    counts = collections.Counter(r.randbelow(5) for _ in range(50000))
    for v in range(5):
        assert abs(counts[v] / 50000 - 0.2) < 0.02


def test_derive_seed_distinct_streams():
    seeds = {derive_seed(42, i) for i in range(1000)}
    assert len(seeds) == 1000
    # derived streams do not collide with the master stream's own output
    assert derive_seed(42, 0) != 42


def test_spawn_matches_derive_seed():
    master = RngStream(9)
    child = master.spawn(3)
    assert child.seed == derive_seed(9, 3)
    direct = RngStream(derive_seed(9, 3))
    assert [child.next_u64() for _ in range(5)] == [
        direct.next_u64() for _ in range(5)
    ]
