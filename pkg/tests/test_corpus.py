import random

import pytest

from streamperiod.corpus import (
    alternating_runs_prefix,
    flip_bits,
    hard_pair,
    planted,
    random_bytes,
    sample_hard_pair,
)
from streamperiod.errors import GenerationError
from streamperiod.oracle import brute_force_k_periods, shift_mismatch_positions


def test_planted_uncorrupted():
    assert planted(b"ab", 8) == b"abababab"
    assert 2 in brute_force_k_periods(b"abababab", 0)


def test_planted_hits_requested_mismatches():
    s = planted(b"abc", 12, mismatch_positions={5, 8}, seed=1)
    assert shift_mismatch_positions(s, 3) == [5, 8]
    assert 3 in brute_force_k_periods(s, 2)
    assert 3 not in brute_force_k_periods(s, 1)


def test_planted_roundtrip_random_specs():
    rng = random.Random(9)
    for _ in range(300):
        p = rng.randrange(1, 9)
        n = rng.randrange(p + 1, 80)
        block = bytes(rng.randrange(4) + 97 for _ in range(p))
        count = rng.randrange(0, min(4, n - p) + 1)
        positions = sorted(rng.sample(range(1, n - p + 1), count))
        s = planted(block, n, positions, seed=rng.randrange(1000))
        assert len(s) == n
        assert shift_mismatch_positions(s, p) == positions


def test_planted_rejects_bad_positions():
    with pytest.raises(GenerationError):
        planted(b"ab", 8, {7})  # 7 > n - p
    with pytest.raises(GenerationError):
        planted(b"", 8)


def test_planted_deterministic():
    spec = (b"xyz", 30, frozenset({4, 11}), 77)
    assert planted(*spec) == planted(*spec)


def test_alternating_runs_prefix_values():
    assert alternating_runs_prefix(6) == b"101100"
    assert alternating_runs_prefix(12) == b"101100111000"
    assert alternating_runs_prefix(0) == b""


def test_hard_pair_layout():
    assert hard_pair(b"ab", b"ab") == b"abababab"
    with pytest.raises(GenerationError):
        hard_pair(b"ab", b"abc")


def test_hard_pair_period_flip():
    for k in (4, 6):
        n = 64
        x, y = sample_hard_pair(n, k, exceed=False, seed=2)
        assert sum(a != b for a, b in zip(x, y)) == k // 2
        periods = brute_force_k_periods(hard_pair(x, y), k)
        assert periods[0] == n // 4

        x, y = sample_hard_pair(n, k, exceed=True, seed=2)
        assert sum(a != b for a, b in zip(x, y)) == k // 2 + 1
        periods = brute_force_k_periods(hard_pair(x, y), k)
        assert periods and periods[0] > n // 4


def test_flip_bits_changes_exactly_count():
    base = alternating_runs_prefix(32)
    flipped = flip_bits(base, 5, seed=3)
    assert sum(a != b for a, b in zip(base, flipped)) == 5


def test_random_bytes_deterministic():
    assert random_bytes(40, seed=5) == random_bytes(40, seed=5)
    assert set(random_bytes(200, alphabet=3, seed=1)) <= {97, 98, 99}
