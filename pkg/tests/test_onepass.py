import random

import pytest

from streamperiod.errors import LengthMismatchError, StreamOrderError
from streamperiod.onepass import OnePassScanner, find_k_periods_one_pass, large_bands
from streamperiod.oracle import brute_force_k_periods
from streamperiod.twopass import find_k_periods_two_pass


def run(data, k, backend="sketch", seed=0):
    return find_k_periods_one_pass(data, k, backend=backend, seed=seed)


def oracle_half(data, k):
    return [p for p in brute_force_k_periods(data, k) if p <= len(data) // 2]


def test_large_bands_cover_upper_quarter():
    for n in range(2, 400):
        covered = []
        for band in large_bands(n):
            for p in range(band.lo, band.hi + 1):
                assert band.x <= n - 2 * p < 2 * band.x
                assert p + band.x <= n - p  # detected in time
            covered.extend(range(band.lo, band.hi + 1))
        lo, hi = n // 4 + 1, n // 2 - 1
        assert sorted(covered) == list(range(lo, hi + 1))


def test_constant_string_small_periods():
    report = run(b"a" * 16, 0)
    assert report.periods == [1, 2, 3, 4, 5, 6, 7, 8]
    assert report.diagnostics["small_candidates"] == 4


def test_near_periodic_example():
    assert run(b"abcabcadcabc", 2).periods == [3, 6]


def test_alternating_example():
    assert run(b"abababab", 0).periods == [2, 4]


def test_single_defect_example():
    assert run(b"aaaaba", 1).periods == [2, 3]


def test_degenerate_lengths():
    assert run(b"", 1).periods == []
    assert run(b"z", 1).periods == []
    assert run(b"zz", 0).periods == [1]
    assert run(b"ab", 0).periods == []


def test_matches_oracle_exhaustive_small():
    for n in range(2, 11):
        for bits in range(1 << n):
            s = bytes(97 + ((bits >> j) & 1) for j in range(n))
            for k in (0, 1, 2):
                expect = oracle_half(s, k)
                for backend in ("exact", "sketch"):
                    got = run(s, k, backend=backend).periods
                    assert got == expect, (s, k, backend)


def test_matches_oracle_random():
    rng = random.Random(321)
    for _ in range(120):
        n = rng.randrange(2, 300)
        alpha = rng.choice((2, 4))
        s = bytes(97 + rng.randrange(alpha) for _ in range(n))
        k = rng.randrange(0, 4)
        seed = rng.randrange(3)
        expect = oracle_half(s, k)
        for backend in ("exact", "sketch"):
            report = run(s, k, backend=backend)
            assert report.periods == expect, (s, k, backend, seed)


def test_agrees_with_two_pass_restricted():
    rng = random.Random(55)
    for _ in range(60):
        n = rng.randrange(4, 256)
        s = bytes(97 + rng.randrange(3) for _ in range(n))
        k = rng.randrange(0, 3)
        two = find_k_periods_two_pass(s, k)
        one = run(s, k)
        assert one.periods == [p for p in two.periods if p <= n // 2]


def test_single_read_discipline():
    # The scanner is push-only; every stream byte is handed over exactly once.
    reads = {"count": 0}
    data = b"abcabcadcabc"

    def feeder():
        for b in data:
            reads["count"] += 1
            yield b

    scanner = OnePassScanner(len(data), 2)
    for byte in feeder():
        scanner.feed_byte(byte)
    report = scanner.finalize()
    assert reads["count"] == len(data)
    assert report.periods == [3, 6]


def test_out_of_order_feed_rejected():
    scanner = OnePassScanner(8, 1)
    scanner.feed_byte(97, position=1)
    with pytest.raises(StreamOrderError):
        scanner.feed_byte(97, position=3)


def test_wrong_length_rejected():
    scanner = OnePassScanner(8, 1)
    scanner.feed(b"abc")
    with pytest.raises(LengthMismatchError):
        scanner.finalize()
    with pytest.raises(LengthMismatchError):
        OnePassScanner(2, 1).feed(b"abc")


def test_probe_finds_prefix_periods():
    # The m=4 instance probes S[1, 16]; its pi is the smallest verified
    # k-period at most 4 of that prefix.
    n = 48
    s = (b"ab" * (n // 2))[:n]
    scanner = OnePassScanner(n, 0)
    scanner.feed(s)
    scanner.finalize()
    inst = scanner.large[4]
    assert inst.band.x == 16
    assert inst.pi == 2 and inst.pi_count == 0


def test_probe_none_when_prefix_aperiodic():
    s = b"abcdefgh" + b"abcdefgh" + b"abcdefgh" + b"abcdefgh"
    scanner = OnePassScanner(len(s), 0)
    scanner.feed(s)
    scanner.finalize()
    inst = scanner.large[3]  # prefix abcdefgh has no 0-period <= 2
    assert inst.pi is None
    assert inst.band.x == 8


def test_instrumentation_invariants_on_periodic_corpus():
    rng = random.Random(77)
    checked_delta = 0
    for trial in range(40):
        n = rng.choice((32, 48, 64, 96, 128))
        k = rng.randrange(0, 3)
        block_len = rng.choice((1, 2, 3))
        block = bytes(97 + rng.randrange(2) for _ in range(block_len))
        s = bytearray(block[i % block_len] for i in range(n))
        for _ in range(k):
            s[rng.randrange(n)] ^= 1
        s = bytes(s)
        scanner = OnePassScanner(n, k, seed=trial)
        scanner.feed(s)
        report = scanner.finalize()
        assert report.periods == oracle_half(s, k)
        for m, diag in report.diagnostics["large"].items():
            if "separation_cap_ok" in diag:
                assert diag["separation_cap_ok"], (s, k, m)
            xd = diag.get("xd")
            if xd is not None:
                assert xd == sorted(xd), (s, k, m, xd)  # non-decreasing in d
            for delta in diag.get("delta", {}).values():
                checked_delta += 1
                assert 0 <= delta <= 3 * k, (s, k, m, diag)
    assert checked_delta > 0


def test_half_period_odd_length():
    # p = floor(n/2) for odd n needs the extra final byte of overlap.
    s = b"abcab"  # p=2: S[1..3]=abc vs S[3..5]=cab mism 3; oracle check below
    for k in (0, 1, 2, 3):
        assert run(s, k).periods == oracle_half(s, k)
    s2 = b"ababa"
    assert run(s2, 0).periods == [2]


def test_probe_constant_prefix():
    scanner = OnePassScanner(16, 0)
    scanner.feed(b"a" * 16)
    scanner.finalize()
    inst = scanner.large[2]  # probes S[1, 4] = "aaaa"
    assert inst.pi == 1 and inst.pi_count == 0
