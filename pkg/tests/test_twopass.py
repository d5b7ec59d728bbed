import random

import pytest

from streamperiod.errors import (
    DegenerateInputError,
    LengthMismatchError,
    StreamMutationError,
)
from streamperiod.oracle import brute_force_k_periods, shift_mismatch_positions
from streamperiod.report import SpaceStats
from streamperiod.twopass import (
    Pass1Result,
    collect_candidates,
    find_k_periods_two_pass,
    large_ranges,
    verify_candidates,
)


def run(data, k, backend="sketch", seed=0, verify_mode="auto"):
    return find_k_periods_two_pass(data, k, backend=backend, seed=seed, verify_mode=verify_mode)


def test_large_ranges_tile_upper_half():
    for n in range(2, 200):
        ranges = large_ranges(n)
        covered = []
        for rng in ranges:
            assert rng.x == n >> rng.r
            covered.extend(range(rng.lo, rng.hi + 1))
            for p in range(rng.lo, rng.hi + 1):
                assert p + rng.x <= n  # window always legal
                assert rng.x <= n - p < (n >> (rng.r - 1) if rng.r > 1 else n)
        assert covered == list(range(n // 2 + 1, n))


def test_near_periodic_example():
    report = run(b"abcabcadcabc", 2)
    assert report.periods == [3, 6, 9, 10, 11]
    assert report.mismatch_positions[3] == (5, 8)
    assert report.mismatch_counts[6] == 1


def test_single_defect_example():
    report = run(b"aaaaba", 1)
    assert report.periods == [2, 3, 4, 5]
    assert 1 not in report.periods


def test_three_mismatch_run_example():
    report = run(b"aaaaaabbccd", 3)
    assert 1 in report.periods
    assert report.mismatch_positions[1] == (6, 8, 10)


def test_alternating_string():
    assert run(b"abababab", 0).periods == brute_force_k_periods(b"abababab", 0)


def test_degenerate_inputs():
    assert run(b"", 1).periods == []
    assert run(b"z", 1).periods == []
    with pytest.raises(DegenerateInputError):
        collect_candidates(b"a", 1, 1)


def test_pass1_candidates_are_supersets():
    s = b"abcabcadcabc"
    state = collect_candidates(s, len(s), 2)
    small = set(state.small.recover())
    assert {3, 6} <= small
    large = set()
    for table in state.large.values():
        large.update(table.recover())
    assert {9, 10, 11} <= large


def test_matches_oracle_exhaustive_small():
    for n in range(2, 11):
        for bits in range(1 << n):
            s = bytes(97 + ((bits >> j) & 1) for j in range(n))
            for k in (0, 1, 2):
                expect = brute_force_k_periods(s, k)
                got = run(s, k, backend="exact").periods
                assert got == expect, (s, k, "exact")
                got = run(s, k, backend="sketch").periods
                assert got == expect, (s, k, "sketch")


def test_matches_oracle_random_strings():
    rng = random.Random(123)
    for _ in range(150):
        n = rng.randrange(2, 200)
        alpha = rng.choice((2, 3, 26))
        s = bytes(97 + rng.randrange(alpha) for _ in range(n))
        k = rng.randrange(0, 4)
        expect = brute_force_k_periods(s, k)
        for backend in ("exact", "sketch"):
            report = run(s, k, backend=backend, seed=rng.randrange(3))
            assert report.periods == expect, (s, k, backend)
            for p in report.periods:
                assert report.mismatch_positions[p] == tuple(
                    shift_mismatch_positions(s, p)
                )


def test_periodic_corpus_compressed_verification():
    # A period-2 string floods every bucket with candidates, forcing the
    # compressed verifier path (progressions denser than the bucket width).
    s = bytearray(b"ab" * 256)
    s[300] ^= 1
    s = bytes(s)
    k = 2
    expect = brute_force_k_periods(s, k)
    report = run(s, k, backend="sketch")
    assert report.periods == expect
    assert report.diagnostics["groups"]["compressed"] >= 1
    assert report.diagnostics["tracker_records"] <= report.diagnostics["tracker_record_cap"] * (
        2 * report.diagnostics["groups"]["compressed"]
    )


def test_per_candidate_mode_cross_validates():
    rng = random.Random(11)
    for _ in range(25):
        n = rng.randrange(16, 128)
        s = bytes(97 + rng.randrange(3) for _ in range(n))
        k = rng.randrange(0, 3)
        auto = run(s, k, backend="sketch", verify_mode="auto")
        per = run(s, k, backend="sketch", verify_mode="per_candidate")
        assert auto.periods == per.periods
        assert auto.mismatch_counts == per.mismatch_counts


def test_backends_agree_on_output():
    rng = random.Random(13)
    for _ in range(40):
        n = rng.randrange(4, 150)
        s = bytes(97 + rng.randrange(2) for _ in range(n))
        k = rng.randrange(0, 3)
        assert run(s, k, backend="exact").periods == run(s, k, backend="sketch").periods


def test_interpass_state_roundtrips_json():
    s = b"abcabcadcabc"
    state = collect_candidates(s, len(s), 2, seed=5)
    clone = Pass1Result.from_json(state.to_json())
    assert clone.small.recover() == state.small.recover()
    assert {r: t.recover() for r, t in clone.large.items()} == {
        r: t.recover() for r, t in state.large.items()
    }
    report = verify_candidates(s, clone)
    assert report.periods == brute_force_k_periods(s, 2)


def test_mutated_stream_between_passes_detected():
    s = b"abcabcadcabc"
    state = collect_candidates(s, len(s), 2)
    tampered = b"abcabcadcabX"
    with pytest.raises(StreamMutationError):
        verify_candidates(tampered, state)


def test_short_stream_raises_length_error():
    with pytest.raises(LengthMismatchError):
        collect_candidates(b"abc", 8, 1)


def test_vacuous_tail_periods_counted_exactly():
    s = b"abcdefgh"  # aperiodic; p = 6, 7 are vacuous at k = 2
    report = run(s, 2)
    assert 7 in report.periods and 6 in report.periods
    assert report.mismatch_counts[7] == (1 if s[0] != s[7] else 0)
    for p in report.periods:
        assert report.mismatch_positions[p] == tuple(shift_mismatch_positions(s, p))


def test_space_stats_collected():
    stats = SpaceStats(n=512, k=2, passes=2, backend="sketch")
    s = bytes(97 + (i % 4) for i in range(512))
    find_k_periods_two_pass(s, 2, stats=stats)
    assert stats.peak_total > 0
    assert "pass1" in stats.per_pass and "pass2" in stats.per_pass
    assert "prefix_sketch" in stats.per_module


def test_pass2_only_checks_recovered_candidates():
    s = bytes(97 + (i % 3) for i in range(200))
    state = collect_candidates(s, len(s), 2)
    recovered = state.small.candidate_count() + sum(
        t.candidate_count() for t in state.large.values()
    )
    report = verify_candidates(s, state)
    assert report.diagnostics["candidates_checked"] <= recovered
    assert set(report.periods) <= set(
        state.small.recover()
        + [p for t in state.large.values() for p in t.recover()]
    )


def test_tracker_overflow_falls_back_to_direct_snapshots():
    # Inject a dense false progression (pi=1) into an aperiodic stream: the
    # block checkpoints blow the 32k^2 log n cap and the tracker degrades to
    # direct snapshots; every candidate still gets verified correctly.
    rng = random.Random(99)
    n, k = 32768, 1
    s = bytes(rng.randrange(256) for _ in range(n))
    state = collect_candidates(s, n, k)
    table = state.small
    j = table.partition.bucket_of(1)
    table.first[j] = 1
    table.pi[j] = 1
    report = verify_candidates(s, state)
    assert report.diagnostics["tracker_overflows"] >= 1
    assert report.periods == brute_force_k_periods(s, k)


def test_per_candidate_mode_cap_enforced():
    import pytest as _pytest

    from streamperiod.errors import StreamPeriodError

    rng = random.Random(98)
    n, k = 32768, 1
    s = bytes(rng.randrange(256) for _ in range(n))
    state = collect_candidates(s, n, k)
    table = state.small
    j = table.partition.bucket_of(1)
    table.first[j] = 1
    table.pi[j] = 1
    with _pytest.raises(StreamPeriodError):
        verify_candidates(s, state, verify_mode="per_candidate")
