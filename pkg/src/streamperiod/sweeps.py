"""Measurement sweeps shared by the report command and the acceptance suite."""

from __future__ import annotations

import random

from .corpus import planted, random_bytes
from .oracle import BoundCheck, gcd_bound_validate, window_hamming
from .report import SpaceStats
from .twopass import find_k_periods_two_pass


def planted_space_corpus(n: int, k: int = 2, seed: int = 1) -> bytes:
    """Length-n string with known k-period n/16 and exactly k planted defects."""
    block_len = max(1, n // 16)
    block = random_bytes(block_len, alphabet=4, seed=seed)
    span = n - block_len
    positions = {1 + (j + 1) * span // (k + 1) for j in range(k)}
    return planted(block, n, positions, seed=seed + 1)


def space_scaling(
    sizes, k: int = 2, seed: int = 1, backends=("sketch", "exact")
) -> list[dict]:
    """Two-pass peak-state measurements over the planted corpus."""
    rows = []
    for n in sizes:
        data = planted_space_corpus(n, k, seed)
        for backend in backends:
            stats = SpaceStats(n=n, k=k, passes=2, backend=backend)
            report = find_k_periods_two_pass(data, k, backend=backend, seed=seed, stats=stats)
            rows.append(
                {
                    "n": n,
                    "backend": backend,
                    "peak_total": stats.peak_total,
                    "pass1": stats.per_pass.get("pass1", 0),
                    "pass2": stats.per_pass.get("pass2", 0),
                    "wall_time": stats.wall_time,
                    "periods_found": len(report.periods),
                }
            )
    return rows


def doubling_ratios(rows, backend: str) -> list[tuple[int, float]]:
    """(n, peak(n)/peak(n/2)) for consecutive doublings of one backend."""
    by_n = {row["n"]: row["peak_total"] for row in rows if row["backend"] == backend}
    out = []
    for n in sorted(by_n):
        if n // 2 in by_n and by_n[n // 2]:
            out.append((n, by_n[n] / by_n[n // 2]))
    return out


def _candidate_scan(data: bytes, x: int, k: int, cap: int) -> list[int]:
    n = len(data)
    out = []
    for i in range(1, min(cap, n - x) + 1):
        if window_hamming(data, x, i) <= k:
            out.append(i)
    return out


def bound_check_sweep(kind: str, count: int, seed: int, n_max: int = 256, k_max: int = 3):
    """Seeded precondition-satisfying instances for one bound validator.

    Strings are near-periodic with at most floor(k/2) planted defects, so
    block multiples below the magnitude cap are guaranteed candidates; the
    scan then takes whatever else qualifies.  Yields exactly `count`
    BoundCheck results.
    """
    rng = random.Random(seed)
    produced = 0
    attempts = 0
    checks: list[BoundCheck] = []
    while produced < count:
        attempts += 1
        if attempts > 80 * count:
            raise RuntimeError(f"sweep for {kind} stalled after {attempts} attempts")
        k = rng.randrange(0, k_max + 1)
        n = rng.randrange(max(96, n_max // 2), n_max + 1)
        block_len = rng.randrange(1, 4)
        block = random_bytes(block_len, alphabet=3, seed=rng.randrange(1 << 30))
        defects = rng.randrange(0, k // 2 + 1)
        span = n - block_len
        positions = set()
        while len(positions) < defects:
            positions.add(rng.randrange(1, span + 1))
        data = planted(block, n, positions, seed=rng.randrange(1 << 30))
        x = rng.randrange(n // 2, (3 * n) // 4)
        if kind == "pairwise":
            cap = x // (4 * k + 2)
        else:
            cap = x // (2 * (2 * k + 1))  # refined below once m is known
        cands = _candidate_scan(data, x, k, max(cap, 1))
        if kind == "pairwise":
            if len(cands) < 2:
                continue
            pick = sorted(rng.sample(cands, 2))
        elif kind == "mway":
            m = rng.randrange(2, 5)
            cap_m = x // (2 * (m * k + 1))
            pool = [c for c in cands if c <= cap_m]
            if len(pool) < m:
                continue
            pick = sorted(rng.sample(pool, m))
        else:  # interval
            m = rng.randrange(1, 5)
            if len(cands) < m:
                continue
            width = x // (2 * (m * k + 1))
            lo_idx = rng.randrange(0, len(cands))
            window = [c for c in cands[lo_idx:] if c - cands[lo_idx] <= width][:m]
            if len(window) < m:
                continue
            pick = window
        check = gcd_bound_validate(data, x, pick, k=k, kind=kind)
        checks.append(check)
        produced += 1
    return checks
