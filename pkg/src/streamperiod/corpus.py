"""Deterministic test-string generators.

`planted` builds strings whose shift-p mismatch set is exactly a requested
set of positions: within each residue class mod p the byte value toggles
between two variants precisely at the requested positions, so the oracle
round-trips the construction.  `alternating_runs_prefix` and `hard_pair`
reproduce the adversarial family 1 0 11 00 111 000 ... and the x.y.x.x
concatenation whose periodicity flips on a single extra mismatch between x
and y; they stress the engines where period structure is least forgiving.
"""

from __future__ import annotations

import random

from .errors import GenerationError


def planted(block: bytes, n: int, mismatch_positions=(), seed: int = 0) -> bytes:
    """Repeat `block` to length n, then corrupt so that the set of positions
    i with S[i] != S[i+len(block)] is exactly `mismatch_positions`."""
    p = len(block)
    if p == 0 or n < 0:
        raise GenerationError("block must be non-empty and n non-negative")
    positions = sorted(set(int(i) for i in mismatch_positions))
    if positions and not (1 <= positions[0] and positions[-1] <= n - p):
        raise GenerationError(f"mismatch positions must lie in [1, {n - p}]")
    rng = random.Random(seed)
    bump = rng.randrange(1, 256)
    out = bytearray(block[(i % p)] for i in range(n))
    # Per residue class the value flips at each planted position; class
    # members are exactly p apart so each flip yields exactly one mismatch.
    toggles: dict[int, list[int]] = {}
    for i in positions:
        toggles.setdefault(i % p, []).append(i)
    for cls, flips in toggles.items():
        flips.sort()
        state = 0
        idx = 0
        pos = cls if cls >= 1 else p
        while pos <= n:
            while idx < len(flips) and flips[idx] <= pos - p:
                state ^= 1
                idx += 1
            if state:
                out[pos - 1] = (out[pos - 1] + bump) % 256
            pos += p
    return bytes(out)


def alternating_runs_prefix(length: int) -> bytes:
    """Prefix of 1 0 11 00 111 000 1111 0000 ... as ASCII bits."""
    if length < 0:
        raise GenerationError("length must be non-negative")
    out = bytearray()
    run = 1
    while len(out) < length:
        out += b"1" * run
        out += b"0" * run
        run += 1
    return bytes(out[:length])


def hard_pair(x: bytes, y: bytes) -> bytes:
    """The stress string x . y . x . x (requires |x| = |y|)."""
    if len(x) != len(y):
        raise GenerationError("x and y must have equal length")
    return x + y + x + x


def flip_bits(data: bytes, count: int, seed: int) -> bytes:
    """Flip `count` distinct ASCII bits of a 0/1 string, seeded."""
    if count > len(data):
        raise GenerationError("more flips than positions")
    rng = random.Random(seed)
    out = bytearray(data)
    for i in rng.sample(range(len(data)), count):
        out[i] = ord("1") if out[i] == ord("0") else ord("0")
    return bytes(out)


def sample_hard_pair(n: int, k: int, exceed: bool, seed: int) -> tuple[bytes, bytes]:
    """Sample (x, y) for `hard_pair` at a target distance.

    x sits at distance k/2 from the alternating-runs prefix of length n/4;
    y sits at distance k/2 from x, or k/2 + 1 when `exceed` is set.  k must
    be even and n divisible by 4.
    """
    if n % 4 or k % 2:
        raise GenerationError("need n divisible by 4 and even k")
    quarter = n // 4
    base = alternating_runs_prefix(quarter)
    x = flip_bits(base, k // 2, seed)
    y = flip_bits(x, k // 2 + (1 if exceed else 0), seed + 1)
    return x, y


def random_bytes(n: int, alphabet: int = 256, seed: int = 0) -> bytes:
    rng = random.Random(seed)
    if alphabet == 256:
        return rng.randbytes(n)
    return bytes(rng.randrange(alphabet) + 97 for _ in range(n))
