"""Ground truth and structural validation.

`brute_force_k_periods` is the quadratic reference every streaming result is
checked against.  `hop_sequence` constructively walks from i to i+gcd(p, q)
in steps of +-p / +-q inside a window of width p+q, the combinatorial step
behind the gcd compression.  `gcd_bound_validate` measures, on concrete
strings, the mismatch count of the gcd of near-period candidates against
the proved ceilings (16k^2+1 pairwise, 8mk^2+1 for m small candidates,
32mk^2+1 for candidates sharing one narrow bucket); a reported violation
means an implementation bug, so the validators double as end-to-end checks
of the index arithmetic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, RangeError

VALIDATOR_KINDS = ("pairwise", "mway", "interval")


def hamming_shift(data: bytes, p: int, limit: int | None = None) -> int:
    """Number of positions i with S[i] != S[i+p] (count capped at limit+1)."""
    n = len(data)
    if p >= n:
        return 0
    a = np.frombuffer(data, dtype=np.uint8)
    if limit is None:
        return int(np.count_nonzero(a[: n - p] != a[p:]))
    count = 0
    step = 1 << 16
    for off in range(0, n - p, step):
        hi = min(off + step, n - p)
        count += int(np.count_nonzero(a[off:hi] != a[p + off : p + hi]))
        if count > limit:
            return count
    return count


def shift_mismatch_positions(data: bytes, p: int) -> list[int]:
    """Sorted 1-indexed positions i with S[i] != S[i+p]."""
    n = len(data)
    if p >= n:
        return []
    a = np.frombuffer(data, dtype=np.uint8)
    return [int(i) + 1 for i in np.nonzero(a[: n - p] != a[p:])[0]]


def window_hamming(data: bytes, x: int, i: int) -> int:
    """HAM(S[1..x], S[i+1..i+x]); requires i + x <= len(data)."""
    a = np.frombuffer(data, dtype=np.uint8)
    return int(np.count_nonzero(a[:x] != a[i : i + x]))


def brute_force_k_periods(data: bytes, k: int) -> list[int]:
    """All p in [1, n-1] with at most k shift-p mismatches; O(n^2) reference."""
    n = len(data)
    return [p for p in range(1, n) if hamming_shift(data, p, limit=k) <= k]


@dataclass(frozen=True, slots=True)
class HopSequence:
    p: int
    q: int
    d: int
    start: int
    steps: tuple[int, ...]


def hop_sequence(p: int, q: int, i: int) -> HopSequence:
    """Walk from i to i+gcd(p,q) by steps of size p or q, staying in [1, p+q].

    Which leg moves forward depends on the sign structure of the Bezout
    coefficients: with a*p + b*q = d and a > 0 the walk adds p while it can
    and retreats by q otherwise; the mirror rule applies when b > 0.  The
    window bound is the closed interval [1, p+q]; the +p rule starting from
    exactly q attains p+q.
    """
    if not p < q:
        raise RangeError(f"require p < q, got p={p} q={q}")
    d = math.gcd(p, q)
    if not 1 <= i <= p + q - d:
        raise RangeError(f"start {i} outside [1, {p + q - d}]")
    # Bezout: a*p + b*q = d with exactly one of a, b positive.
    a, _ = _bezout(p, q)
    forward, back = (p, q) if a > 0 else (q, p)
    steps = [i]
    t = i
    guard = 4 * (p + q) // d + 8
    while t != i + d:
        t = t + forward if t <= back else t - back
        steps.append(t)
        if not 1 <= t <= p + q:
            raise AssertionError(f"hop left window: {steps}")
        if len(steps) > guard:
            raise AssertionError(f"hop failed to terminate: p={p} q={q} i={i}")
    return HopSequence(p, q, d, i, tuple(steps))


def _bezout(p: int, q: int) -> tuple[int, int]:
    old_r, r = p, q
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    return old_s, old_t


@dataclass(frozen=True, slots=True)
class BoundCheck:
    kind: str
    n: int
    x: int
    k: int
    candidates: tuple[int, ...]
    d: int
    observed: int
    bound: int

    @property
    def holds(self) -> bool:
        return self.observed <= self.bound


def gcd_bound_validate(data: bytes, x: int, candidates, k: int, kind: str) -> BoundCheck:
    """Check one gcd/mismatch ceiling on a concrete instance.

    Preconditions (raised as PreconditionError with the witness): every
    candidate i satisfies HAM(S[1,x], S[i+1,i+x]) <= k, the kind's magnitude
    constraint holds, and the probed shift window d+x fits in the string.
    """
    if kind not in VALIDATOR_KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    cands = tuple(sorted(set(int(c) for c in candidates)))
    if not cands:
        raise PreconditionError("empty candidate set")
    n = len(data)
    m = len(cands)
    if x < 1 or x > n:
        raise PreconditionError(f"x={x} outside [1, {n}]")
    for c in cands:
        if c < 1 or c + x > n:
            raise PreconditionError(f"candidate {c} window exceeds stream", witness=c)
        if window_hamming(data, x, c) > k:
            raise PreconditionError(f"candidate {c} is not {k}-similar at x={x}", witness=c)
    if kind == "pairwise":
        if m != 2:
            raise PreconditionError("pairwise kind requires exactly two candidates")
        cap = x // (4 * k + 2)
        if cands[-1] > cap:
            raise PreconditionError(f"candidate above x/(4k+2)={cap}", witness=cands[-1])
        d = math.gcd(*cands)
        bound = 16 * k * k + 1
    elif kind == "mway":
        cap = x // (2 * (m * k + 1))
        if cands[-1] > cap:
            raise PreconditionError(f"candidate above x/(2(mk+1))={cap}", witness=cands[-1])
        d = math.gcd(*cands)
        bound = 8 * m * k * k + 1
    else:  # interval: gcd of differences from the smallest, bucket-width apart
        width = x // (2 * (m * k + 1))
        if m == 1:
            d = cands[0]
        else:
            if cands[-1] - cands[0] > width:
                raise PreconditionError(
                    f"candidates spread {cands[-1] - cands[0]} exceeds bucket width {width}"
                )
            d = 0
            for c in cands[1:]:
                d = math.gcd(d, c - cands[0])
        bound = 32 * m * k * k + 1
    if d + x > n:
        raise PreconditionError(f"gcd window d+x={d + x} exceeds stream", witness=d)
    observed = window_hamming(data, x, d)
    return BoundCheck(kind, n, x, k, cands, d, observed, bound)


def write_bound_checks_csv(path, checks) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["kind", "n", "x", "k", "candidates", "d", "observed", "bound", "holds"]
        )
        for c in checks:
            writer.writerow(
                [
                    c.kind,
                    c.n,
                    c.x,
                    c.k,
                    " ".join(map(str, c.candidates)),
                    c.d,
                    c.observed,
                    c.bound,
                    int(c.holds),
                ]
            )
