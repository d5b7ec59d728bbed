"""Gcd-compressed candidate sets over a partitioned index span.

Candidate period indices arriving from the self-matcher can be linear in
number, but inside a narrow enough bucket every true period sits on one
arithmetic progression: the bucket remembers only its first candidate and a
running increment, updated to gcd(increment, i - first) as candidates
arrive.  Recovery enumerates the progression from the anchor to the bucket
edge, a superset of everything inserted.  The increment only ever shrinks,
and by at least a factor of two, so it changes O(log span) times.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import RangeError


@lru_cache(maxsize=None)
def bucket_count(k: int, n: int) -> int:
    """Number of buckets per span: 2*k*ceil(log2 n) + 2."""
    return 2 * k * max(1, (max(2, n) - 1).bit_length()) + 2


@dataclass(frozen=True, slots=True)
class IntervalPartition:
    """`buckets` equal-width intervals tiling [lo, hi] (1-indexed, inclusive)."""

    lo: int
    hi: int
    buckets: int

    @property
    def width(self) -> int:
        span = self.hi - self.lo + 1
        return max(1, math.ceil(span / self.buckets))

    def bucket_of(self, i: int) -> int:
        if not (self.lo <= i <= self.hi):
            raise RangeError(f"index {i} outside [{self.lo}, {self.hi}]")
        return (i - self.lo) // self.width

    def bounds(self, j: int) -> tuple[int, int]:
        lo = self.lo + j * self.width
        return lo, min(lo + self.width - 1, self.hi)


class CandidateTable:
    """Compressed candidate set: per bucket an anchor and a gcd increment.

    `pi` is -1 until a bucket has seen two distinct candidates.  Inserting
    the anchor again is a no-op (gcd with 0 is skipped).  Inserts may arrive
    in any order; an insert below the anchor re-anchors the bucket and folds
    the old anchor into the increment, which preserves the superset
    guarantee.
    """

    __slots__ = ("partition", "first", "pi")

    def __init__(self, partition: IntervalPartition):
        self.partition = partition
        self.first: list[int | None] = [None] * partition.buckets
        self.pi: list[int] = [-1] * partition.buckets

    def insert(self, i: int) -> None:
        j = self.partition.bucket_of(i)
        anchor = self.first[j]
        if anchor is None:
            self.first[j] = i
            return
        if i == anchor:
            return
        if i < anchor:
            self.first[j] = i
            step = anchor - i
        else:
            step = i - anchor
        self.pi[j] = step if self.pi[j] == -1 else math.gcd(self.pi[j], step)

    def recover_bucket(self, j: int) -> list[int]:
        anchor = self.first[j]
        if anchor is None:
            return []
        if self.pi[j] == -1:
            return [anchor]
        _, hi = self.partition.bounds(j)
        return list(range(anchor, hi + 1, self.pi[j]))

    def recover(self) -> list[int]:
        out: list[int] = []
        for j in range(self.partition.buckets):
            out.extend(self.recover_bucket(j))
        return out

    def occupied(self) -> list[int]:
        return [j for j in range(self.partition.buckets) if self.first[j] is not None]

    def candidate_count(self) -> int:
        return sum(len(self.recover_bucket(j)) for j in self.occupied())

    def state_bytes(self) -> int:
        return 16 * self.partition.buckets + 24

    # -- serialization (inter-pass persistence) ---------------------------

    def to_dict(self) -> dict:
        return {
            "lo": self.partition.lo,
            "hi": self.partition.hi,
            "buckets": self.partition.buckets,
            "entries": {
                str(j): {"first": self.first[j], "pi": self.pi[j]}
                for j in self.occupied()
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "CandidateTable":
        table = cls(IntervalPartition(payload["lo"], payload["hi"], payload["buckets"]))
        for j, entry in payload["entries"].items():
            table.first[int(j)] = entry["first"]
            table.pi[int(j)] = entry["pi"]
        return table

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CandidateTable":
        return cls.from_dict(json.loads(text))
