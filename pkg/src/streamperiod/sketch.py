"""Bounded-state Hamming comparators between ranges of a byte stream.

Two interchangeable backends answer the same question - do two equal-length
ranges differ in at most k positions, and where - behind one API:

* ``exact``    keeps the raw bytes (one shared buffer per stream, sketches
               are views into it).  Linear state; the correctness reference.
* ``residue``  keeps, for a family of small primes p > 2k, one fingerprint
               per residue class of positions mod p.  State is independent
               of the range length.  Comparing two sketches subtracts the
               class fingerprints and iteratively peels single-mismatch
               classes; a recovered (position, byte, byte) triple is removed
               from every other prime's class, which unlocks further
               classes.  With t >= max(3, log2 n) primes, any set of <= k
               mismatch positions leaves each position isolated in some
               prime at the scales this package targets, so the decision and
               the position set are exact; a failure to fully peel is
               reported conservatively as MoreThan(k).

Residue sketches are position-anchored like plain fingerprints, so they
support concatenation, prefix/suffix subtraction, re-anchoring, and the
closed-form "repeat this block c times" extension used by the verification
bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AdjacencyError, IncompatibleSketchError
from .fingerprint import (
    Equal,
    Fingerprint,
    FingerprintContext,
    ManyMismatches,
    MODULUS,
    OneMismatch,
)

# Counts every sketch comparison made in the process; the acceptance suite
# uses it for the collision-rate bookkeeping.
DISTANCE_CALLS = 0


def reset_distance_calls() -> int:
    global DISTANCE_CALLS
    old = DISTANCE_CALLS
    DISTANCE_CALLS = 0
    return old


@dataclass(frozen=True, slots=True)
class AtMost:
    """Hamming distance is `count` (<= budget); positions in the left frame."""

    count: int
    positions: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class MoreThan:
    """Hamming distance exceeds the budget."""

    budget: int


@lru_cache(maxsize=None)
def hamming_primes(k: int, n_hint: int) -> tuple[int, ...]:
    """First max(3, ceil(log2 n)) primes strictly greater than 2k."""
    count = max(3, (max(2, n_hint) - 1).bit_length())
    primes = []
    cand = 2 * k + 1
    while len(primes) < count:
        while True:
            if cand >= 2 and all(cand % q for q in range(2, int(cand**0.5) + 1)):
                break
            cand += 1
        if cand > 2 * k:
            primes.append(cand)
        cand += 1
    return tuple(primes)


class ByteStore:
    """Shared 1-indexed byte buffer backing the exact backend."""

    __slots__ = ("data",)

    def __init__(self):
        self.data = bytearray()

    def append(self, byte: int):
        self.data.append(byte)

    def extend(self, chunk: bytes):
        self.data += chunk

    def view(self, start: int, length: int) -> memoryview:
        return memoryview(self.data)[start - 1 : start - 1 + length]

    def __len__(self):
        return len(self.data)


class ExactSketch:
    """A (start, length) window of the shared buffer; the reference backend."""

    __slots__ = ("store", "start", "length", "k")

    def __init__(self, store: ByteStore, start: int, length: int, k: int):
        self.store = store
        self.start = start
        self.length = length
        self.k = k

    @property
    def end(self) -> int:
        return self.start + self.length - 1

    def content(self) -> memoryview:
        return self.store.view(self.start, self.length)

    def clone(self):
        return self

    def state_bytes(self) -> int:
        return 24  # three indices; the buffer is accounted once per stream

    def minus_prefix(self, prefix: "ExactSketch") -> "ExactSketch":
        if prefix.store is not self.store or prefix.start != self.start or prefix.length > self.length:
            raise AdjacencyError("not a prefix view of the same buffer")
        return ExactSketch(
            self.store, self.start + prefix.length, self.length - prefix.length, self.k
        )

    def distance(self, other: "ExactSketch", budget: int | None = None):
        global DISTANCE_CALLS
        DISTANCE_CALLS += 1
        if not isinstance(other, ExactSketch) or other.store is not self.store:
            raise IncompatibleSketchError("exact sketches must share one buffer")
        if self.length != other.length or self.k != other.k:
            raise IncompatibleSketchError("length or budget mismatch")
        if budget is None:
            budget = self.k
        a = self.content()
        b = other.content()
        if self.length >= 512:
            av = np.frombuffer(a, dtype=np.uint8)
            bv = np.frombuffer(b, dtype=np.uint8)
            positions = []
            count = 0
            step = 1 << 15
            for off in range(0, self.length, step):
                neq = np.nonzero(av[off : off + step] != bv[off : off + step])[0]
                count += len(neq)
                if count > budget:
                    return MoreThan(budget)
                positions.extend(int(j) + off + self.start for j in neq)
            return AtMost(count, tuple(positions))
        positions = []
        for off in range(self.length):
            if a[off] != b[off]:
                positions.append(self.start + off)
                if len(positions) > budget:
                    return MoreThan(budget)
        return AtMost(len(positions), tuple(positions))


class ResidueSketch:
    """Per-(prime, residue-class) fingerprints of one contiguous range."""

    __slots__ = ("ctx", "k", "primes", "start", "length", "h0", "h1", "h2")

    def __init__(self, ctx, k, primes, start, length, h0, h1, h2):
        self.ctx = ctx
        self.k = k
        self.primes = primes
        self.start = start
        self.length = length
        self.h0 = h0  # list per prime of class-sum lists
        self.h1 = h1
        self.h2 = h2

    @classmethod
    def zero(cls, ctx, k, primes, start):
        return cls(
            ctx,
            k,
            primes,
            start,
            0,
            [[0] * p for p in primes],
            [[0] * p for p in primes],
            [[0] * p for p in primes],
        )

    @property
    def end(self) -> int:
        return self.start + self.length - 1

    def clone(self) -> "ResidueSketch":
        return ResidueSketch(
            self.ctx,
            self.k,
            self.primes,
            self.start,
            self.length,
            [row[:] for row in self.h0],
            [row[:] for row in self.h1],
            [row[:] for row in self.h2],
        )

    def state_bytes(self) -> int:
        return 8 * (3 * sum(self.primes) + 6)

    # -- per-byte growth (engine provides the shared weighted terms) -----

    def add_term(self, pos: int, v0: int, v1: int, v2: int):
        """Fold in byte at `pos` with v0=b*g^pos, v1=pos*v0, v2=b^2*g^pos."""
        for p, a0, a1, a2 in zip(self.primes, self.h0, self.h1, self.h2):
            r = pos % p
            a0[r] = (a0[r] + v0) % MODULUS
            a1[r] = (a1[r] + v1) % MODULUS
            a2[r] = (a2[r] + v2) % MODULUS
        self.length += 1

    def append(self, byte: int):
        pos = self.start + self.length
        w = self.ctx.pow_base(pos)
        v0 = byte * w % MODULUS
        self.add_term(pos, v0, pos * v0 % MODULUS, byte * v0 % MODULUS)

    # -- composition -------------------------------------------------------

    def _compatible(self, other: "ResidueSketch"):
        if (
            not isinstance(other, ResidueSketch)
            or self.ctx != other.ctx
            or self.k != other.k
            or self.primes != other.primes
        ):
            raise IncompatibleSketchError("sketches built with different parameters")

    def concat(self, other: "ResidueSketch") -> "ResidueSketch":
        self._compatible(other)
        if other.start != self.start + self.length:
            raise AdjacencyError("ranges not adjacent")
        h0, h1, h2 = [], [], []
        for i in range(len(self.primes)):
            h0.append([(x + y) % MODULUS for x, y in zip(self.h0[i], other.h0[i])])
            h1.append([(x + y) % MODULUS for x, y in zip(self.h1[i], other.h1[i])])
            h2.append([(x + y) % MODULUS for x, y in zip(self.h2[i], other.h2[i])])
        return ResidueSketch(
            self.ctx, self.k, self.primes, self.start, self.length + other.length, h0, h1, h2
        )

    def minus_prefix(self, prefix: "ResidueSketch") -> "ResidueSketch":
        self._compatible(prefix)
        if prefix.start != self.start or prefix.length > self.length:
            raise AdjacencyError("not a prefix of this range")
        h0, h1, h2 = [], [], []
        for i in range(len(self.primes)):
            h0.append([(x - y) % MODULUS for x, y in zip(self.h0[i], prefix.h0[i])])
            h1.append([(x - y) % MODULUS for x, y in zip(self.h1[i], prefix.h1[i])])
            h2.append([(x - y) % MODULUS for x, y in zip(self.h2[i], prefix.h2[i])])
        return ResidueSketch(
            self.ctx,
            self.k,
            self.primes,
            self.start + prefix.length,
            self.length - prefix.length,
            h0,
            h1,
            h2,
        )

    def shifted(self, delta: int) -> "ResidueSketch":
        """Same content re-anchored at start+delta (classes rotate mod p)."""
        if delta == 0:
            return self
        g = self.ctx.pow_base(delta)
        h0, h1, h2 = [], [], []
        for p, a0, a1, a2 in zip(self.primes, self.h0, self.h1, self.h2):
            n0 = [0] * p
            n1 = [0] * p
            n2 = [0] * p
            for r in range(p):
                t = (r + delta) % p
                n0[t] = a0[r] * g % MODULUS
                n1[t] = (a1[r] + delta * a0[r]) * g % MODULUS
                n2[t] = a2[r] * g % MODULUS
            h0.append(n0)
            h1.append(n1)
            h2.append(n2)
        return ResidueSketch(
            self.ctx, self.k, self.primes, self.start + delta, self.length, h0, h1, h2
        )

    def repeat_blocks(self, copies: int) -> "ResidueSketch":
        """Sketch of this block's content repeated `copies` more times.

        Covers [end+1, end+copies*length]; valid when the stream really is
        length-periodic over that span.  Per prime, copies j in one residue
        class of j mod p land in a fixed target class with geometric /
        arithmetico-geometric scalar weights, so the cost is O(sum p^2)
        regardless of `copies`.
        """
        ctx = self.ctx
        L = self.length
        out = ResidueSketch.zero(ctx, self.k, self.primes, self.start + L)
        if L == 0 or copies == 0:
            return out
        out.length = copies * L
        z_base = ctx.pow_base(L)
        for i, p in enumerate(self.primes):
            a0, a1, a2 = self.h0[i], self.h1[i], self.h2[i]
            n0, n1, n2 = out.h0[i], out.h1[i], out.h2[i]
            z = pow(z_base, p, MODULUS)
            for s in range(1, p + 1):
                reps = (copies - s) // p + 1 if s <= copies else 0
                if reps == 0:
                    continue
                f = ctx.pow_base(s * L)
                e0 = ctx.geom_sum(z, reps)
                e1 = ctx.geom_weighted_sum(z, reps)
                scal0 = f * e0 % MODULUS
                scalj = f * ((s * e0 + p * e1) % MODULUS) % MODULUS  # sum of j*z^j weights
                rot = (s * L) % p
                for r in range(p):
                    t = (r + rot) % p
                    n0[t] = (n0[t] + a0[r] * scal0) % MODULUS
                    n2[t] = (n2[t] + a2[r] * scal0) % MODULUS
                    n1[t] = (n1[t] + a1[r] * scal0 + L * a0[r] % MODULUS * scalj) % MODULUS
        return out

    # -- inspection --------------------------------------------------------

    def totals(self) -> Fingerprint:
        """Plain whole-range fingerprint (class sums of the first prime)."""
        return Fingerprint(
            self.start,
            self.length,
            sum(self.h0[0]) % MODULUS,
            sum(self.h1[0]) % MODULUS,
            sum(self.h2[0]) % MODULUS,
        )

    def class_fingerprint(self, prime_index: int, residue: int) -> Fingerprint:
        """Fingerprint of the subsequence of positions = residue mod prime."""
        return Fingerprint(
            self.start,
            self.length,
            self.h0[prime_index][residue],
            self.h1[prime_index][residue],
            self.h2[prime_index][residue],
        )

    # -- comparison ----------------------------------------------------------

    def distance(self, other: "ResidueSketch", budget: int | None = None):
        """Decide HAM <= budget (default k), with positions in self's frame."""
        global DISTANCE_CALLS
        DISTANCE_CALLS += 1
        self._compatible(other)
        if self.length != other.length:
            raise IncompatibleSketchError("ranges have different lengths")
        if budget is None:
            budget = self.k
        delta = other.start - self.start
        left = self.shifted(delta) if delta else self
        lo, hi = other.start, other.end
        ctx = self.ctx
        primes = self.primes
        d0 = []
        d1 = []
        d2 = []
        for i in range(len(primes)):
            d0.append([(x - y) % MODULUS for x, y in zip(left.h0[i], other.h0[i])])
            d1.append([(x - y) % MODULUS for x, y in zip(left.h1[i], other.h1[i])])
            d2.append([(x - y) % MODULUS for x, y in zip(left.h2[i], other.h2[i])])
        found: dict[int, tuple[int, int]] = {}
        while True:
            progress = False
            unsolved = False
            for i, p in enumerate(primes):
                e0, e1, e2 = d0[i], d1[i], d2[i]
                for r in range(p):
                    if not (e0[r] or e1[r] or e2[r]):
                        continue
                    res = ctx.decode_components(
                        e0[r],
                        e1[r],
                        e2[r],
                        lo,
                        hi,
                        lambda pos, p=p, r=r: pos % p == r,
                    )
                    if isinstance(res, OneMismatch):
                        pos, ba, bb = res.position, res.byte_a, res.byte_b
                        if pos in found:
                            return MoreThan(budget)
                        found[pos] = (ba, bb)
                        if len(found) > budget:
                            return MoreThan(budget)
                        w = ctx.pow_base(pos)
                        c0 = (ba - bb) * w % MODULUS
                        c1 = pos * c0 % MODULUS
                        c2 = (ba * ba - bb * bb) * w % MODULUS
                        for j, q in enumerate(primes):
                            rq = pos % q
                            d0[j][rq] = (d0[j][rq] - c0) % MODULUS
                            d1[j][rq] = (d1[j][rq] - c1) % MODULUS
                            d2[j][rq] = (d2[j][rq] - c2) % MODULUS
                        progress = True
                    else:
                        unsolved = True
            if not unsolved:
                return AtMost(len(found), tuple(sorted(pos - delta for pos in found)))
            if not progress:
                return MoreThan(budget)


def peel_class(ctx: FingerprintContext, class_a: Fingerprint, class_b: Fingerprint, prime: int, residue: int):
    """Decode one residue class pair: Equal, OneMismatch or ManyMismatches."""
    return ctx.decode_single(
        class_a, class_b, position_ok=lambda pos: pos % prime == residue
    )


class SketchFamily:
    """Factory and shared context for one backend over one stream."""

    def __init__(self, backend: str, ctx: FingerprintContext, k: int, n_hint: int):
        if backend not in ("exact", "sketch"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self.ctx = ctx
        self.k = k
        self.n_hint = max(2, n_hint)
        self.primes = hamming_primes(k, self.n_hint)
        self.store = ByteStore() if backend == "exact" else None

    @property
    def exact(self) -> bool:
        return self.backend == "exact"

    def zero(self, start: int):
        if self.exact:
            return ExactSketch(self.store, start, 0, self.k)
        return ResidueSketch.zero(self.ctx, self.k, self.primes, start)

    def of_bytes(self, data: bytes, start: int):
        """Sketch of `data` at positions start.. (residue backend only path
        for synthesized ranges; exact backend must reference stored bytes)."""
        if self.exact:
            return ExactSketch(self.store, start, len(data), self.k)
        sk = self.zero(start)
        ctx = self.ctx
        w = ctx.pow_base(start)
        g = ctx.base
        pos = start
        for byte in data:
            v0 = byte * w % MODULUS
            sk.add_term(pos, v0, pos * v0 % MODULUS, byte * v0 % MODULUS)
            w = w * g % MODULUS
            pos += 1
        return sk

    def sketch_state_bytes(self) -> int:
        if self.exact:
            return 24
        return 8 * (3 * sum(self.primes) + 6)


class PrefixState:
    """The growing sketch of S[1..pos], shared by everything in one pass."""

    __slots__ = ("family", "pos", "sketch", "_w")

    def __init__(self, family: SketchFamily):
        self.family = family
        self.pos = 0
        self.sketch = None if family.exact else family.zero(1)
        self._w = family.ctx.base  # g^(pos+1)

    def push(self, byte: int):
        self.pos += 1
        if self.family.exact:
            self.family.store.append(byte)
            return None
        pos = self.pos
        v0 = byte * self._w % MODULUS
        v1 = pos * v0 % MODULUS
        v2 = byte * v0 % MODULUS
        self.sketch.add_term(pos, v0, v1, v2)
        self._w = self._w * self.family.ctx.base % MODULUS
        return v0, v1, v2

    def snapshot(self):
        """Sketch of S[1..pos]."""
        if self.family.exact:
            return ExactSketch(self.family.store, 1, self.pos, self.family.k)
        return self.sketch.clone()

    def snapshot_at(self, i: int, recent_bytes) -> object:
        """Sketch of S[1..i] for i <= pos; `recent_bytes(lo, hi)` must be able
        to produce the raw bytes of positions i+1..pos."""
        if i == self.pos:
            return self.snapshot()
        if self.family.exact:
            return ExactSketch(self.family.store, 1, i, self.family.k)
        tail = self.family.of_bytes(recent_bytes(i + 1, self.pos), i + 1)
        whole = self.sketch
        h0, h1, h2 = [], [], []
        for idx in range(len(whole.primes)):
            h0.append([(x - y) % MODULUS for x, y in zip(whole.h0[idx], tail.h0[idx])])
            h1.append([(x - y) % MODULUS for x, y in zip(whole.h1[idx], tail.h1[idx])])
            h2.append([(x - y) % MODULUS for x, y in zip(whole.h2[idx], tail.h2[idx])])
        return ResidueSketch(whole.ctx, whole.k, whole.primes, 1, i, h0, h1, h2)

    def state_bytes(self) -> int:
        return 16 + (0 if self.family.exact else self.sketch.state_bytes())


class SegmentBuilder:
    """Accumulates the sketch of one contiguous segment fed byte by byte."""

    __slots__ = ("family", "sketch", "expected")

    def __init__(self, family: SketchFamily, start: int):
        self.family = family
        self.sketch = family.zero(start)
        self.expected = start

    def add(self, pos: int, byte: int, terms=None):
        assert pos == self.expected, "segment bytes must arrive in order"
        if self.family.exact:
            self.sketch.length += 1
        elif terms is not None:
            self.sketch.add_term(pos, *terms)
        else:
            self.sketch.append(byte)
        self.expected += 1

    def finish(self):
        return self.sketch
