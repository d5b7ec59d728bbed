"""Position-anchored polynomial fingerprints of byte ranges.

A fingerprint summarises the range S[a, a+len-1] of a 1-indexed byte string
with three modular sums over the covered positions i (byte value b_i, seeded
base g, fixed 61-bit Mersenne prime modulus):

    h0 = sum b_i * g^i      h1 = sum i * b_i * g^i      h2 = sum b_i^2 * g^i

Weights anchor to the absolute position, not the offset, so fingerprints of
adjacent ranges compose by plain modular addition: concatenation, prefix
subtraction and re-anchoring (shift) need no per-byte rescaling.  The triple
also pins down a single differing byte between two equal-range fingerprints
exactly: the position falls out of h1/h0 and both byte values out of h0 and
h2, which is what lets the residue-family sketches recover mismatch
locations.

`repeat_run` closes the last gap needed by the verification bookkeeping: the
fingerprint of "this block's content repeated c more times" has a closed
form (geometric / arithmetico-geometric sums in g^L), so long runs of equal
blocks never have to be replayed byte by byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

from .errors import AdjacencyError

MODULUS = (1 << 61) - 1  # Mersenne prime; collision odds ~ len/2^61

_BYTE_DIFF_LIMIT = 255
_SQUARE_DIFF_LIMIT = 255 * 510


@dataclass(frozen=True, slots=True)
class Fingerprint:
    """Summary of the byte range [start, start+length-1] (1-indexed)."""

    start: int
    length: int
    h0: int
    h1: int
    h2: int

    @property
    def end(self) -> int:
        return self.start + self.length - 1

    def is_empty(self) -> bool:
        return self.length == 0


@dataclass(frozen=True, slots=True)
class Equal:
    pass


@dataclass(frozen=True, slots=True)
class OneMismatch:
    position: int
    byte_a: int
    byte_b: int


@dataclass(frozen=True, slots=True)
class ManyMismatches:
    pass


def _signed(value: int, limit: int) -> int | None:
    """Interpret a residue as a signed integer of magnitude <= limit."""
    if value <= limit:
        return value
    if value >= MODULUS - limit:
        return value - MODULUS
    return None


@lru_cache(maxsize=64)
def context_for(seed: int) -> "FingerprintContext":
    """Shared per-seed context so power caches survive across runs."""
    return FingerprintContext(seed)


class FingerprintContext:
    """Seeded arithmetic context: one modulus, one base, cached powers.

    Two contexts built from the same seed are interchangeable; equality and
    hashing follow (modulus, base) so sketches can assert compatibility.
    """

    __slots__ = ("modulus", "base", "seed", "_pow_cache", "_inv_base")

    def __init__(self, seed: int):
        self.seed = seed
        self.modulus = MODULUS
        rng = random.Random(seed)
        self.base = rng.randrange(2, MODULUS - 1)
        self._pow_cache: dict[int, int] = {0: 1, 1: self.base}
        self._inv_base = pow(self.base, MODULUS - 2, MODULUS)

    def __eq__(self, other):
        return (
            isinstance(other, FingerprintContext)
            and self.modulus == other.modulus
            and self.base == other.base
        )

    def __hash__(self):
        return hash((self.modulus, self.base))

    def __repr__(self):
        return f"FingerprintContext(seed={self.seed})"

    # -- modular helpers -------------------------------------------------

    def pow_base(self, exponent: int) -> int:
        """g^exponent mod M, cached (exponent may be negative)."""
        cached = self._pow_cache.get(exponent)
        if cached is None:
            if exponent >= 0:
                cached = pow(self.base, exponent, MODULUS)
            else:
                cached = pow(self._inv_base, -exponent, MODULUS)
            if len(self._pow_cache) < (1 << 18):
                self._pow_cache[exponent] = cached
        return cached

    def geom_sum(self, z: int, count: int) -> int:
        """sum_{u=0}^{count-1} z^u mod M."""
        if count <= 0:
            return 0
        z %= MODULUS
        if z == 1:
            return count % MODULUS
        num = (pow(z, count, MODULUS) - 1) % MODULUS
        return num * pow(z - 1, MODULUS - 2, MODULUS) % MODULUS

    def geom_weighted_sum(self, z: int, count: int) -> int:
        """sum_{u=0}^{count-1} u * z^u mod M."""
        if count <= 1:
            return 0
        z %= MODULUS
        if z == 1:
            return (count * (count - 1) // 2) % MODULUS
        # z * (1 - count*z^(count-1) + (count-1)*z^count) / (1-z)^2
        zc1 = pow(z, count - 1, MODULUS)
        zc = zc1 * z % MODULUS
        num = (1 - count * zc1 + (count - 1) * zc) % MODULUS
        inv = pow((1 - z) % MODULUS, MODULUS - 2, MODULUS)
        return z * num % MODULUS * inv % MODULUS * inv % MODULUS

    # -- construction ----------------------------------------------------

    def empty(self, start: int) -> Fingerprint:
        return Fingerprint(start, 0, 0, 0, 0)

    def extend(self, fp: Fingerprint, byte: int) -> Fingerprint:
        """Fingerprint of the range grown by one byte on the right."""
        pos = fp.start + fp.length
        w = self.pow_base(pos)
        v0 = byte * w % MODULUS
        return Fingerprint(
            fp.start,
            fp.length + 1,
            (fp.h0 + v0) % MODULUS,
            (fp.h1 + pos * v0) % MODULUS,
            (fp.h2 + byte * v0) % MODULUS,
        )

    def of_bytes(self, data, start: int = 1) -> Fingerprint:
        """Fingerprint of `data` occupying positions start..start+len-1."""
        h0 = h1 = h2 = 0
        w = self.pow_base(start)
        g = self.base
        pos = start
        for byte in data:
            v0 = byte * w
            h0 += v0
            h1 += pos * v0
            h2 += byte * v0
            w = w * g % MODULUS
            pos += 1
        return Fingerprint(start, len(data), h0 % MODULUS, h1 % MODULUS, h2 % MODULUS)

    # -- composition -----------------------------------------------------

    def concat(self, left: Fingerprint, right: Fingerprint) -> Fingerprint:
        if right.start != left.start + left.length:
            raise AdjacencyError(
                f"cannot concatenate [{left.start},{left.end}] with [{right.start},{right.end}]"
            )
        return Fingerprint(
            left.start,
            left.length + right.length,
            (left.h0 + right.h0) % MODULUS,
            (left.h1 + right.h1) % MODULUS,
            (left.h2 + right.h2) % MODULUS,
        )

    def subtract_prefix(self, whole: Fingerprint, prefix: Fingerprint) -> Fingerprint:
        """Inverse of concat: fingerprint of whole minus its leading prefix."""
        if prefix.start != whole.start or prefix.length > whole.length:
            raise AdjacencyError(
                f"[{prefix.start},{prefix.end}] is not a prefix of [{whole.start},{whole.end}]"
            )
        return Fingerprint(
            prefix.start + prefix.length,
            whole.length - prefix.length,
            (whole.h0 - prefix.h0) % MODULUS,
            (whole.h1 - prefix.h1) % MODULUS,
            (whole.h2 - prefix.h2) % MODULUS,
        )

    def shift(self, fp: Fingerprint, delta: int) -> Fingerprint:
        """Fingerprint of the same content re-anchored at start+delta."""
        if delta == 0:
            return fp
        g = self.pow_base(delta)
        return Fingerprint(
            fp.start + delta,
            fp.length,
            fp.h0 * g % MODULUS,
            (fp.h1 + delta * fp.h0) * g % MODULUS,
            fp.h2 * g % MODULUS,
        )

    def repeat_run(self, block: Fingerprint, copies: int) -> Fingerprint:
        """Fingerprint of `block`'s content repeated `copies` more times.

        The result covers [block.end+1, block.end+copies*L]; correct whenever
        the underlying stream really is L-periodic across that span.
        """
        length = block.length
        if length == 0 or copies == 0:
            return self.empty(block.end + 1)
        z = self.pow_base(length)
        e0 = self.geom_sum(z, copies + 1) - 1  # sum_{j=1..copies} z^j
        e1 = (self.geom_weighted_sum(z, copies + 1)) % MODULUS  # sum j*z^j
        h0 = block.h0 * e0 % MODULUS
        h2 = block.h2 * e0 % MODULUS
        h1 = (block.h1 * e0 + length * block.h0 % MODULUS * e1) % MODULUS
        return Fingerprint(block.end + 1, copies * length, h0 % MODULUS, h1, h2)

    # -- comparison ------------------------------------------------------

    def decode_components(self, d0: int, d1: int, d2: int, lo: int, hi: int, position_ok=None):
        """Decode component differences of two aligned summaries.

        (d0, d1, d2) are the mod-M differences of the respective components;
        candidate positions must fall in [lo, hi] and satisfy position_ok.
        """
        if d0 == 0:
            return Equal() if d1 == 0 and d2 == 0 else ManyMismatches()
        inv0 = pow(d0, MODULUS - 2, MODULUS)
        pos = d1 * inv0 % MODULUS
        if pos < lo or pos > hi:
            return ManyMismatches()
        if position_ok is not None and not position_ok(pos):
            return ManyMismatches()
        unweight = self.pow_base(-pos)
        diff = _signed(d0 * unweight % MODULUS, _BYTE_DIFF_LIMIT)
        if diff is None or diff == 0:
            return ManyMismatches()
        sq_diff = _signed(d2 * unweight % MODULUS, _SQUARE_DIFF_LIMIT)
        if sq_diff is None or sq_diff % diff != 0:
            return ManyMismatches()
        total = sq_diff // diff  # byte_a + byte_b
        if (total + diff) % 2 != 0:
            return ManyMismatches()
        byte_a = (total + diff) // 2
        byte_b = (total - diff) // 2
        if not (0 <= byte_a <= 255 and 0 <= byte_b <= 255):
            return ManyMismatches()
        return OneMismatch(pos, byte_a, byte_b)

    def decode_single(self, a: Fingerprint, b: Fingerprint, position_ok=None):
        """Compare two equal-range fingerprints and decode one mismatch.

        Returns Equal when every component matches, OneMismatch(position,
        byte_a, byte_b) when the components are consistent with exactly one
        differing position, and ManyMismatches otherwise.  Exact whenever
        the true Hamming distance of the covered contents is <= 1; for
        larger distances ManyMismatches is returned except with probability
        O(1/modulus).
        """
        if a.start != b.start or a.length != b.length:
            raise AdjacencyError(
                f"ranges [{a.start},{a.end}] and [{b.start},{b.end}] are not comparable"
            )
        return self.decode_components(
            (a.h0 - b.h0) % MODULUS,
            (a.h1 - b.h1) % MODULUS,
            (a.h2 - b.h2) % MODULUS,
            a.start,
            a.end,
            position_ok,
        )
