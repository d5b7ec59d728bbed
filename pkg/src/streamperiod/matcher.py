"""Online self-matching of a stream against its own prefix.

A matcher instance watches for every shift i whose window S[i+1, i+x] is
within k mismatches of the prefix S[1, x], and reports i exactly when the
stream position reaches i + x.  The driver below multiplexes any number of
instances (plus snapshot requests and per-byte segment consumers) over one
left-to-right read.

How an instance stays online in bounded state:

* An exact filter over the first f = min(x, 256) window bytes runs against
  a ring of the most recent bytes.  HAM on a window prefix can only
  undercount the full window, so the filter never rejects a true match.
* A filter survivor i is "materialized" at position i + f: the running
  whole-prefix sketch minus the ring segment (i, i+f] yields a snapshot of
  S[1, i].  At position i + x the window sketch S[i+1, i+x] is the current
  prefix sketch minus that snapshot, and one sketch comparison against the
  pattern decides the emission.  Windows no longer than the filter are
  decided by the filter count alone (exact, still at i + x).
* If the count of in-flight survivors exceeds a cap (degenerate, highly
  self-similar inputs), the instance switches to a dense mode: it keeps a
  delayed copy of the prefix sketch plus the raw bytes needed to advance
  it, which bounds state by O(x) bytes instead of one snapshot per
  survivor.  The exact backend never needs this; its snapshots are
  buffer views.
"""

from __future__ import annotations

import numpy as np

from .errors import LengthMismatchError, StreamOrderError
from .fingerprint import FingerprintContext
from .sketch import AtMost, PrefixState, SketchFamily

FILTER_WIDTH = 256
CHUNK = 4096


class Emission:
    """One matched shift: HAM(S[1,x], S[i+1,i+x]) = count <= k."""

    __slots__ = ("matcher", "index", "count", "offsets", "at", "prefix_snapshot")

    def __init__(self, matcher, index, count, offsets, at, prefix_snapshot=None):
        self.matcher = matcher
        self.index = index
        self.count = count
        self.offsets = offsets  # mismatch offsets within [1, x], when known
        self.at = at  # stream position of the emission
        self.prefix_snapshot = prefix_snapshot  # sketch of S[1, index] on request

    def __repr__(self):
        return f"Emission(i={self.index}, count={self.count}, at={self.at})"


class StreamDriver:
    """One left-to-right pass: prefix sketch, byte ring, event dispatch."""

    def __init__(self, family: SketchFamily, n: int):
        self.family = family
        self.n = n
        self.prefix = PrefixState(family)
        self.pos = 0
        self.events: dict[int, list] = {}
        self.snapshots: dict[int, object] = {}
        self._snap_wanted: set[int] = set()
        self.matchers: list[PrefixMatcher] = []
        self.active: list = []
        self.head = bytearray()
        self.head_keep = 8
        self._ring = bytearray()
        self._ring_base = 1
        self._ring_keep = max(64, family.k + 2)
        self._feed_end = 0
        self.on_emit = None

    # -- configuration (before or between feeds) -------------------------

    def add_matcher(self, matcher: "PrefixMatcher") -> "PrefixMatcher":
        self.matchers.append(matcher)
        self._ring_keep = max(self._ring_keep, matcher.f)
        self.head_keep = max(self.head_keep, matcher.f)
        if matcher.x > self.pos:
            self._schedule(matcher.x, ("pattern", matcher))
        else:
            raise StreamOrderError("matchers must be added before their pattern completes")
        return matcher

    def add_consumer(self, consumer, lo: int, hi: int) -> None:
        """Run consumer.add(pos, byte, terms) for every position in [lo, hi]."""
        if lo <= self.pos:
            raise StreamOrderError(f"consumer span starts at {lo} but stream is at {self.pos}")
        self._schedule(lo, ("on", consumer))
        if hi < self.n:
            self._schedule(hi + 1, ("off", consumer))

    def keep_recent(self, nbytes: int) -> None:
        """Guarantee the ring and head buffers retain at least nbytes."""
        self._ring_keep = max(self._ring_keep, nbytes)
        self.head_keep = max(self.head_keep, nbytes)

    def call_at(self, pos: int, fn) -> None:
        """Invoke fn(pos) when the stream reaches pos (before consumers run)."""
        if pos <= self.pos:
            raise StreamOrderError(f"cannot schedule a call at past position {pos}")
        self._schedule(pos, ("call", fn))

    def activate_consumer(self, consumer, hi: int) -> None:
        """Activate a consumer starting at the position being processed now."""
        self.active.append(consumer)
        if hi < self.n:
            self._schedule(hi + 1, ("off", consumer))

    def retire_consumer(self, consumer) -> None:
        consumer.retired = True
        if consumer in self.active:
            self.active.remove(consumer)

    def request_snapshot(self, target: int) -> None:
        """Ensure snapshots[target] will hold the sketch of S[1, target]."""
        if target in self._snap_wanted:
            return
        self._snap_wanted.add(target)
        if target > self.pos:
            self._schedule(target, ("snap",))
        else:
            self.snapshots[target] = self.prefix.snapshot_at(target, self.bytes_range)

    def _schedule(self, pos: int, item) -> None:
        self.events.setdefault(pos, []).append(item)

    # -- raw byte access ---------------------------------------------------

    def bytes_range(self, lo: int, hi: int) -> bytes:
        """Raw bytes of positions [lo, hi]; must still be inside the ring."""
        if hi < lo:
            return b""
        base = self._ring_base
        if lo < base:
            raise LengthMismatchError(f"position {lo} already left the ring (base {base})")
        return bytes(self._ring[lo - base : hi - base + 1])

    # -- feeding -----------------------------------------------------------

    def feed(self, data: bytes) -> None:
        if not data:
            return
        if self.pos + len(data) > self.n:
            raise LengthMismatchError(
                f"stream declared {self.n} bytes; got {self.pos + len(data)}"
            )
        pos0 = self.pos
        self._feed_end = pos0 + len(data)
        self._ring.extend(data)
        if len(self.head) < self.head_keep:
            need = self.head_keep - len(self.head)
            self.head.extend(data[:need])
        for m in self.matchers:
            m.plan_chunk(self, pos0, data)
        for m in self.matchers:
            if m.dense:
                m.tail.extend(data)
        events = self.events
        prefix = self.prefix
        pos = pos0
        for byte in data:
            pos += 1
            self.pos = pos
            terms = prefix.push(byte)
            if pos in events:
                for item in events.pop(pos):
                    self._dispatch(item, pos)
            if self.active:
                for c in self.active:
                    c.add(pos, byte, terms)
        keep = self._ring_keep
        if len(self._ring) > keep + (CHUNK * 2):
            drop = len(self._ring) - keep
            del self._ring[:drop]
            self._ring_base += drop

    def feed_byte(self, byte: int, position: int | None = None) -> None:
        if position is not None and position != self.pos + 1:
            raise StreamOrderError(f"expected position {self.pos + 1}, got {position}")
        self.feed(bytes([byte]))

    def _dispatch(self, item, pos: int) -> None:
        tag = item[0]
        if tag == "decide":
            _, matcher, index, snap = item
            matcher.decide(self, index, snap, pos)
        elif tag == "mat":
            _, matcher, index = item
            matcher.materialize(self, index, pos)
        elif tag == "direct":
            _, matcher, index, count, offsets = item
            matcher.emit(self, index, count, offsets, pos)
        elif tag == "densedecide":
            _, matcher, index = item
            matcher.decide_dense(self, index, pos)
        elif tag == "snap":
            self.snapshots[pos] = self.prefix.snapshot()
        elif tag == "pattern":
            item[1].pattern = self.prefix.snapshot()
        elif tag == "call":
            item[1](pos)
        elif tag == "on":
            if not getattr(item[1], "retired", False):
                self.active.append(item[1])
        elif tag == "off":
            if item[1] in self.active:
                self.active.remove(item[1])
        else:  # pragma: no cover - defensive
            raise AssertionError(f"unknown event {tag}")

    # -- accounting ----------------------------------------------------------

    def state_bytes(self) -> dict[str, int]:
        out = {
            "ring": len(self._ring) + len(self.head),
            "prefix_sketch": self.prefix.state_bytes(),
            "snapshots": sum(
                getattr(s, "state_bytes", lambda: 24)() for s in self.snapshots.values()
            ),
            "matchers": sum(m.state_bytes() for m in self.matchers),
            "events": 16 * sum(len(v) for v in self.events.values()),
        }
        if self.family.exact:
            out["stream_buffer"] = len(self.family.store)
        return out


class PrefixMatcher:
    """One (x, k) self-matching instance driven by a StreamDriver."""

    def __init__(
        self,
        family: SketchFamily,
        x: int,
        k: int,
        n: int,
        emit_lo: int = 1,
        emit_hi: int | None = None,
        tag=None,
        dense_cap: int | None = None,
        carry_snapshots: bool = False,
    ):
        self.family = family
        self.x = x
        self.k = k
        self.n = n
        self.carry_snapshots = carry_snapshots
        self.f = min(x, FILTER_WIDTH)
        self.emit_lo = max(1, emit_lo)
        self.emit_hi = min(emit_hi if emit_hi is not None else n, n - x)
        self.tag = tag
        self.pattern = None
        self.in_flight = 0
        self.emitted: list[int] = []
        self.dense = False
        self.delayed = None
        self.tail = bytearray()
        self._tail_base = 0
        if dense_cap is None:
            dense_cap = max(64, 8 * (k + 1) * max(1, (max(2, n) - 1).bit_length()))
        self.dense_cap = dense_cap if not family.exact else None

    # -- planning ----------------------------------------------------------

    def plan_chunk(self, driver: StreamDriver, pos0: int, chunk: bytes) -> None:
        if self.emit_hi < self.emit_lo:
            return
        f = self.f
        p_lo = max(pos0 + 1, f + self.emit_lo)
        p_hi = min(pos0 + len(chunk), f + self.emit_hi)
        if p_lo > p_hi:
            return
        head = self.head_bytes(driver)
        seg = driver.bytes_range(p_lo - f + 1, p_hi)
        count_hits = self._filter(seg, head, p_hi - p_lo + 1)
        for j, count in count_hits:
            p = p_lo + j
            index = p - f
            if self.x == f:
                offsets = None  # filled at emission from the ring
                driver._schedule(p, ("direct", self, index, count, offsets))
            elif self.dense:
                driver._schedule(index + self.x, ("densedecide", self, index))
            else:
                driver._schedule(p, ("mat", self, index))

    def head_bytes(self, driver: StreamDriver) -> bytes:
        return bytes(driver.head[: self.f])

    def _filter(self, seg: bytes, head: bytes, want: int):
        """(j, count) for windows j in [0, want) with count <= k."""
        f = self.f
        k = self.k
        if want >= 16 and f >= 16:
            arr = np.frombuffer(seg, dtype=np.uint8)
            win = np.lib.stride_tricks.sliding_window_view(arr, f)[:want]
            counts = (win != np.frombuffer(head, dtype=np.uint8)).sum(axis=1)
            hits = np.nonzero(counts <= k)[0]
            return [(int(j), int(counts[j])) for j in hits]
        out = []
        for j in range(want):
            count = 0
            for o in range(f):
                if seg[j + o] != head[o]:
                    count += 1
                    if count > k:
                        break
            if count <= k:
                out.append((j, count))
        return out

    # -- survivor lifecycle --------------------------------------------------

    def materialize(self, driver: StreamDriver, index: int, pos: int) -> None:
        snap = driver.prefix.snapshot_at(index, driver.bytes_range)
        self.in_flight += 1
        driver._schedule(index + self.x, ("decide", self, index, snap))
        if self.dense_cap is not None and self.in_flight > self.dense_cap and not self.dense:
            self._switch_dense(driver, index)

    def _switch_dense(self, driver: StreamDriver, index: int) -> None:
        # Seed the tail through the end of the chunk being processed; later
        # chunks are appended wholesale by feed().
        self.dense = True
        self.delayed = driver.prefix.snapshot_at(index, driver.bytes_range)
        self._tail_base = index + 1
        self.tail = bytearray(driver.bytes_range(index + 1, driver._feed_end))

    def decide(self, driver: StreamDriver, index: int, snap, pos: int) -> None:
        self.in_flight -= 1
        window = driver.prefix.snapshot().minus_prefix(snap)
        result = self.pattern.distance(window)
        if isinstance(result, AtMost):
            self.emit(driver, index, result.count, result.positions, pos, snap)

    def decide_dense(self, driver: StreamDriver, index: int, pos: int) -> None:
        delayed = self.delayed
        while delayed.length < index:
            byte = self.tail[delayed.length + 1 - self._tail_base]
            delayed.append(byte)
        consumed = delayed.length + 1 - self._tail_base
        if consumed > CHUNK:
            del self.tail[:consumed]
            self._tail_base += consumed
        window = driver.prefix.snapshot().minus_prefix(delayed)
        result = self.pattern.distance(window)
        if isinstance(result, AtMost):
            snap = delayed.clone() if self.carry_snapshots else None
            self.emit(driver, index, result.count, result.positions, pos, snap)

    def emit(self, driver: StreamDriver, index, count, offsets, pos, snap=None) -> None:
        if offsets is None:
            window = driver.bytes_range(index + 1, index + self.x)
            head = self.head_bytes(driver)
            offsets = tuple(o + 1 for o in range(self.x) if window[o] != head[o])
        if snap is None and self.carry_snapshots:
            snap = driver.prefix.snapshot_at(index, driver.bytes_range)
        self.emitted.append(index)
        if driver.on_emit is not None:
            driver.on_emit(Emission(self, index, count, offsets, pos, snap))

    # -- accounting ----------------------------------------------------------

    def state_bytes(self) -> int:
        per = self.family.sketch_state_bytes()
        total = 64 + self.f  # parameters + pattern head working copy
        if self.pattern is not None:
            total += per
        total += self.in_flight * (per + 16)
        if self.dense:
            total += per + len(self.tail)
        return total


def self_match(data: bytes, x: int, k: int, backend: str = "sketch", seed: int = 0, chunk: int = CHUNK):
    """Run one matcher over `data`; returns the list of Emissions."""
    family = SketchFamily(backend, FingerprintContext(seed), k, len(data))
    driver = StreamDriver(family, len(data))
    out: list[Emission] = []
    driver.on_emit = out.append
    if x < len(data):
        driver.add_matcher(PrefixMatcher(family, x=x, k=k, n=len(data)))
    for off in range(0, len(data), chunk):
        driver.feed(data[off : off + chunk])
    return out
