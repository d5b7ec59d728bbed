"""Two-pass period finder: collect candidate shifts, then verify them.

Pass 1 runs self-matchers over one read of the stream.  Periods up to n/2
are all witnessed by the window x = floor(n/2); longer periods p only leave
room for a window of length n - p, so the upper half splits into ranges
with exponentially shrinking windows x_r = floor(n / 2^r), range r holding
the p with x_r <= n - p < x_{r-1}.  Matched shifts are not stored one by
one: each table bucket keeps an anchor and a gcd-compressed increment.

Pass 2 re-reads the stream and decides HAM(S[1, n-p], S[p+1, n]) <= k for
every recovered candidate.  Both sides reduce to prefix sketches: the left
side is the prefix sketch at n-p, the right side is the whole-stream sketch
minus the prefix sketch at p.  A bucket's candidates form one arithmetic
progression with step pi, and all their prefix-sketch targets share a phase
mod pi, so one block tracker per side stores a checkpoint (prefix sketch +
last block sketch) only where consecutive pi-length blocks change content;
between checkpoints the needed sketches are synthesized with the
closed-form repeated-block extension.  The checkpoint count is capped at
32*k^2*ceil(log2 n) + 1 per tracker (genuine candidate structure never
exceeds it); on overflow the tracker degrades to direct snapshots at the
remaining targets.  Candidates with n - p <= k are vacuous periods and are
settled from small head/tail byte buffers without sketch work.
"""

from __future__ import annotations

import json
import time
import zlib
from bisect import bisect_right
from dataclasses import dataclass, field

from .candidates import CandidateTable, IntervalPartition, bucket_count
from .errors import (
    DegenerateInputError,
    LengthMismatchError,
    StreamMutationError,
    StreamPeriodError,
)
from .fingerprint import context_for
from .matcher import CHUNK, PrefixMatcher, StreamDriver
from .report import PeriodReport, SpaceStats
from .sketch import AtMost, SegmentBuilder, SketchFamily

TAIL_WINDOW_CAP = 4096


@dataclass(frozen=True, slots=True)
class LargeRange:
    r: int
    x: int
    lo: int
    hi: int


def large_ranges(n: int) -> list[LargeRange]:
    """Window ranges covering periods in (floor(n/2), n-1], tiling exactly."""
    out = []
    half = n // 2
    x_prev = n
    r = 1
    while True:
        x = n >> r
        if x == 0:
            break
        lo = max(n - x_prev + 1, half + 1)
        hi = n - x
        if lo <= hi:
            out.append(LargeRange(r, x, lo, hi))
        x_prev = x
        r += 1
    return out


@dataclass
class Pass1Result:
    n: int
    k: int
    seed: int
    backend: str
    digest: int
    small: CandidateTable
    large: dict[int, CandidateTable] = field(default_factory=dict)
    large_x: dict[int, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "format": 1,
                "n": self.n,
                "k": self.k,
                "seed": self.seed,
                "backend": self.backend,
                "digest": self.digest,
                "small": self.small.to_dict(),
                "large": {
                    str(r): {"x": self.large_x[r], "table": t.to_dict()}
                    for r, t in self.large.items()
                },
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Pass1Result":
        raw = json.loads(text)
        result = cls(
            n=raw["n"],
            k=raw["k"],
            seed=raw["seed"],
            backend=raw["backend"],
            digest=raw["digest"],
            small=CandidateTable.from_dict(raw["small"]),
        )
        for r, entry in raw["large"].items():
            result.large[int(r)] = CandidateTable.from_dict(entry["table"])
            result.large_x[int(r)] = entry["x"]
        return result


def iter_chunks(source, chunk: int = CHUNK):
    """Yield chunks from bytes, a path, or a zero-argument reader factory."""
    if isinstance(source, (bytes, bytearray, memoryview)):
        data = bytes(source)
        for off in range(0, len(data), chunk):
            yield data[off : off + chunk]
    elif isinstance(source, str):
        with open(source, "rb") as handle:
            while True:
                piece = handle.read(chunk)
                if not piece:
                    return
                yield piece
    elif callable(source):
        yield from source()
    else:
        raise TypeError(f"unsupported stream source {type(source)!r}")


def source_length(source) -> int | None:
    import os

    if isinstance(source, (bytes, bytearray, memoryview)):
        return len(source)
    if isinstance(source, str):
        return os.path.getsize(source)
    return None


def collect_candidates(
    source, n: int, k: int, backend: str = "sketch", seed: int = 0, stats: SpaceStats | None = None
) -> Pass1Result:
    """Pass 1: tables of gcd-compressed candidate periods, plus a digest."""
    if n < 2:
        raise DegenerateInputError(f"need at least 2 bytes, have {n}")
    family = SketchFamily(backend, context_for(seed), k, n)
    driver = StreamDriver(family, n)
    half = n // 2
    small_x = half
    small = CandidateTable(IntervalPartition(1, half, bucket_count(k, n)))
    ranges = large_ranges(n)
    large: dict[int, CandidateTable] = {}
    large_x: dict[int, int] = {}
    for rng in ranges:
        large[rng.r] = CandidateTable(
            IntervalPartition(rng.lo, rng.hi, bucket_count(k, n))
        )
        large_x[rng.r] = rng.x
    r1 = ranges[0] if ranges and ranges[0].r == 1 else None

    def routed_small(i):
        if i <= half:
            small.insert(i)
        elif r1 is not None and r1.lo <= i <= r1.hi:
            large[1].insert(i)

    matcher_sinks = {}
    lead = PrefixMatcher(family, x=small_x, k=k, n=n, emit_lo=1, emit_hi=n - small_x, tag="small")
    driver.add_matcher(lead)
    matcher_sinks[id(lead)] = routed_small
    for rng in ranges:
        if rng.r == 1:
            continue
        m = PrefixMatcher(
            family, x=rng.x, k=k, n=n, emit_lo=rng.lo, emit_hi=rng.hi, tag=f"r{rng.r}"
        )
        driver.add_matcher(m)
        matcher_sinks[id(m)] = large[rng.r].insert

    driver.on_emit = lambda e: matcher_sinks[id(e.matcher)](e.index)

    digest = 0
    fed = 0
    for piece in iter_chunks(source):
        take = piece[: n - fed]
        digest = zlib.crc32(take, digest)
        driver.feed(take)
        fed += len(take)
        if stats is not None:
            stats.observe("pass1", _pass1_state(driver, small, large))
        if fed >= n:
            break
    if fed != n:
        raise LengthMismatchError(f"declared {n} bytes, stream held {fed}")
    return Pass1Result(n, k, seed, backend, digest, small, large, large_x)


def _pass1_state(driver, small, large):
    modules = driver.state_bytes()
    modules["tables"] = small.state_bytes() + sum(t.state_bytes() for t in large.values())
    return modules


class BlockTracker:
    """Prefix-sketch synthesis along one arithmetic progression of targets.

    Watches the span (anchor, last]; at every boundary anchor + c*pi it
    closes the in-flight pi-length block sketch, compares it with the
    previous block, and checkpoints (position, prefix sketch, block sketch)
    when the content changed.  synthesize(t) then rebuilds the prefix
    sketch at any phase-aligned target from the last checkpoint at or below
    t plus a repeated-block extension.
    """

    def __init__(self, driver, family, pi: int, anchor: int, last: int, targets, cap: int):
        self.driver = driver
        self.family = family
        self.pi = pi
        self.anchor = anchor
        self.last = last
        self.targets = set(targets)
        self.cap = cap
        self.records: list[tuple[int, object, object]] = []
        self.record_positions: list[int] = []
        self.overflowed = False
        self.direct: dict[int, object] = {}
        self.last_block = None
        self._builder = SegmentBuilder(family, anchor + 1)

    def add(self, pos: int, byte: int, terms) -> None:
        self._builder.add(pos, byte, terms)
        if (pos - self.anchor) % self.pi:
            return
        block = self._builder.finish()
        self._builder = SegmentBuilder(self.family, pos + 1)
        changed = True
        if self.last_block is not None:
            prev = self.last_block.totals()
            ctx = self.family.ctx
            changed = ctx.shift(prev, self.pi) != block.totals()
        if changed:
            if self.overflowed or len(self.records) >= self.cap:
                self.overflowed = True
            else:
                self.records.append((pos, self.driver.prefix.snapshot(), block))
                self.record_positions.append(pos)
        if self.overflowed and pos in self.targets:
            self.direct[pos] = self.driver.prefix.snapshot()
        self.last_block = block

    def synthesize(self, target: int):
        """Prefix sketch of S[1, target] for a phase-aligned target."""
        if target == self.anchor:
            return self.driver.snapshots[self.anchor]
        if target in self.direct:
            return self.direct[target]
        idx = bisect_right(self.record_positions, target) - 1
        if idx < 0:
            raise StreamPeriodError(f"no checkpoint at or below target {target}")
        pos, prefix_sketch, block = self.records[idx]
        if pos == target:
            return prefix_sketch
        copies = (target - pos) // self.pi
        return prefix_sketch.concat(block.repeat_blocks(copies))

    def state_bytes(self) -> int:
        per = self.family.sketch_state_bytes()
        return (
            len(self.records) * (2 * per + 8)
            + len(self.direct) * per
            + 2 * per  # in-flight block + last block
            + 8 * len(self.targets)
        )


@dataclass
class _Group:
    table_tag: str
    pi: int
    candidates: list[int]
    mode: str  # "direct" | "compressed"
    low_tracker: BlockTracker | None = None
    high_tracker: BlockTracker | None = None


def verify_candidates(
    source,
    state: Pass1Result,
    verify_mode: str = "auto",
    stats: SpaceStats | None = None,
) -> PeriodReport:
    """Pass 2: re-read the stream and verify every recovered candidate."""
    if verify_mode not in ("auto", "per_candidate"):
        raise ValueError(f"unknown verify_mode {verify_mode!r}")
    n, k = state.n, state.k
    family = SketchFamily(state.backend, context_for(state.seed), k, n)
    driver = StreamDriver(family, n)
    tail_window = min(k, TAIL_WINDOW_CAP)
    driver.keep_recent(tail_window + 2)
    cap = 32 * k * k * max(1, (max(2, n) - 1).bit_length()) + 1
    per_candidate_cap = 4 * bucket_count(k, n)

    tail_candidates: list[int] = []
    groups: list[_Group] = []
    tables = [("small", state.small)] + [
        (f"r{r}", state.large[r]) for r in sorted(state.large)
    ]
    for tag, table in tables:
        for j in table.occupied():
            cands = [p for p in table.recover_bucket(j) if p <= n - 1]
            if not cands:
                continue
            plain = [p for p in cands if n - p > tail_window]
            tail_candidates.extend(p for p in cands if n - p <= tail_window)
            if not plain:
                continue
            pi = table.pi[j]
            compressed = (
                verify_mode == "auto"
                and not family.exact
                and len(plain) >= 2
                and pi > 0
            )
            group = _Group(tag, pi, plain, "compressed" if compressed else "direct")
            if compressed:
                p1, pm = plain[0], plain[-1]
                driver.request_snapshot(p1)
                driver.request_snapshot(n - pm)
                group.low_tracker = BlockTracker(
                    driver, family, pi, p1, pm, plain, cap
                )
                driver.add_consumer(group.low_tracker, p1 + 1, pm)
                high_targets = [n - p for p in plain]
                group.high_tracker = BlockTracker(
                    driver, family, pi, n - pm, n - p1, high_targets, cap
                )
                driver.add_consumer(group.high_tracker, n - pm + 1, n - p1)
            else:
                if verify_mode == "per_candidate" and len(plain) > per_candidate_cap:
                    raise StreamPeriodError(
                        f"per-candidate mode capped at {per_candidate_cap} candidates per bucket"
                    )
                for p in plain:
                    driver.request_snapshot(p)
                    driver.request_snapshot(n - p)
            groups.append(group)

    digest = 0
    fed = 0
    for piece in iter_chunks(source):
        take = piece[: n - fed]
        digest = zlib.crc32(take, digest)
        driver.feed(take)
        fed += len(take)
        if stats is not None:
            stats.observe("pass2", _pass2_state(driver, groups))
        if fed >= n:
            break
    if fed != n:
        raise LengthMismatchError(f"declared {n} bytes, second pass held {fed}")
    if digest != state.digest:
        raise StreamMutationError("stream content changed between passes")

    report = PeriodReport(n=n, k=k, passes=2, backend=state.backend, seed=state.seed)
    full = driver.prefix.snapshot()
    checked = 0

    def accept(p, count, positions):
        report.periods.append(p)
        report.mismatch_counts[p] = count
        report.mismatch_positions[p] = tuple(positions)

    head = bytes(driver.head)
    for p in sorted(set(tail_candidates)):
        length = n - p
        tail = driver.bytes_range(p + 1, n)
        positions = [i + 1 for i in range(length) if head[i] != tail[i]]
        checked += 1
        accept(p, len(positions), positions)  # length <= k, vacuously a period

    overflows = 0
    records = 0
    for group in groups:
        for tracker in (group.low_tracker, group.high_tracker):
            if tracker is not None:
                overflows += int(tracker.overflowed)
                records += len(tracker.records)
        for p in group.candidates:
            checked += 1
            if group.mode == "compressed":
                left = group.high_tracker.synthesize(n - p)
                at_p = group.low_tracker.synthesize(p)
            else:
                left = driver.snapshots[n - p]
                at_p = driver.snapshots[p]
            suffix = full.minus_prefix(at_p)
            outcome = left.distance(suffix)
            if isinstance(outcome, AtMost):
                accept(p, outcome.count, outcome.positions)

    report.periods = sorted(report.periods)
    report.diagnostics = {
        "candidates_checked": checked,
        "groups": {
            "direct": sum(g.mode == "direct" for g in groups),
            "compressed": sum(g.mode == "compressed" for g in groups),
            "tail": len(set(tail_candidates)),
        },
        "tracker_records": records,
        "tracker_record_cap": cap,
        "tracker_overflows": overflows,
        "digest": digest,
    }
    return report


def _pass2_state(driver, groups):
    modules = driver.state_bytes()
    modules["trackers"] = sum(
        t.state_bytes()
        for g in groups
        for t in (g.low_tracker, g.high_tracker)
        if t is not None
    )
    return modules


def find_k_periods_two_pass(
    source,
    k: int,
    n: int | None = None,
    backend: str = "sketch",
    seed: int = 0,
    verify_mode: str = "auto",
    stats: SpaceStats | None = None,
) -> PeriodReport:
    """Run both passes over a replayable source (bytes, path, or reader factory)."""
    if n is None:
        n = source_length(source)
        if n is None:
            raise LengthMismatchError("stream length must be declared for this source")
    if n <= 1:
        return PeriodReport(n=n, k=k, passes=2, backend=backend, seed=seed)
    t0 = time.perf_counter()
    state = collect_candidates(source, n, k, backend, seed, stats=stats)
    report = verify_candidates(source, state, verify_mode=verify_mode, stats=stats)
    if stats is not None:
        stats.wall_time = time.perf_counter() - t0
    report.diagnostics["pass1_candidates"] = state.small.candidate_count() + sum(
        t.candidate_count() for t in state.large.values()
    )
    return report
