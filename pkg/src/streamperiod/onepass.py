"""One-pass period finder for periods up to n/2.

Verifying period p needs the sketches of S[1, n-p] and S[p+1, n], and both
must exist by the time the stream ends, so a candidate must be *detected*
no later than position n - p.  Two processes split the work:

* small process, p <= n/4: the window x = floor(n/2) detects p at p + x,
  which is always <= n - p.  The matcher hands over the prefix sketch at p
  (its filter ring makes that materializable online); the sketch at n - p
  is snapshotted when the stream gets there.
* large process, n/4 < p < floor(n/2): window 2^m where
  2^m <= n - 2p < 2^(m+1), one matcher per m over the matching index range
  I_m; the same detection-in-time arithmetic holds with equality allowed.
  p = floor(n/2) itself rides on the small matcher's final emission (for
  even n that emission already *is* the verification).

Each large instance also maintains the diagnostic machinery the candidate
filter of the underlying algorithm is built from: a nested probe finds the
smallest verified k-period pi_m of the prefix S[1, 2^m] (resolving right
after the prefix ends, always before pi_m + 2^m); block chains of length
pi_m then track how far the prefix extends with d mismatches (the x_d
table, seeded by a speculatively collected final prefix block), how far a
3k-budget run survives past the last candidate (y), and where shift-pi_m
mismatches fall between candidates (the Delta counts, at block
granularity).  The rank consistency test y + (r - j) = x_{3k - Delta}
is recorded per candidate and cross-checked against the authoritative
sketch verification; disagreements are counted, never acted on, because
the test's index arithmetic presumes pi-spaced candidates.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .errors import DegenerateInputError, LengthMismatchError, StreamOrderError
from .fingerprint import context_for
from .matcher import PrefixMatcher, StreamDriver
from .report import PeriodReport, SpaceStats
from .sketch import AtMost, SegmentBuilder, SketchFamily
from .twopass import iter_chunks, source_length

SEED_COLLECTOR_CAP = 8


@dataclass(frozen=True, slots=True)
class LargeBand:
    m: int
    x: int
    lo: int
    hi: int


def large_bands(n: int) -> list[LargeBand]:
    """Per-m candidate ranges covering (floor(n/4), floor(n/2) - 1]."""
    n4, half = n // 4, n // 2
    out = []
    m = 1
    while (1 << m) <= n:
        x = 1 << m
        lo = max(n4 + 1, (n - 2 * x + 1 + 1) // 2)  # smallest p with n-2p < 2x
        hi = min(half - 1, (n - x) // 2)  # largest p with n-2p >= x
        if lo <= hi:
            out.append(LargeBand(m, x, lo, hi))
        m += 1
    return out


class BlockChain:
    """Consecutive block comparison along a fixed phase.

    Splits [start+1, hi] into length-`pi` blocks, sketches each, and counts
    the mismatches between consecutive blocks (equivalently: positions z in
    the earlier block with S[z] != S[z+pi]).  `baseline` supplies the block
    ending at `start` when the caller has one; otherwise the first block
    only opens the chain.  Pair counts saturate at `budget`.
    """

    def __init__(self, family, pi, start, hi, budget, keep_positions=False, baseline=None):
        self.family = family
        self.pi = pi
        self.start = start
        self.hi = hi
        self.budget = budget
        self.keep_positions = keep_positions
        self.prev = baseline
        self.counts: list[int] = []
        self.positions: list[int] = []
        self.saturated = False
        self.retired = False
        self._builder = SegmentBuilder(family, start + 1)

    def add(self, pos, byte, terms):
        if self.retired:
            return
        self._builder.add(pos, byte, terms)
        if (pos - self.start) % self.pi:
            return
        block = self._builder.finish()
        self._builder = SegmentBuilder(self.family, pos + 1)
        if self.prev is not None:
            outcome = self.prev.distance(block, budget=self.budget)
            if isinstance(outcome, AtMost):
                self.counts.append(outcome.count)
                if self.keep_positions:
                    self.positions.extend(outcome.positions)
            else:
                self.counts.append(self.budget + 1)
                self.saturated = True
        self.prev = block

    def cumulative(self) -> list[int]:
        out = []
        total = 0
        for c in self.counts:
            total += c
            out.append(total)
        return out

    def state_bytes(self) -> int:
        per = self.family.sketch_state_bytes()
        return 2 * per + 8 * (len(self.counts) + len(self.positions))


@dataclass
class _Candidate:
    index: int
    at_index: object  # sketch of S[1, index]
    window_count: int


@dataclass
class _LargeInstance:
    band: LargeBand
    matcher: object
    probe_matcher: object | None = None
    probe_candidates: list = field(default_factory=list)
    seed_builders: dict[int, SegmentBuilder] = field(default_factory=dict)
    pi: int | None = None
    pi_count: int | None = None
    pi_seeded: bool = False
    xd_chain: BlockChain | None = None
    y_chain: BlockChain | None = None
    delta_chain: BlockChain | None = None
    candidates: list[_Candidate] = field(default_factory=list)


class OnePassScanner:
    """Single left-to-right scan; finalize() returns periods <= floor(n/2)."""

    def __init__(self, n: int, k: int, backend: str = "sketch", seed: int = 0):
        if n < 0:
            raise DegenerateInputError("negative length")
        self.n = n
        self.k = k
        self.backend = backend
        self.seed = seed
        self.family = SketchFamily(backend, context_for(seed), k, max(2, n))
        self.driver = StreamDriver(self.family, max(n, 1))
        self.small: list[_Candidate] = []
        self.half_emission = None
        self.large: dict[int, _LargeInstance] = {}
        self._route = {}
        self.stats: SpaceStats | None = None
        self._finalized = None
        if n < 2:
            return
        half = n // 2
        n4 = n // 4
        driver = self.driver
        fam = self.family
        small_x = half
        lead = PrefixMatcher(
            fam, x=small_x, k=k, n=n, emit_lo=1, emit_hi=n - small_x,
            tag="small", carry_snapshots=True,
        )
        driver.add_matcher(lead)
        self._route[id(lead)] = self._on_small
        if n % 2:
            # Odd n: the matcher's comparison at i = half stops one byte
            # short of the true overlap; verify from pre-scheduled snapshots.
            driver.request_snapshot(half)
            driver.request_snapshot(half + 1)
        for band in large_bands(n):
            inst = _LargeInstance(band=band, matcher=None)
            m = PrefixMatcher(
                fam, x=band.x, k=k, n=n, emit_lo=band.lo, emit_hi=band.hi,
                tag=f"I{band.m}", carry_snapshots=True,
            )
            inst.matcher = m
            driver.add_matcher(m)
            self._route[id(m)] = lambda e, inst=inst: self._on_band(inst, e)
            self.large[band.m] = inst
            L = band.x
            if L >= 4:
                probe = PrefixMatcher(
                    fam, x=L // 2, k=k, n=n, emit_lo=1, emit_hi=L // 4,
                    tag=f"probe{band.m}", carry_snapshots=True,
                )
                inst.probe_matcher = probe
                driver.add_matcher(probe)
                self._route[id(probe)] = lambda e, inst=inst: self._on_probe(inst, e)
                driver.request_snapshot(L)
                driver.call_at(L + 1, lambda pos, inst=inst: self._resolve_probe(inst))
        driver.on_emit = lambda e: self._route[id(e.matcher)](e)

    # -- emission handlers -------------------------------------------------

    def _register(self, store, emission):
        snap = emission.prefix_snapshot
        store.append(_Candidate(emission.index, snap, emission.count))
        target = self.n - emission.index
        self.driver.request_snapshot(target)

    def _on_small(self, emission):
        n4, half = self.n // 4, self.n // 2
        if emission.index <= n4:
            self._register(self.small, emission)
        elif emission.index == half:
            self.half_emission = emission

    def _on_band(self, inst, emission):
        self._register(inst.candidates, emission)
        if inst.pi is not None and inst.pi < inst.band.x // 4:
            self._restart_y_chain(inst, emission.index)

    def _on_probe(self, inst, emission):
        inst.probe_candidates.append(
            _Candidate(emission.index, emission.prefix_snapshot, emission.count)
        )
        L = inst.band.x
        self.driver.request_snapshot(L - emission.index)
        if len(inst.seed_builders) < SEED_COLLECTOR_CAP:
            builder = SegmentBuilder(self.family, L - emission.index + 1)
            inst.seed_builders[emission.index] = builder
            self.driver.add_consumer(builder, L - emission.index + 1, L)

    # -- probe resolution and chains ----------------------------------------

    def _resolve_probe(self, inst):
        """Runs at stream position 2^m + 1: pick pi_m and arm the chains."""
        L = inst.band.x
        whole = self.driver.snapshots[L]
        for cand in inst.probe_candidates:
            left = self.driver.snapshots[L - cand.index]
            suffix = whole.minus_prefix(cand.at_index)
            outcome = left.distance(suffix)
            if isinstance(outcome, AtMost):
                inst.pi = cand.index
                inst.pi_count = outcome.count
                break
        if inst.pi is None or inst.pi >= max(1, L // 4):
            return
        pi = inst.pi
        builder = inst.seed_builders.get(pi)
        if builder is not None:
            inst.pi_seeded = True
            seed = builder.finish()
            hi = min(2 * L, self.n)
            if hi >= L + pi:
                inst.xd_chain = BlockChain(
                    self.family, pi, L, hi, budget=3 * self.k, baseline=seed
                )
                self.driver.activate_consumer(inst.xd_chain, hi)
        band = inst.band
        anchor = max(band.lo - 1, L)
        hi = min(self.n, band.hi + 2 * pi)
        if anchor + pi <= hi:
            inst.delta_chain = BlockChain(
                self.family, pi, anchor, hi, budget=3 * self.k, keep_positions=True
            )
            if anchor == L:
                self.driver.activate_consumer(inst.delta_chain, hi)
            else:
                self.driver.add_consumer(inst.delta_chain, anchor + 1, hi)

    def _restart_y_chain(self, inst, index):
        if inst.y_chain is not None:
            self.driver.retire_consumer(inst.y_chain)
        det = index + inst.band.x
        hi = min(self.n, self.n // 2 + inst.band.x)
        if det + inst.pi > hi:
            inst.y_chain = None
            return
        inst.y_chain = BlockChain(self.family, inst.pi, det, hi, budget=3 * self.k)
        self.driver.add_consumer(inst.y_chain, det + 1, hi)

    # -- feeding -------------------------------------------------------------

    def feed(self, data: bytes) -> None:
        if self.n < 2:
            if self.driver.pos + len(data) > self.n:
                raise LengthMismatchError(f"declared {self.n} bytes")
            self.driver.pos += len(data)
            return
        self.driver.feed(data)
        if self.stats is not None:
            self.stats.observe("pass1", self.state_report())

    def feed_byte(self, byte: int, position: int | None = None) -> None:
        if position is not None and position != self.driver.pos + 1:
            raise StreamOrderError(
                f"expected position {self.driver.pos + 1}, got {position}"
            )
        self.feed(bytes([byte]))

    # -- finalize --------------------------------------------------------------

    def finalize(self) -> PeriodReport:
        if self._finalized is not None:
            return self._finalized
        n, k = self.n, self.k
        if self.driver.pos != n:
            raise LengthMismatchError(f"fed {self.driver.pos} of {n} declared bytes")
        report = PeriodReport(n=n, k=k, passes=1, backend=self.backend, seed=self.seed)
        if n < 2:
            self._finalized = report
            return report
        driver = self.driver
        full = driver.prefix.snapshot()
        half = n // 2

        def verify(index, at_index):
            left = driver.snapshots[n - index]
            suffix = full.minus_prefix(at_index)
            return left.distance(suffix)

        def accept(p, count, positions):
            report.periods.append(p)
            report.mismatch_counts[p] = count
            report.mismatch_positions[p] = tuple(positions)

        for cand in self.small:
            outcome = verify(cand.index, cand.at_index)
            if isinstance(outcome, AtMost):
                accept(cand.index, outcome.count, outcome.positions)

        if self.half_emission is not None:
            e = self.half_emission
            if n % 2 == 0:
                accept(half, e.count, e.offsets)
            else:
                left = driver.snapshots[half + 1]
                suffix = full.minus_prefix(driver.snapshots[half])
                outcome = left.distance(suffix)
                if isinstance(outcome, AtMost):
                    accept(half, outcome.count, outcome.positions)

        consistency_disagreements = 0
        large_diag = {}
        for m, inst in sorted(self.large.items()):
            verified_here = {}
            for cand in inst.candidates:
                outcome = verify(cand.index, cand.at_index)
                ok = isinstance(outcome, AtMost)
                verified_here[cand.index] = ok
                if ok:
                    accept(cand.index, outcome.count, outcome.positions)
            diag = {
                "window": inst.band.x,
                "range": (inst.band.lo, inst.band.hi),
                "t_count": len(inst.candidates),
                "pi": inst.pi,
                "pi_count": inst.pi_count,
                "pi_seeded": inst.pi_seeded,
            }
            small_pi = inst.pi is not None and inst.pi < inst.band.x // 4
            if not small_pi:
                # Half-budget matches are pairwise >= (smallest prefix
                # k-period) apart, so with that period >= x/4 at most 4 fit
                # in the band.  Full-budget matches obey no such cap: a
                # single defect in the prefix leaves clean windows only one
                # mismatch away.
                half_budget = sum(
                    1 for c in inst.candidates if c.window_count <= k // 2
                )
                diag["half_budget_count"] = half_budget
                diag["separation_cap_ok"] = half_budget <= 4
            xd = None
            if inst.xd_chain is not None and not inst.xd_chain.saturated:
                xd = self._xd_table(inst)
                diag["xd"] = xd
                diag["xd_blocks"] = len(inst.xd_chain.counts)
            y = None
            if inst.y_chain is not None and not inst.y_chain.saturated:
                cum = inst.y_chain.cumulative()
                y = 1 + sum(1 for c in cum if c <= 3 * k) if inst.y_chain.counts or inst.y_chain.prev is not None else 0
                diag["y"] = y
            if (
                xd is not None
                and y is not None
                and inst.delta_chain is not None
                and not inst.delta_chain.saturated
                and inst.candidates
            ):
                deltas = {}
                consistency = {}
                last = inst.candidates[-1].index
                r = len(inst.candidates)
                zs = sorted(inst.delta_chain.positions)
                for rank, cand in enumerate(inst.candidates, start=1):
                    delta = sum(1 for z in zs if cand.index <= z <= last)
                    deltas[cand.index] = delta
                    if delta <= 3 * k:
                        passes = (y + (r - rank)) == xd[3 * k - delta]
                        consistency[cand.index] = passes
                        if not passes and verified_here.get(cand.index):
                            consistency_disagreements += 1
                diag["delta"] = deltas
                diag["consistency"] = consistency
            large_diag[m] = diag

        report.periods = sorted(set(report.periods))
        report.diagnostics = {
            "small_candidates": len(self.small),
            "half_emitted": self.half_emission is not None,
            "large": large_diag,
            "consistency_disagreements": consistency_disagreements,
        }
        self._finalized = report
        return report

    def _xd_table(self, inst) -> list[int]:
        base = inst.pi_count if inst.pi_count is not None else 0
        cum = inst.xd_chain.cumulative()
        table = []
        for d in range(0, 3 * self.k + 1):
            if base > d:
                table.append(-1)
                continue
            best = 0
            total = base
            for x, c in enumerate(cum, start=1):
                if c + base <= d:
                    best = x
                else:
                    break
            table.append(best)
        return table

    # -- accounting --------------------------------------------------------------

    def state_report(self) -> dict[str, int]:
        modules = self.driver.state_bytes()
        per = self.family.sketch_state_bytes()
        modules["verify_entries"] = (len(self.small) + sum(
            len(inst.candidates) for inst in self.large.values()
        )) * (per + 24)
        modules["chains"] = sum(
            chain.state_bytes()
            for inst in self.large.values()
            for chain in (inst.xd_chain, inst.y_chain, inst.delta_chain)
            if chain is not None
        )
        return modules


def find_k_periods_one_pass(
    source,
    k: int,
    n: int | None = None,
    backend: str = "sketch",
    seed: int = 0,
    stats: SpaceStats | None = None,
) -> PeriodReport:
    """Scan a source once; reports every k-period p <= floor(n/2)."""
    if n is None:
        n = source_length(source)
        if n is None:
            raise LengthMismatchError("stream length must be declared for this source")
    t0 = time.perf_counter()
    scanner = OnePassScanner(n, k, backend=backend, seed=seed)
    scanner.stats = stats
    fed = 0
    for piece in iter_chunks(source):
        take = piece[: n - fed]
        scanner.feed(take)
        fed += len(take)
        if fed >= n:
            break
    report = scanner.finalize()
    if stats is not None:
        stats.wall_time = time.perf_counter() - t0
    return report
