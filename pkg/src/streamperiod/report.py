"""Result and measurement records shared by the engines and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class PeriodReport:
    """Verified periods of one run, with per-period mismatch evidence."""

    n: int
    k: int
    passes: int
    backend: str
    seed: int
    periods: list[int] = field(default_factory=list)
    mismatch_counts: dict[int, int] = field(default_factory=dict)
    mismatch_positions: dict[int, tuple[int, ...]] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def smallest(self) -> int | None:
        return self.periods[0] if self.periods else None

    def largest(self) -> int | None:
        return self.periods[-1] if self.periods else None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "passes": self.passes,
            "backend": self.backend,
            "seed": self.seed,
            "periods": list(self.periods),
            "mismatch_counts": {str(p): c for p, c in sorted(self.mismatch_counts.items())},
        }


@dataclass
class SpaceStats:
    """Peak streaming-state sizes, in canonical encoded bytes.

    Counting rule: 8 bytes per stored modular word / counter / index, one
    byte per buffered stream byte.  The exact backend's full input buffer is
    reported under module key "stream_buffer"; the sketch backend holds no
    input buffer beyond its bounded ring.
    """

    n: int
    k: int
    passes: int
    backend: str
    peak_total: int = 0
    per_pass: dict[str, int] = field(default_factory=dict)
    per_module: dict[str, int] = field(default_factory=dict)
    wall_time: float = 0.0

    def observe(self, pass_name: str, modules: dict[str, int]) -> None:
        total = sum(modules.values())
        if total > self.peak_total:
            self.peak_total = total
        if total > self.per_pass.get(pass_name, 0):
            self.per_pass[pass_name] = total
        for name, size in modules.items():
            if size > self.per_module.get(name, 0):
                self.per_module[name] = size

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "k": self.k,
                "passes": self.passes,
                "backend": self.backend,
                "peakStateBytes": self.peak_total,
                "perPass": self.per_pass,
                "perModule": self.per_module,
                "wallTime": self.wall_time,
            },
            indent=2,
            sort_keys=True,
        )
