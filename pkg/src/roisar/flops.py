"""Deterministic floating-point operation accounting.

Cost model, applied uniformly to every method so complexity comparisons are
reproducible: complex multiply 6, complex add 2, real add or multiply 1,
complex FFT of M points 5*M*log2(M).  Magnitude extraction, comparisons and
index arithmetic are not counted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

COMPLEX_MUL = 6
COMPLEX_ADD = 2
REAL_OP = 1


def fft_flops(points: int) -> float:
    if points < 2:
        return 0.0
    return 5.0 * points * math.log2(points)


@dataclass
class FlopTally:
    """Additive per-stage flop counters."""

    counts: dict = field(default_factory=dict)

    def add(self, stage: str, flops: float) -> None:
        self.counts[stage] = self.counts.get(stage, 0.0) + float(flops)

    def add_fft(self, stage: str, points: int, count: int = 1) -> None:
        self.add(stage, fft_flops(points) * count)

    def add_cmul(self, stage: str, count: int) -> None:
        self.add(stage, COMPLEX_MUL * count)

    def add_cadd(self, stage: str, count: int) -> None:
        self.add(stage, COMPLEX_ADD * count)

    def add_radd(self, stage: str, count: int) -> None:
        self.add(stage, REAL_OP * count)

    @property
    def total(self) -> float:
        return float(sum(self.counts.values()))

    def merge(self, other: "FlopTally") -> None:
        for stage, flops in other.counts.items():
            self.add(stage, flops)

    def as_dict(self) -> dict:
        return dict(sorted(self.counts.items()))
