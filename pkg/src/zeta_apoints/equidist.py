"""Weyl sums and star discrepancy for finite sequences taken mod 1."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyPrefix, InvalidInput


@dataclass(frozen=True)
class ModOneSequence:
    values: np.ndarray
    source_label: str = ""

    def __post_init__(self):
        x = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(x)):
            raise InvalidInput("sequence values must be finite")
        x = x - np.floor(x)
        # x - floor(x) can round up to exactly 1.0 for tiny negative inputs
        x[x >= 1.0] = 0.0
        x.setflags(write=False)
        object.__setattr__(self, "values", x)

    def __len__(self):
        return self.values.size

    def _prefix(self, N: int) -> np.ndarray:
        if int(N) != N or not 1 <= N <= len(self):
            raise EmptyPrefix(f"prefix size must be in [1, {len(self)}], got {N}")
        return self.values[: int(N)]


def weyl_sum(seq: ModOneSequence, h: int, N: int) -> complex:
    """(1/N) sum_{j<=N} e^{2 pi i h x_j}, with compensated summation."""
    if int(h) != h or h == 0:
        raise InvalidInput("frequency h must be a non-zero integer")
    x = seq._prefix(N)
    # reduce h x mod 1 before the trig call so large h loses no phase accuracy
    phase = 2 * math.pi * np.mod(int(h) * x, 1.0)
    re = math.fsum(np.cos(phase)) / len(x)
    im = math.fsum(np.sin(phase)) / len(x)
    return complex(re, im)


def star_discrepancy(seq: ModOneSequence, N: int) -> float:
    """Exact D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N)."""
    x = np.sort(seq._prefix(N))
    n = len(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def erdos_turan_bound(seq: ModOneSequence, N: int, H: int) -> float:
    """6/(H+1) + (4/pi) sum_{h<=H} |S_h(N)|/h, an upper bound for D*_N."""
    tot = math.fsum(abs(weyl_sum(seq, h, N)) / h for h in range(1, H + 1))
    return 6.0 / (H + 1) + 4.0 / math.pi * tot


def geometric_prefixes(length: int, start: int = 100) -> list[int]:
    """100, 200, 400, ... up to ``length``, always ending at ``length``."""
    if length < 1:
        raise EmptyPrefix("sequence is empty")
    out, n = [], start
    while n < length:
        out.append(n)
        n *= 2
    out.append(length)
    return out


@dataclass
class WeylReport:
    frequencies: list
    prefix_sizes: list
    magnitudes: list  # magnitudes[i][j] = |S_{h_i}(N_j)|
    discrepancies: list
    source_label: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for row in self.magnitudes:
            if any(not 0 <= m <= 1 + 1e-12 for m in row):
                raise InvalidInput("Weyl magnitudes must lie in [0, 1]")

    def magnitude(self, h: int, N: int) -> float:
        return self.magnitudes[self.frequencies.index(h)][self.prefix_sizes.index(N)]

    def to_json(self) -> dict:
        return {
            "source": self.source_label,
            "frequencies": list(self.frequencies),
            "prefixes": list(self.prefix_sizes),
            "magnitudes": [list(r) for r in self.magnitudes],
            "discrepancies": list(self.discrepancies),
            **self.extra,
        }

    def to_csv(self) -> str:
        lines = ["h,N,magnitude,star_discrepancy"]
        for i, h in enumerate(self.frequencies):
            for j, n in enumerate(self.prefix_sizes):
                lines.append(f"{h},{n},{self.magnitudes[i][j]!r},{self.discrepancies[j]!r}")
        return "\n".join(lines) + "\n"


def trend_report(seq: ModOneSequence, hs, prefixes) -> WeylReport:
    hs = [int(h) for h in hs]
    prefixes = [int(n) for n in prefixes]
    if not hs:
        raise InvalidInput("at least one frequency is needed")
    if not prefixes:
        raise EmptyPrefix("at least one prefix is needed")
    if any(b <= a for a, b in zip(prefixes, prefixes[1:])):
        raise InvalidInput("prefixes must be strictly ascending")
    mags = [[abs(weyl_sum(seq, h, n)) for n in prefixes] for h in hs]
    disc = [star_discrepancy(seq, n) for n in prefixes]
    return WeylReport(hs, prefixes, mags, disc, seq.source_label)
