"""On-disk a-point cache.

The cache is a CSV file with one row per a-point and a JSON sidecar
(``<cache>.coverage.json``) recording which height range and strip were
searched for each target. Coverage is what lets readers tell "no a-points
here" apart from "never searched here".

Floats are written with ``repr`` so a read reproduces every value bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from .apoint_engine import DEFAULT_STRIP, DEFAULT_T_LOW, APoint, locate_apoints
from .errors import CacheIncomplete, InvalidInput
from .zeta_kernel import TargetSpec

HEADER = ["k", "a_re", "a_im", "beta", "gamma", "multiplicity", "residual"]


@dataclass(frozen=True)
class Coverage:
    t_low: float
    t_high: float
    sigma_min: float
    sigma_max: float

    def covers(self, lo: float, hi: float) -> bool:
        # the engine never starts below DEFAULT_T_LOW, so (1, hi] counts as covered from there
        return self.t_low <= max(lo, DEFAULT_T_LOW) and hi <= self.t_high


def _key(target: TargetSpec):
    return (target.k, target.a.real, target.a.imag)


@dataclass
class ApointCache:
    entries: dict = field(default_factory=dict)  # key -> (Coverage, list[APoint])

    def add(self, target: TargetSpec, points: list[APoint], coverage: Coverage):
        for p in points:
            if p.target != target:
                raise InvalidInput("point target does not match cache entry")
        pts = sorted(points, key=lambda p: (p.gamma, p.beta))
        self.entries[_key(target)] = (coverage, pts)

    def targets(self) -> list[TargetSpec]:
        return [TargetSpec(complex(re, im), k) for k, re, im in sorted(self.entries)]

    def coverage(self, target: TargetSpec) -> Coverage | None:
        entry = self.entries.get(_key(target))
        return entry[0] if entry else None

    def points(self, target: TargetSpec, t_low: float = 1.0, t_high: float = math.inf) -> list[APoint]:
        """Cached a-points with ``t_low < gamma <= t_high``; CacheIncomplete if not covered."""
        entry = self.entries.get(_key(target))
        if entry is None:
            raise CacheIncomplete(f"cache holds no a-points for {target.label()}")
        cov, pts = entry
        hi = cov.t_high if math.isinf(t_high) else t_high
        if not cov.covers(t_low, hi):
            raise CacheIncomplete(
                f"cache covers ({cov.t_low}, {cov.t_high}] for {target.label()}, "
                f"requested ({t_low}, {hi}]")
        return [p for p in pts if t_low < p.gamma <= hi]

    def gammas(self, target: TargetSpec, t_low: float = 1.0, t_high: float = math.inf):
        """Ordinates repeated by multiplicity, ascending."""
        out = []
        for p in self.points(target, t_low, t_high):
            out.extend([p.gamma] * p.multiplicity)
        return out


def atomic_write(path: Path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def coverage_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".coverage.json")


def write_cache(cache: ApointCache, path):
    rows = []
    for key in sorted(cache.entries):
        _, pts = cache.entries[key]
        for p in pts:
            rows.append((key, p))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for (k, re, im), p in sorted(rows, key=lambda r: (r[0], r[1].gamma, r[1].beta)):
        w.writerow([k, repr(re), repr(im), repr(p.beta), repr(p.gamma), p.multiplicity, repr(p.residual)])
    cov = []
    for (k, re, im) in sorted(cache.entries):
        c = cache.entries[(k, re, im)][0]
        cov.append({"k": k, "a_re": re, "a_im": im, "t_low": c.t_low, "t_high": c.t_high,
                    "sigma_min": c.sigma_min, "sigma_max": c.sigma_max})
    atomic_write(Path(path), buf.getvalue())
    atomic_write(coverage_path(path), json.dumps({"coverage": cov}, sort_keys=True, indent=2) + "\n")


def read_cache(path) -> ApointCache:
    path = Path(path)
    if not path.exists():
        raise CacheIncomplete(f"cache file {path} does not exist")
    cpath = coverage_path(path)
    if not cpath.exists():
        raise CacheIncomplete(f"coverage sidecar {cpath} is missing")
    cache = ApointCache()
    with open(cpath) as fh:
        for c in json.load(fh)["coverage"]:
            key = (int(c["k"]), float(c["a_re"]), float(c["a_im"]))
            cache.entries[key] = (Coverage(c["t_low"], c["t_high"], c["sigma_min"], c["sigma_max"]), [])
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            raise InvalidInput(f"cache header must be {','.join(HEADER)}")
        for row in reader:
            if not row:
                continue
            try:
                k, re, im = int(row[0]), float(row[1]), float(row[2])
                target = TargetSpec(complex(re, im), k)
                p = APoint(float(row[3]), float(row[4]), target, float(row[6]), int(row[5]))
            except (ValueError, IndexError) as exc:
                raise InvalidInput(f"malformed cache row {row!r}: {exc}") from exc
            key = (k, re, im)
            if key not in cache.entries:
                raise InvalidInput(f"cache row for {target.label()} has no coverage record")
            cache.entries[key][1].append(p)
    for cov, pts in cache.entries.values():
        pts.sort(key=lambda p: (p.gamma, p.beta))
    return cache


def enumerate_into(cache: ApointCache, target: TargetSpec, t_high: float,
                   strip=DEFAULT_STRIP) -> list[APoint]:
    """Run the engine for ``target`` up to ``t_high`` and store the result."""
    pts = locate_apoints(target, DEFAULT_T_LOW, t_high, strip)
    cache.add(target, pts, Coverage(DEFAULT_T_LOW, float(t_high), float(strip[0]), float(strip[1])))
    return pts
