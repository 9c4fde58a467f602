"""Enumeration of a-points of zeta^(k) by argument-principle counting.

The search region is a rectangle ``[sigma_min, sigma_max] x [t_low, t_high]``.
Its two vertical edges are sampled once; windows between horizontal cuts
then cost one extra horizontal segment each, so recursive bisection in t is
cheap. A window holding exactly one a-point is handed to Newton, seeded from
the smallest |g| found on a coarse grid across the window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContourTooClose,
    CountMismatch,
    DerivativeVanishes,
    EvalFailure,
    InvalidInput,
    NoConvergence,
    ZetaApointsError,
)
from .zeta_kernel import TargetSpec, zeta_jet

DEFAULT_STRIP = (-2.0, 6.0)
DEFAULT_T_LOW = 1.0 + 1e-6
RESIDUAL_MAX = 1e-9
CLEARANCE = 1e-6  # a-points closer than this to a contour edge force a perturbation

_MAX_LOG_STEP = 0.4  # |Log(g(z_{j+1}) / g(z_j))| allowed between neighbouring samples
_MIN_SPACING = 1e-9
_H0 = 0.25
_PERTURB_TRIES = 5
_NEWTON_ITERS = 30


@dataclass(frozen=True)
class StripWindow:
    sigma_min: float
    sigma_max: float
    t_low: float
    t_high: float

    def __post_init__(self):
        vals = (self.sigma_min, self.sigma_max, self.t_low, self.t_high)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInput("window bounds must be finite")
        if not self.sigma_min < self.sigma_max:
            raise InvalidInput("sigma_min must be below sigma_max")

    @classmethod
    def for_heights(cls, t_low, t_high, strip=DEFAULT_STRIP):
        return cls(float(strip[0]), float(strip[1]), float(t_low), float(t_high))


@dataclass(frozen=True)
class APoint:
    beta: float
    gamma: float
    target: TargetSpec
    residual: float
    multiplicity: int = 1

    def __post_init__(self):
        if not self.gamma > 1:
            raise InvalidInput(f"a-points are kept only for gamma > 1, got {self.gamma}")
        if not 0 <= self.residual <= RESIDUAL_MAX:
            raise InvalidInput(f"residual {self.residual:.3g} exceeds {RESIDUAL_MAX}")
        if self.multiplicity < 1:
            raise InvalidInput("multiplicity must be >= 1")

    @property
    def rho(self) -> complex:
        return complex(self.beta, self.gamma)


class _TooClose(Exception):
    """An a-point sits within CLEARANCE of a contour edge, near ``where`` if known."""

    def __init__(self, where: complex | None = None):
        super().__init__(where)
        self.where = where


def _g_values(points, target: TargetSpec, with_derivative=False):
    kmax = target.k + 1 if with_derivative else target.k
    try:
        vals, _, _ = zeta_jet(points, kmax, rel_tol=1e-13)
    except ZetaApointsError as exc:
        raise EvalFailure(str(exc)) from exc
    g = vals[target.k] - target.a
    if with_derivative:
        return g, vals[target.k + 1]
    return g


def _track(target: TargetSpec, z0: complex, z1: complex, h0: float = _H0):
    """Sample the segment z0 -> z1 densely enough to follow the phase of g.

    Returns (params in [0,1], g values). Raises _TooClose when an a-point is
    within CLEARANCE of the segment.
    """
    length = abs(z1 - z0)
    n = max(2, int(math.ceil(length / h0)) + 1)
    u = np.linspace(0.0, 1.0, n)
    g, dg = _g_values(z0 + u * (z1 - z0), target, True)
    while True:
        if np.any(g == 0):
            raise _TooClose(complex(z0 + u[np.argmin(np.abs(g))] * (z1 - z0)))
        step = np.abs(np.log(g[1:] / g[:-1]))
        bad = np.flatnonzero(step > _MAX_LOG_STEP)
        if bad.size == 0:
            break
        if np.any((u[bad + 1] - u[bad]) * length < _MIN_SPACING):
            raise _TooClose(complex(z0 + u[bad[0]] * (z1 - z0)))
        mids = 0.5 * (u[bad] + u[bad + 1])
        mg, mdg = _g_values(z0 + mids * (z1 - z0), target, True)
        u = np.concatenate([u, mids])
        g = np.concatenate([g, mg])
        dg = np.concatenate([dg, mdg])
        order = np.argsort(u, kind="stable")
        u, g, dg = u[order], g[order], dg[order]
    with np.errstate(divide="ignore"):
        newton_dist = np.abs(g) / np.abs(dg)
    if np.min(newton_dist) < CLEARANCE:
        raise _TooClose(complex(z0 + u[np.argmin(newton_dist)] * (z1 - z0)))
    return u, g


def _phase_sum(g: np.ndarray) -> float:
    return float(np.sum(np.angle(g[1:] / g[:-1])))


class _StripScan:
    """Phase bookkeeping for one strip; windows are [t1, t2] sub-ranges."""

    def __init__(self, target: TargetSpec, sigma_min: float, sigma_max: float,
                 t_low: float, t_high: float):
        self.target = target
        self.sigma_min, self.sigma_max = sigma_min, sigma_max
        self.t_low, self.t_high = t_low, t_high
        self._lines = {}
        for side, sig in (("L", sigma_min), ("R", sigma_max)):
            u, g = _track(target, complex(sig, t_low), complex(sig, t_high))
            t = t_low + u * (t_high - t_low)
            t[-1] = t_high
            phi = np.concatenate([[0.0], np.cumsum(np.angle(g[1:] / g[:-1]))])
            self._lines[side] = (t, g, phi)
        self._cuts = {}

    def _line_phase(self, side: str, t: float, g_at_t: complex) -> float:
        ts, gs, phi = self._lines[side]
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 1)
        if ts[i] == t:
            return float(phi[i])
        hop = abs(np.log(g_at_t / gs[i]))
        hop2 = abs(np.log(gs[i + 1] / g_at_t)) if i + 1 < len(ts) else 0.0
        if hop > 2 * _MAX_LOG_STEP or hop2 > 2 * _MAX_LOG_STEP:
            raise _TooClose
        return float(phi[i] + np.angle(g_at_t / gs[i]))

    def cut(self, t: float):
        """(phase along the horizontal at t, left line phase, right line phase)."""
        if t not in self._cuts:
            u, g = _track(self.target, complex(self.sigma_min, t), complex(self.sigma_max, t))
            h = _phase_sum(g)
            self._cuts[t] = (h, self._line_phase("L", t, g[0]), self._line_phase("R", t, g[-1]))
        return self._cuts[t]

    def count(self, t1: float, t2: float) -> int:
        h1, l1, r1 = self.cut(t1)
        h2, l2, r2 = self.cut(t2)
        total = (r2 - r1) - (l2 - l1) + h1 - h2
        turns = total / (2 * math.pi)
        n = round(turns)
        if abs(turns - n) > 0.01:
            raise _TooClose
        if n < 0:
            raise _TooClose
        return int(n)


def _open_scan(target, window: StripWindow):
    """Build a _StripScan and its total count, nudging edges that pass too close to an a-point."""
    sig0, sig1, t0, t1 = window.sigma_min, window.sigma_max, window.t_low, window.t_high
    for attempt in range(_PERTURB_TRIES):
        try:
            scan = _StripScan(target, sig0, sig1, t0, t1)
            return scan, scan.count(t0, t1)
        except _TooClose:
            shift = 1e-4 * (attempt + 1)
            t0 = max(t0 - shift, 1.0 + 0.5 * (t0 - 1.0))
            t1 = t1 + shift
            sig0 -= 0.01 * (attempt + 1)
            sig1 += 0.01 * (attempt + 1)
    raise ContourTooClose(f"could not find a clean contour for {window} ({target.label()})")


def _clamp(window: StripWindow):
    return max(window.t_low, 1.0), window.t_high


def count_in_window(target: TargetSpec, window: StripWindow) -> int:
    """Number of a-points (with multiplicity) inside the window, by winding number."""
    t_low, t_high = _clamp(window)
    if not t_high > t_low:
        return 0
    clamped = StripWindow(window.sigma_min, window.sigma_max, t_low, t_high)
    return _open_scan(target, clamped)[1]


def _box_count(target: TargetSpec, box) -> int:
    s0, s1, t0, t1 = box
    corners = [complex(s0, t0), complex(s1, t0), complex(s1, t1), complex(s0, t1)]
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        _, g = _track(target, a, b, h0=min(_H0, 0.25 * abs(b - a) + 1e-3))
        total += _phase_sum(g)
    return int(round(total / (2 * math.pi)))


def _local_multiplicity(s: complex, target: TargetSpec, radius: float = 1e-3) -> int:
    theta = np.linspace(0.0, 2 * math.pi, 257)
    pts = s + radius * np.exp(1j * theta)
    g = _g_values(pts, target)
    return int(round(_phase_sum(g) / (2 * math.pi)))


def _newton(seed: complex, target: TargetSpec, multiplicity: int = 1,
            escape: float = 3.0):
    s = complex(seed)
    m = multiplicity
    prev = math.inf
    for _ in range(_NEWTON_ITERS):
        g, dg = _g_values(np.array([s]), target, True)
        g, dg = complex(g[0]), complex(dg[0])
        if g == 0:
            return s, m
        if abs(dg) < 1e-12:
            m = _local_multiplicity(s, target)
            if m < 2:
                raise DerivativeVanishes(f"|g'| = {abs(dg):.3g} at {s} with no multiple root")
            continue
        step = m * g / dg
        s = s - step
        if abs(s - seed) > escape:
            raise NoConvergence(f"Newton escaped from seed {seed}")
        size = abs(step)
        # below 1e-10 a step that fails to halve means evaluation noise dominates
        if size <= 4e-16 * max(1.0, abs(s)) or (size >= 0.5 * prev and size < 1e-10):
            return s, m
        prev = size
    raise NoConvergence(f"no convergence from seed {seed} in {_NEWTON_ITERS} iterations")


def _finish(s: complex, target: TargetSpec, m: int) -> APoint:
    g = _g_values(np.array([s]), target)
    residual = float(abs(g[0]))
    if residual > RESIDUAL_MAX:
        raise NoConvergence(f"residual {residual:.3g} at {s} exceeds {RESIDUAL_MAX}")
    return APoint(beta=float(s.real), gamma=float(s.imag), target=target,
                  residual=residual, multiplicity=int(m))


def refine(seed, target: TargetSpec) -> APoint:
    """Newton polish of ``zeta^(k)(s) = a`` from ``seed``.

    At a stalled derivative the winding number on a small circle is taken as
    the multiplicity and the iteration continues as modified Newton.
    """
    s, m = _newton(complex(seed), target)
    return _finish(s, target, m)


def _inside(s: complex, box, tol=1e-9) -> bool:
    s0, s1, t0, t1 = box
    return s0 - tol <= s.real <= s1 + tol and t0 - tol <= s.imag <= t1 + tol


def _isolate_one(target: TargetSpec, box) -> APoint:
    """The single a-point known to lie in ``box``; box bisection if Newton misses."""
    s0, s1, t0, t1 = box
    sig = np.arange(s0 + 0.125, s1, 0.25)
    rows = [t0 + f * (t1 - t0) for f in (0.25, 0.5, 0.75)]
    seeds = np.concatenate([sig + 1j * r for r in rows])
    g, dg = _g_values(seeds, target, True)
    # rank by Newton step length: |g| alone also shrinks as sigma grows when a = 1 or k >= 1
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = np.where(dg != 0, np.abs(g) / np.abs(dg), np.inf)
    for i in np.argsort(dist, kind="stable")[:6]:
        try:
            s, m = _newton(complex(seeds[i]), target)
        except (NoConvergence, DerivativeVanishes):
            continue
        if _inside(s, box):
            return _finish(s, target, m)
    return _bisect_box(target, box, 1)


def _bisect_box(target: TargetSpec, box, count: int) -> APoint:
    s0, s1, t0, t1 = box
    seed = None
    while max(s1 - s0, t1 - t0) > 0.05:
        if s1 - s0 >= t1 - t0:
            mid = 0.5 * (s0 + s1)
            lower = (s0, mid, t0, t1)
            upper = (mid, s1, t0, t1)
        else:
            mid = 0.5 * (t0 + t1)
            lower = (s0, s1, t0, mid)
            upper = (s0, s1, mid, t1)
        try:
            n_lower = _box_count(target, lower)
        except _TooClose as exc:
            # the a-point sits on an edge of the lower half; start Newton there
            seed = exc.where
            break
        s0, s1, t0, t1 = lower if n_lower == count else upper
    if seed is None:
        seed = complex(0.5 * (s0 + s1), 0.5 * (t0 + t1))
    s, m = _newton(seed, target, multiplicity=count)
    if not _inside(s, box):
        raise CountMismatch(f"Newton left the certified box {box} ({target.label()})")
    return _finish(s, target, max(m, count))


def _split_point(scan: _StripScan, t1: float, t2: float):
    """A cut strictly inside (t1, t2) with a clean count below it."""
    for attempt in range(_PERTURB_TRIES):
        frac = 0.5 + (0.1 * ((attempt + 1) // 2) * (-1) ** attempt if attempt else 0.0)
        tm = t1 + frac * (t2 - t1)
        try:
            return tm, scan.count(t1, tm)
        except _TooClose:
            continue
    raise ContourTooClose(f"no clean cut in [{t1}, {t2}]")


@dataclass
class EngineStats:
    windows: int = 0
    cuts: int = 0
    total_count: int = 0
    window: StripWindow | None = None
    extra: dict = field(default_factory=dict)


def locate_apoints(target: TargetSpec, t_low: float = DEFAULT_T_LOW, t_high: float = 100.0,
                   strip=DEFAULT_STRIP, stats: EngineStats | None = None) -> list[APoint]:
    """All a-points with ``t_low < gamma <= t_high`` inside the strip, sorted by gamma.

    The returned multiplicities sum to the winding count of the enclosing
    rectangle; anything else raises CountMismatch.
    """
    if not t_low > 1:
        raise InvalidInput(f"t_low must exceed 1, got {t_low}")
    if not t_high > t_low:
        return []
    scan, total = _open_scan(target, StripWindow.for_heights(t_low, t_high, strip))
    found: list[APoint] = []
    stack = [(scan.t_low, scan.t_high, total)]
    n_windows = 0
    while stack:
        t1, t2, n = stack.pop()
        n_windows += 1
        if n == 0:
            continue
        box = (scan.sigma_min, scan.sigma_max, t1, t2)
        if n == 1:
            found.append(_isolate_one(target, box))
            continue
        if t2 - t1 < 1e-7:
            found.append(_bisect_box(target, box, n))
            continue
        tm, n_low = _split_point(scan, t1, t2)
        stack.append((tm, t2, n - n_low))
        stack.append((t1, tm, n_low))
    found.sort(key=lambda p: (p.gamma, p.beta))
    got = sum(p.multiplicity for p in found)
    if got != total:
        raise CountMismatch(f"located {got} a-points but the winding count is {total}")
    for a, b in zip(found, found[1:]):
        if abs(a.rho - b.rho) < 1e-9:
            raise CountMismatch(f"duplicate a-point near {a.rho}")
    if stats is not None:
        stats.windows = n_windows
        stats.cuts = len(scan._cuts)
        stats.total_count = total
        stats.window = StripWindow(scan.sigma_min, scan.sigma_max, scan.t_low, scan.t_high)
    return found
