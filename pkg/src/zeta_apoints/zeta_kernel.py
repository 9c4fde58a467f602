"""Euler-Maclaurin evaluation of zeta and its first few derivatives.

All derivatives come out of one pass: every term of the Euler-Maclaurin
formula is carried as a truncated Taylor series ("jet") in the shift
``s -> s + eps``, so the k-th derivative is ``k!`` times the coefficient of
``eps**k``. Arithmetic runs in ``np.longdouble`` (80-bit on x86) and results
are rounded to double at the end, together with an error bound made of

* the Edwards remainder bound, pushed to derivatives by a Cauchy estimate
  on a small circle around ``s``;
* a rounding allowance for the extended-precision sums;
* the final rounding to double.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .errors import AccuracyNotReached, InvalidInput, PoleProximity

K_MAX = 4
POLE_GUARD = 1e-3
# left of this the kernel switches to multiprecision evaluation
LEFT_EDGE = -2.5
MIN_TARGET = 1e-14
M_MAX = 80

_LD = np.longdouble
_CLD = np.clongdouble
_EPS_LD = float(np.finfo(np.longdouble).eps)
_CHUNK_ELEMS = 1 << 20
_GROUP = 2048
_CAUCHY_RADII = (0.05, 0.1, 0.25, 0.5, 1.0)
_LOG_BLOCK = 4096


def _split(x, head_bits: int):
    """x = head + rest with head holding ``head_bits`` significant bits (x an mpf)."""
    if x == 0:
        return mpmath.mpf(0), mpmath.mpf(0)
    q = mpmath.ldexp(1, int(mpmath.floor(mpmath.log(abs(x), 2))) - head_bits + 1)
    head = mpmath.nint(x / q) * q
    return head, x - head


with mpmath.workdps(40):
    _TWO_PI_LD = _LD(mpmath.nstr(2 * mpmath.pi, 25))
    # Cody-Waite pieces of 2pi: k * _P1 and k * _P2 are exact for |k| < 2^20
    _P1, _rest = _split(2 * mpmath.pi, 40)
    _P2, _rest = _split(_rest, 40)
    _P1, _P2, _P3 = (_LD(mpmath.nstr(v, 25)) for v in (_P1, _P2, _rest))


@lru_cache(maxsize=None)
def _log_block(b: int):
    """log n for n in block b as (head, tail): head has 10 bits so t*head is exact."""
    heads, tails = [], []
    with mpmath.workdps(40):
        for n in range(b * _LOG_BLOCK + 1, (b + 1) * _LOG_BLOCK + 1):
            h, r = _split(mpmath.log(n), 10)
            heads.append(mpmath.nstr(h, 25))
            tails.append(mpmath.nstr(r, 25))
    return np.array(heads, dtype=_LD), np.array(tails, dtype=_LD)


def _split_logs(n: int):
    """Heads and tails of log 1 .. log(n-1)."""
    blocks = [_log_block(b) for b in range((n - 2) // _LOG_BLOCK + 1)]
    heads = np.concatenate([h for h, _ in blocks])[: n - 1]
    tails = np.concatenate([r for _, r in blocks])[: n - 1]
    return heads, tails


def _reduced_phase(tt: np.ndarray, n: int) -> np.ndarray:
    """(t log m) mod 2pi for m < n, with absolute error about eps_ld * (pi + t log m / 512)."""
    heads, tails = _split_logs(n)
    exact = np.outer(tt, heads)  # 53-bit t times 10-bit head fits the 64-bit significand
    k = np.rint(exact / _TWO_PI_LD)
    return ((exact - k * _P1) - k * _P2) - k * _P3 + np.outer(tt, tails)


@dataclass(frozen=True)
class TargetSpec:
    """The equation ``zeta^(k)(s) = a``."""

    a: complex = 0j
    k: int = 0

    def __post_init__(self):
        a = complex(self.a)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise InvalidInput(f"a must be finite, got {self.a!r}")
        if int(self.k) != self.k or not 0 <= self.k <= K_MAX:
            raise InvalidInput(f"k must be an integer in [0, {K_MAX}], got {self.k!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "k", int(self.k))

    def label(self) -> str:
        return f"k={self.k},a={format_complex(self.a)}"


def format_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


@dataclass(frozen=True)
class EvalResult:
    value: complex
    abs_error_bound: float
    terms_used: int


@lru_cache(maxsize=None)
def _bernoulli_tables():
    """c_j = B_{2j}/(2j)! for j = 1..M_MAX+1, plus log|c_j|."""
    coeff = np.zeros(M_MAX + 2, dtype=_LD)
    logabs = np.zeros(M_MAX + 2)
    with mpmath.workdps(40):
        for j in range(1, M_MAX + 2):
            c = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j)
            coeff[j] = _LD(mpmath.nstr(c, 30))
            logabs[j] = float(mpmath.log(abs(c)))
    return coeff, logabs


@lru_cache(maxsize=None)
def _n_candidates():
    out, x = [], 2.0
    while x < 2e6:
        n = int(math.ceil(x))
        if not out or n > out[-1]:
            out.append(n)
        x *= 1.12
    return tuple(out)


_LOG_FACT = [math.lgamma(j + 1) for j in range(K_MAX + 3)]

# rough cost model in microseconds: per (point x Dirichlet term), per correction
# term per call, per correction term per point
_COST_TERM = 0.1
_COST_CORR_CALL = 12.0
_COST_CORR_POINT = 0.3


def _log_bound_table(sigma: float, t: float, kmax: int) -> np.ndarray:
    """log remainder bound, minimised over Cauchy radii, for every (N, M) candidate."""
    _, logc = _bernoulli_tables()
    ns = np.array(_n_candidates(), dtype=float)
    logn = np.log(ns)[:, None]
    ms = np.arange(1, M_MAX + 1)[None, :]
    shifts = np.abs(complex(sigma, t) + np.arange(2 * M_MAX + 2))
    best = np.full((ns.size, M_MAX), np.inf)
    radii = (0.0,) + _CAUCHY_RADII if kmax == 0 else _CAUCHY_RADII
    for r in radii:
        denom = sigma - r + 2 * ms + 1
        ok = denom > 0
        with np.errstate(divide="ignore"):
            lp = np.cumsum(np.log(shifts + r))  # lp[i] = sum over 0..i
        lb = lp[2 * ms + 1] + logc[ms + 1] + (-sigma + r - 2 * ms - 1) * logn
        lb = lb - np.log(np.where(ok, denom, 1.0))
        if r > 0:
            lb = lb + max(_LOG_FACT[j] - j * math.log(r) for j in range(kmax + 1))
        best = np.minimum(best, np.where(ok, lb, np.inf))
    return best


def _log_rounding(sigma: float, t: float, kmax: int) -> np.ndarray:
    """Rough log of the extended-precision rounding term for every (N, M).

    The Dirichlet terms scale like n^-sigma (log n)^j, so left of the critical
    line a longer sum costs accuracy; this lets the search prefer more
    correction terms over more Dirichlet terms there.
    """
    ns = np.array(_n_candidates(), dtype=float)[:, None]
    ms = np.arange(1, M_MAX + 1)[None, :]
    logn = np.log(ns)
    size = max(0.0, 1 - sigma) * logn + np.log1p(logn) + kmax * np.log(np.maximum(1.0, logn))
    return np.log(8 * _EPS_LD * (16 + t * logn / 512 + ms)) + size


def _select_params(sigma: float, t: float, kmax: int, log_target: float, points: int = 1):
    """Cheapest (N, M) whose remainder bound meets the target.

    The point is moved to a conservative grid corner (smaller sigma, larger
    |t|, smaller target) so the search can be memoized. Cost depends only on
    the batch-size bucket, so for a fixed batch size a tighter target can
    only select a candidate with a smaller bound.
    """
    sq = math.floor(sigma * 2) / 2
    tq = _round_up_t(abs(t))
    lq = math.floor(log_target * 2) / 2
    bucket = 1 if points <= 1 else 1 << int(math.ceil(math.log2(points)))
    return _select_params_cached(sq, tq, kmax, lq, min(bucket, _GROUP))


def _round_up_t(t: float) -> float:
    if t <= 8:
        return math.ceil(t)
    step = 2.0 ** (math.floor(math.log2(t)) - 3)
    return math.ceil(t / step) * step


@lru_cache(maxsize=65536)
def _select_params_cached(sigma: float, t: float, kmax: int, log_target: float, points: int):
    table = _log_bound_table(sigma, t, kmax)
    ns = np.array(_n_candidates(), dtype=float)[:, None]
    ms = np.arange(1, M_MAX + 1)[None, :]
    cost = (points * ns * _COST_TERM * (kmax + 2)
            + ms * (_COST_CORR_CALL + points * _COST_CORR_POINT * (kmax + 1)))
    total = np.logaddexp(table, _log_rounding(sigma, t, kmax))
    feasible = total <= log_target
    if feasible.any():
        cost = np.where(feasible, cost, np.inf)
        i, j = np.unravel_index(int(np.argmin(cost)), cost.shape)
    else:
        i, j = np.unravel_index(int(np.argmin(total)), total.shape)
    return int(ns[i, 0]), int(ms[0, j]), float(table[i, j])


def _series_mul(a, b):
    kk = a.shape[0]
    out = np.zeros_like(a)
    for j in range(kk):
        for i in range(j + 1):
            out[j] += a[i] * b[j - i]
    return out


def _jet_chunk(s: np.ndarray, kmax: int, n: int, m: int, precise: bool = False):
    """Taylor coefficients (kmax+1, P) and rounding scale for a chunk of points.

    With ``precise`` the phase trig runs in extended precision as well; that is
    several times slower, so callers only ask for it when the double-trig
    rounding term would spoil the requested tolerance.
    """
    coeff, _ = _bernoulli_tables()
    kk = kmax + 1
    sig = s.real.astype(_LD)
    tt = s.imag.astype(_LD)
    ss = sig + 1j * tt
    p = s.shape[0]

    # main sum over 1 <= n' < N
    logs = np.log(np.arange(1, n, dtype=_LD))
    fact = np.array([math.factorial(j) for j in range(kk)], dtype=_LD)
    vand = np.stack([(-logs) ** j / fact[j] for j in range(kk)], axis=1)  # (N-1, kk)
    mag = np.exp(-np.outer(sig, logs))
    # trig of the reduced angle in double unless precise
    red = _reduced_phase(tt, n)
    if precise:
        cos_ph, sin_ph = np.cos(red), np.sin(red)
    else:
        hi = red.astype(float)
        lo = red - hi
        c_hi = np.cos(hi).astype(_LD)
        s_hi = np.sin(hi).astype(_LD)
        cos_ph = c_hi - s_hi * lo
        sin_ph = s_hi + c_hi * lo
    terms = mag * cos_ph - 1j * (mag * sin_ph)
    main = (terms @ vand).T  # (kk, P)
    absmain = (mag @ np.abs(vand)).T

    # tail: N^{-s} * [N/(s-1) + 1/2 + sum_j c_j poch_j(s) N^{1-2j}], each as a jet
    ln = np.log(_LD(n))
    q = np.zeros((kk, p), dtype=_CLD)
    n_pow_s = np.exp(-ss * ln)
    for j in range(kk):
        q[j] = n_pow_s * (-ln) ** j / fact[j]
    bracket = np.zeros((kk, p), dtype=_CLD)
    inv = 1.0 / (ss - 1)
    for j in range(kk):
        bracket[j] = _LD(n) * (-1) ** j * inv ** (j + 1)
    bracket[0] += _LD(0.5)
    poch = np.zeros((kk, p), dtype=_CLD)
    poch[0] = ss
    if kk > 1:
        poch[1] = 1
    npow = _LD(1) / _LD(n)
    for j in range(1, m + 1):
        bracket += coeff[j] * npow * poch
        npow = npow / (_LD(n) * _LD(n))
        for i in (2 * j - 1, 2 * j):
            nxt = poch * (ss + i)
            nxt[1:] += poch[:-1]
            poch = nxt
    tail = _series_mul(q, bracket)
    total = main + tail
    scale = absmain + np.abs(tail)
    return total, scale


def _far_left_jet(points: np.ndarray, kmax: int):
    """Multiprecision fallback left of ``LEFT_EDGE``.

    There the Euler-Maclaurin terms grow like n^|sigma| and cancel beyond
    extended precision. The bound is ten times the change between two
    working precisions, floored at double rounding.
    """
    vals = np.empty((kmax + 1, points.size), dtype=complex)
    bounds = np.empty((kmax + 1, points.size))
    for i, z in enumerate(points):
        zz = mpmath.mpc(z.real, z.imag)
        with mpmath.workdps(25):
            lo = [mpmath.zeta(zz, derivative=j) for j in range(kmax + 1)]
        with mpmath.workdps(35):
            hi = [mpmath.zeta(zz, derivative=j) for j in range(kmax + 1)]
        for j in range(kmax + 1):
            v = complex(hi[j])
            vals[j, i] = v
            bounds[j, i] = 10 * float(abs(hi[j] - lo[j])) + 2.0 ** -52 * abs(v) + 1e-300
    return vals, bounds


def _height_groups(heights: np.ndarray, order: np.ndarray):
    """Split points (already sorted by height) into bands of similar height."""
    start = 0
    p = heights.size
    while start < p:
        top = 1.5 * heights[start] + 4.0
        stop = min(int(np.searchsorted(heights, top, side="right")), start + _GROUP)
        stop = max(stop, start + 1)
        yield order[start:stop]
        start = stop


def _validate_point(s) -> complex:
    try:
        s = complex(s)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"not a complex point: {s!r}") from exc
    if not (math.isfinite(s.real) and math.isfinite(s.imag)):
        raise InvalidInput(f"point must be finite, got {s!r}")
    if abs(s - 1) < POLE_GUARD:
        raise PoleProximity(f"|s-1| = {abs(s - 1):.3g} is inside the pole guard {POLE_GUARD}")
    return s


def zeta_jet(s, kmax: int, abs_tol: float | None = None, rel_tol: float = 1e-13):
    """Derivatives ``zeta^(j)(s)`` for j = 0..kmax at an array of points.

    Returns ``(values, bounds, terms)``: complex128 and float64 arrays of shape
    ``(kmax+1, P)`` and the largest number of terms used. Points are grouped
    by height and truncation is chosen per group from its worst point. Without ``abs_tol``
    the truncation target is ``rel_tol`` times a rough size of zeta on the
    batch (functional-equation growth left of 1/2). No accuracy error is
    raised here; callers check ``bounds``.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if not np.all(np.isfinite(s)):
        raise InvalidInput("points must be finite")
    if np.any(np.abs(s - 1) < POLE_GUARD):
        raise PoleProximity("a point lies inside the pole guard around s=1")
    if not 0 <= kmax <= K_MAX + 1:
        raise InvalidInput(f"kmax must be in [0, {K_MAX + 1}]")
    p = s.shape[0]
    if p == 0:
        return np.zeros((kmax + 1, 0), complex), np.zeros((kmax + 1, 0)), 0
    vals = np.empty((kmax + 1, p), dtype=complex)
    bounds = np.empty((kmax + 1, p))
    fact_col = np.array([math.factorial(j) for j in range(kmax + 1)], dtype=float)[:, None]
    far_left = s.real < LEFT_EDGE
    if np.any(far_left):
        left_idx = np.flatnonzero(far_left)
        vals[:, left_idx], bounds[:, left_idx] = _far_left_jet(s[left_idx], kmax)
    near = np.flatnonzero(~far_left)
    order = near[np.argsort(np.abs(s[near].imag), kind="stable")]
    terms = 0
    for idx in _height_groups(np.abs(s.imag)[order], order):
        grp = s[idx]
        sigma = float(grp.real.min())
        t = float(np.abs(grp.imag).max())
        if abs_tol is None:
            size = (np.abs(grp.imag) / (2 * math.pi) + 1.0) ** np.maximum(0.0, 0.5 - grp.real)
            tol = rel_tol * max(1.0, float(size.min()))
        else:
            tol = abs_tol
        n, m, log_trunc = _select_params(sigma, t, kmax, math.log(tol), len(idx))
        terms = max(terms, n + m)
        trunc = math.exp(log_trunc)
        per = max(1, _CHUNK_ELEMS // n)
        for clo in range(0, len(idx), per):
            cidx = idx[clo:clo + per]
            chunk = s[cidx]
            tt = np.abs(chunk.imag)
            ext = 4 * _EPS_LD * (12 + tt * math.log(n) / 512 + m)
            coef, scale = _jet_chunk(chunk, kmax, n, m)
            rnd = (ext + 2.0 ** -52) * scale.astype(float) * fact_col
            if abs_tol is not None and np.any(rnd > 0.25 * tol):
                coef, scale = _jet_chunk(chunk, kmax, n, m, precise=True)
                rnd = (ext + 4 * _EPS_LD) * scale.astype(float) * fact_col
            v = (coef * fact_col.astype(_LD)).astype(complex)
            bounds[:, cidx] = trunc + rnd + 2.0 ** -52 * np.abs(v) + 1e-300
            vals[:, cidx] = v
    return vals, bounds, terms


def _single(s: complex, k: int, target_accuracy: float, order: int) -> tuple:
    if int(k) != k or not 0 <= k <= K_MAX:
        raise InvalidInput(f"k must be an integer in [0, {K_MAX}], got {k!r}")
    if not target_accuracy >= MIN_TARGET:
        raise InvalidInput(f"target_accuracy must be >= {MIN_TARGET}")
    s = _validate_point(s)
    vals, bounds, terms = zeta_jet(np.array([s]), order, abs_tol=target_accuracy / 4)
    return vals[:, 0], bounds[:, 0], terms


def eval_zeta_derivative(s, k: int = 0, target_accuracy: float = 1e-12) -> EvalResult:
    """``zeta^(k)(s)`` with a bound no larger than ``target_accuracy``.

    >>> r = eval_zeta_derivative(2.0)
    >>> abs(r.value - 3.141592653589793 ** 2 / 6) < 1e-12
    True
    """
    vals, bounds, terms = _single(s, k, target_accuracy, k)
    bound = float(bounds[k])
    if not bound <= target_accuracy:
        raise AccuracyNotReached(
            f"bound {bound:.3g} exceeds target {target_accuracy:.3g} at s={complex(s)} (k={k})")
    return EvalResult(complex(vals[k]), bound, terms)


def eval_shifted(s, target: TargetSpec, target_accuracy: float = 1e-12) -> EvalResult:
    """``zeta^(k)(s) - a``; the error bound is that of the derivative."""
    r = eval_zeta_derivative(s, target.k, target_accuracy)
    return EvalResult(r.value - target.a, r.abs_error_bound, r.terms_used)


def shifted_with_derivative(s: complex, target: TargetSpec, target_accuracy: float = 1e-12):
    """``(g(s), g'(s), bound_g)`` for ``g = zeta^(k) - a``; used by Newton."""
    vals, bounds, _ = _single(s, target.k, target_accuracy, target.k + 1)
    return complex(vals[target.k]) - target.a, complex(vals[target.k + 1]), float(bounds[target.k])


def shifted_on_points(points, target: TargetSpec, rel_tol: float = 1e-12):
    """Vectorized ``zeta^(k)(s) - a`` for contour sampling."""
    vals, bounds, _ = zeta_jet(points, target.k, rel_tol=rel_tol)
    return vals[target.k] - target.a, bounds[target.k]


def zeta_real_derivatives(x, kmax: int = 2) -> np.ndarray:
    """Real-axis ``zeta^(j)(x)``, shape ``(kmax+1, len(x))``, for x away from 1."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    vals, _, _ = zeta_jet(x.astype(complex), kmax, rel_tol=1e-15)
    return vals.real


__all__ = [
    "TargetSpec", "EvalResult", "eval_zeta_derivative", "eval_shifted",
    "shifted_with_derivative", "shifted_on_points", "zeta_jet",
    "zeta_real_derivatives", "K_MAX", "POLE_GUARD", "format_complex",
]
