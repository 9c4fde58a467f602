"""Oscillatory integrals and the S = S1 + S2 split of the exponential sum.

The sum over ordinates, sum_{c < gamma <= T} e^{i f(gamma)}, is compared
with its smooth part

    S1 = (1/2pi) int_c^T e^{i f(t)} log(t / (2 n pi)) dt

and the remainder S2 = S_total - S1, which carries the fluctuation A(t) of
the counting function. Integrals are done by adaptive Gauss-Kronrod (7/15)
on panels whose phase change |f'| * width stays below pi/2.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .counting import n_ak
from .errors import DomainError, InvalidInput, InvariantViolated, QuadratureFailure
from .families import FunctionFamily, _log_integral, eval_f, symbolic_class
from .zeta_kernel import TargetSpec, format_complex

# Kronrod 15-point nodes on [0, 1] (mirrored), Kronrod weights, and the embedded Gauss 7 weights
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes on [-1, 1], ascending
W_K = np.concatenate([_WGK[:-1], _WGK[::-1]])
W_G = np.zeros(15)
W_G[1:7:2] = _WG[:3]
W_G[7] = _WG[3]
W_G[9:14:2] = _WG[2::-1]

PHASE_CAP = math.pi / 2
MAX_PANELS = 400_000
VALIDATION_SAMPLES = 10_000


def _gk_rule(fn, lo: np.ndarray, hi: np.ndarray):
    """Kronrod estimate and |K - G| on many panels at once."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    y = fn(x.ravel()).reshape(x.shape)
    k = half * (y @ W_K)
    g = half * (y @ W_G)
    return k, np.abs(k - g)


def _phase_panels(dphase, a: float, b: float, cap: float = PHASE_CAP):
    """Split [a, b] until max |phase'| * width <= cap on each piece (sampled on GK nodes)."""
    done = []
    todo = [(a, b)]
    while todo:
        lo, hi = todo.pop()
        x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.concatenate([[-1.0], NODES, [1.0]])
        slope = float(np.max(np.abs(dphase(x))))
        if slope * (hi - lo) <= cap or hi - lo <= 1e-12 * max(1.0, abs(lo)):
            done.append((lo, hi))
        else:
            n = min(1024, max(2, math.ceil(slope * (hi - lo) / cap)))
            edges = np.linspace(lo, hi, n + 1)
            todo.extend(zip(edges[:-1], edges[1:]))
        if len(done) + len(todo) > MAX_PANELS:
            raise QuadratureFailure("phase subdivision exceeded the panel budget")
    done.sort()
    return done


def oscillatory_integral(phase, amplitude, dphase, a: float, b: float, tol: float = 1e-10):
    """int_a^b amplitude(x) e^{i phase(x)} dx to absolute error ``tol``.

    Returns ``(value, error_estimate, panel_count)``. All callables take arrays.
    """
    if not b >= a:
        raise InvalidInput("integration needs a <= b")
    if a == b:
        return 0j, 0.0, 0

    def fn(x):
        return amplitude(x) * np.exp(1j * phase(x))

    panels = _phase_panels(dphase, a, b)
    lo = np.array([p[0] for p in panels])
    hi = np.array([p[1] for p in panels])
    val, err = _gk_rule(fn, lo, hi)
    heap = [(-e, float(l), float(h), complex(v)) for e, l, h, v in zip(err, lo, hi, val)]
    heapq.heapify(heap)
    total_err = math.fsum(err)
    # below ~1e-14 of the absolute mass the K-G difference is rounding noise
    floor = 1e-14 * math.fsum(np.abs(val))
    while total_err > max(tol, floor):
        if len(heap) > MAX_PANELS:
            raise QuadratureFailure(f"no convergence to {tol:g}; error estimate {total_err:.3g}")
        # split the worst panels in one vectorized batch
        batch = [heapq.heappop(heap) for _ in range(min(len(heap), 64))]
        width_ok = [b_ for b_ in batch if b_[2] - b_[1] > 1e-13 * max(1.0, abs(b_[1]))]
        if not width_ok:
            raise QuadratureFailure(f"panels collapsed before reaching {tol:g}")
        for b_ in batch:
            if b_ not in width_ok:
                heapq.heappush(heap, b_)
        l0 = np.array([b_[1] for b_ in width_ok])
        h0 = np.array([b_[2] for b_ in width_ok])
        m0 = 0.5 * (l0 + h0)
        v, e = _gk_rule(fn, np.concatenate([l0, m0]), np.concatenate([m0, h0]))
        for i, (l_, m_, h_) in enumerate(zip(l0, m0, h0)):
            j = i + len(l0)
            heapq.heappush(heap, (-e[i], float(l_), float(m_), complex(v[i])))
            heapq.heappush(heap, (-e[j], float(m_), float(h_), complex(v[j])))
        total_err = math.fsum(-h_[0] for h_ in heap)
    # fixed left-to-right reduction keeps the result independent of split order
    items = sorted(heap, key=lambda h_: h_[1])
    re = math.fsum(h_[3].real for h_ in items)
    im = math.fsum(h_[3].imag for h_ in items)
    return complex(re, im), total_err, len(items)


# -- first-derivative test ------------------------------------------------------

@dataclass
class OscillatoryTestCase:
    F: Callable
    G: Callable
    a: float
    b: float
    m: float
    dF: Callable  # F' in closed form; the test needs it and numeric differentiation would blur it

    def validate(self, samples: int = VALIDATION_SAMPLES):
        if not self.a < self.b:
            raise InvariantViolated("need a < b")
        if not self.m > 0:
            raise InvariantViolated("m must be positive")
        x = np.linspace(self.a, self.b, samples)
        g = np.asarray(self.G(x), dtype=float)
        d = np.asarray(self.dF(x), dtype=float)
        if np.any(g == 0):
            raise InvariantViolated("G vanishes on the sample")
        ratio = d / g
        if not (np.all(ratio > 0) or np.all(ratio < 0)):
            raise InvariantViolated("F'/G changes sign")
        if np.min(np.abs(ratio)) < self.m * (1 - 1e-12):
            raise InvariantViolated(f"|F'/G| dips to {np.min(np.abs(ratio)):.6g} < m = {self.m}")
        inv = g / d
        step = np.diff(inv)
        slack = 1e-12 * np.max(np.abs(inv))
        if not (np.all(step >= -slack) or np.all(step <= slack)):
            raise InvariantViolated("G/F' is not monotonic")


@dataclass(frozen=True)
class FirstDerivativeResult:
    integral: complex
    bound: float
    passed: bool
    error_estimate: float


def first_derivative_check(case: OscillatoryTestCase, quad_tolerance: float = 1e-8) -> FirstDerivativeResult:
    """Compare |int_a^b G e^{iF}| with the first-derivative bound 4/m."""
    case.validate()
    val, err, _ = oscillatory_integral(case.F, case.G, case.dF, case.a, case.b, quad_tolerance)
    bound = 4.0 / case.m
    return FirstDerivativeResult(val, bound, abs(val) <= bound + quad_tolerance, err)


# -- S = S1 + S2 ----------------------------------------------------------------------

def compute_S1(family: FunctionFamily, target: TargetSpec, c: float, T: float,
               quad_tolerance: float = 1e-8) -> complex:
    """(1/2pi) int_c^T e^{i f(t)} log(t / (2 n pi)) dt."""
    if not c > math.e:
        raise DomainError("c must exceed e")
    if not T >= c:
        raise InvalidInput("T must be at least c")
    if T == c:
        return 0j
    n = n_ak(target)
    val, _, _ = oscillatory_integral(
        lambda t: eval_f(family, t, 0),
        lambda t: np.log(t / (2 * n * math.pi)),
        lambda t: eval_f(family, t, 1),
        c, T, tol=2 * math.pi * quad_tolerance)
    return val / (2 * math.pi)


ENVELOPE_KEYS = ("logT_over_fprime", "inv_TfprimeSq", "fpp_logT_over_fprime3", "logT",
                 "integral_fprime_logt")


def envelope_terms(family: FunctionFamily, c: float, T: float) -> dict:
    f1 = abs(eval_f(family, T, 1))
    f2 = abs(eval_f(family, T, 2))
    lt = math.log(T)
    integral = 0.0 if T == c else _log_integral(family, c, T, math.log)
    return {
        "logT_over_fprime": lt / f1,
        "inv_TfprimeSq": 1.0 / (T * f1 ** 2),
        "fpp_logT_over_fprime3": f2 * lt / f1 ** 3,
        "logT": lt,
        "integral_fprime_logt": integral,
    }


def s1_envelope(env: dict) -> float:
    """Sum of the S1 error shapes, with 1 for the O(1) term."""
    return env["logT_over_fprime"] + env["inv_TfprimeSq"] + env["fpp_logT_over_fprime3"] + 1.0


def exp_sum(family: FunctionFamily, gammas) -> complex:
    """sum e^{i f(gamma)} with compensated summation; ``gammas`` repeats multiple points."""
    g = np.asarray(gammas, dtype=float)
    if g.size == 0:
        return 0j
    phase = eval_f(family, g, 0)
    return complex(math.fsum(np.cos(phase)), math.fsum(np.sin(phase)))


def _common_grid(total: float, part: float):
    """Round both onto the grid 2 ulp(max(|total|, |part|)); their difference is then exact."""
    big = max(abs(total), abs(part))
    if big == 0:
        return total, part, 0.0
    q = math.ldexp(1.0, max(math.frexp(big)[1] - 52, -1074))
    t = round(total / q) * q
    p = round(part / q) * q
    return t, p, t - p


def exact_split(total: complex, part: complex):
    """(total', part', rest) with part' + rest == total' bit for bit.

    A plain ``total - part`` can't be exact when |part| dwarfs |total|, so
    both are first moved to a common binary grid. That shifts each by at most
    one ulp of the larger magnitude, far below the summation or quadrature
    error already in them.
    """
    tr, pr, rr = _common_grid(total.real, part.real)
    ti, pi_, ri = _common_grid(total.imag, part.imag)
    return complex(tr, ti), complex(pr, pi_), complex(rr, ri)


@dataclass
class DecompositionReport:
    target: TargetSpec
    family: FunctionFamily
    c: float
    T: float
    S_total: complex
    S1: complex
    S2: complex
    envelope_terms: dict
    count: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if set(self.envelope_terms) != set(ENVELOPE_KEYS):
            raise InvalidInput(f"envelope terms must be {ENVELOPE_KEYS}")

    @property
    def normalized(self) -> float:
        """|S_total| / (N(T) - N(c)); zero when no ordinate lies in (c, T]."""
        return abs(self.S_total) / self.count if self.count else 0.0

    def to_json(self) -> dict:
        def cj(z):
            return {"re": z.real, "im": z.imag, "abs": abs(z)}
        return {
            "target": {"k": self.target.k, "a": format_complex(self.target.a)},
            "family": self.family.to_json(),
            "c": self.c,
            "T": self.T,
            "count": self.count,
            "S_total": cj(self.S_total),
            "S1": cj(self.S1),
            "S2": cj(self.S2),
            "normalized": self.normalized,
            "envelope_terms": {k: self.envelope_terms[k] for k in ENVELOPE_KEYS},
            "s1_envelope_sum": s1_envelope(self.envelope_terms),
            **self.extra,
        }


def decompose(family: FunctionFamily, target: TargetSpec, c: float, T: float, cache,
              quad_tolerance: float = 1e-8) -> DecompositionReport:
    """S_total over cached ordinates in (c, T], S1 by quadrature, S2 by subtraction."""
    if not c > math.e:
        raise DomainError("c must exceed e")
    if not T >= c:
        raise InvalidInput("T must be at least c")
    gam = cache.gammas(target, c, T)
    total = exp_sum(family, gam)
    s1 = compute_S1(family, target, c, T, quad_tolerance)
    cls = symbolic_class(family)
    extra = {"classification": cls.value if cls else None}
    total, s1, s2 = exact_split(total, s1)
    return DecompositionReport(target, family, float(c), float(T), total, s1, s2,
                               envelope_terms(family, c, T), len(gam), extra)
