"""Test functions f for the sequences {f(gamma)} and their admissibility checks.

Four kinds are built in:

* ``PowerLog``      f(t) = u t^v (log t)^w
* ``LogPowLogLog``  f(t) = u (log t)^v (log log t)^w
* ``PowerTimesZeta`` f(t) = u t^v zeta(t), 0 < v < 1
* ``LinearPhase``   f(t) = alpha t

Derivatives are exact closed forms. The numeric admissibility check samples
the two monotonicity conditions on a geometric grid and decides the three
o(.) growth conditions by the trend of the relevant ratio over three
doublings of T. A trend cannot prove an asymptotic statement, so a mixed
trend is reported as indeterminate rather than guessed.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import DomainError, InvalidInput, QuadratureFailure, ZeroAmplitude
from .zeta_kernel import zeta_real_derivatives

CONDITION_IDS = ("C1", "C2", "C3", "C4", "C5", "C6", "C6prime")
HOLDS, FAILS, INDETERMINATE = "holds", "fails", "indeterminate"
DEFAULT_C = 100.0
TREND_EPS = 1e-3  # log-log slope a ratio must beat to count as decaying
_DOUBLINGS = 3
_FLAT_REL = 1e-10  # relative step treated as flat in monotonicity scans


class FamilyKind(str, Enum):
    POWER_LOG = "PowerLog"
    LOG_POW_LOG_LOG = "LogPowLogLog"
    POWER_TIMES_ZETA = "PowerTimesZeta"
    LINEAR_PHASE = "LinearPhase"


class Classification(str, Enum):
    ADMISSIBLE = "Admissible"
    BORDERLINE = "Borderline"
    INADMISSIBLE = "Inadmissible"


_PARAMS = {
    FamilyKind.POWER_LOG: ("u", "v", "w"),
    FamilyKind.LOG_POW_LOG_LOG: ("u", "v", "w"),
    FamilyKind.POWER_TIMES_ZETA: ("u", "v"),
    FamilyKind.LINEAR_PHASE: ("alpha",),
}
_PREFIX = {
    "powerlog": FamilyKind.POWER_LOG,
    "loglog": FamilyKind.LOG_POW_LOG_LOG,
    "powzeta": FamilyKind.POWER_TIMES_ZETA,
    "linear": FamilyKind.LINEAR_PHASE,
}


@dataclass(frozen=True)
class FunctionFamily:
    kind: FamilyKind
    params: tuple  # values in the order of _PARAMS[kind]

    def __post_init__(self):
        kind = FamilyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        names = _PARAMS[kind]
        if len(self.params) != len(names):
            raise InvalidInput(f"{kind.value} takes parameters {names}")
        vals = tuple(float(p) for p in self.params)
        if not all(math.isfinite(p) for p in vals):
            raise InvalidInput("family parameters must be finite")
        object.__setattr__(self, "params", vals)
        p = self.named
        if kind == FamilyKind.LINEAR_PHASE:
            if p["alpha"] == 0:
                raise InvalidInput("linear phase needs alpha != 0")
        elif p["u"] == 0:
            raise ZeroAmplitude("amplitude u must be non-zero")
        if kind == FamilyKind.POWER_TIMES_ZETA and not 0 < p["v"] < 1:
            raise InvalidInput("PowerTimesZeta needs 0 < v < 1")

    @classmethod
    def power_log(cls, u, v, w):
        return cls(FamilyKind.POWER_LOG, (u, v, w))

    @classmethod
    def log_pow_log_log(cls, u, v, w):
        return cls(FamilyKind.LOG_POW_LOG_LOG, (u, v, w))

    @classmethod
    def power_times_zeta(cls, u, v):
        return cls(FamilyKind.POWER_TIMES_ZETA, (u, v))

    @classmethod
    def linear(cls, alpha):
        return cls(FamilyKind.LINEAR_PHASE, (alpha,))

    @property
    def named(self) -> dict:
        return dict(zip(_PARAMS[self.kind], self.params))

    def scaled(self, factor: float) -> "FunctionFamily":
        """The family of ``factor * f``; every kind is linear in its first parameter."""
        return FunctionFamily(self.kind, (self.params[0] * factor,) + self.params[1:])

    def spec_string(self) -> str:
        prefix = {v: k for k, v in _PREFIX.items()}[self.kind]
        return prefix + ":" + ",".join(f"{k}={v!r}" for k, v in self.named.items())

    def to_json(self) -> dict:
        return {"kind": self.kind.value, **self.named}


def parse_family(text: str) -> FunctionFamily:
    """Parse ``"powerlog:u=1,v=0.5,w=0"`` style strings (case-insensitive)."""
    m = re.fullmatch(r"\s*([a-z]+)\s*:(.*)", str(text).lower())
    if not m or m.group(1) not in _PREFIX:
        raise InvalidInput(f"unrecognized family {text!r}; expected one of {sorted(_PREFIX)}")
    kind = _PREFIX[m.group(1)]
    values = {}
    for item in m.group(2).split(","):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise InvalidInput(f"malformed parameter {item!r} in {text!r}")
        if key in values:
            raise InvalidInput(f"parameter {key} given twice in {text!r}")
        try:
            values[key] = float(val)
        except ValueError:
            raise InvalidInput(f"parameter {key} is not a number in {text!r}") from None
    names = _PARAMS[kind]
    if set(values) != set(names):
        raise InvalidInput(f"{m.group(1)} needs exactly the parameters {','.join(names)}")
    return FunctionFamily(kind, tuple(values[n] for n in names))


# -- evaluation -------------------------------------------------------------

def _real_zeta(t: np.ndarray) -> np.ndarray:
    """(zeta, zeta', zeta'') at real t > e; direct Dirichlet sum once 2^-t is negligible."""
    out = np.empty((3, t.size))
    big = t >= 40.0
    if np.any(big):
        n = np.arange(1, 21, dtype=float)[:, None]
        ln = np.log(n)
        terms = np.exp(-t[big][None, :] * ln)
        out[0, big] = terms.sum(axis=0)
        out[1, big] = -(ln * terms).sum(axis=0)
        out[2, big] = (ln ** 2 * terms).sum(axis=0)
    if np.any(~big):
        out[:, ~big] = zeta_real_derivatives(t[~big], 2)
    return out


def eval_f(family: FunctionFamily, t, order: int = 0):
    """f, f' or f'' at ``t`` (scalar or array); t must exceed e."""
    if order not in (0, 1, 2):
        raise InvalidInput("order must be 0, 1 or 2")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(t > math.e):
        raise DomainError("f is only defined for t > e")
    p = family.named
    L = np.log(t)
    kind = family.kind
    if kind == FamilyKind.POWER_LOG:
        u, v, w = p["u"], p["v"], p["w"]
        if order == 0:
            out = u * t ** v * L ** w
        elif order == 1:
            out = u * t ** (v - 1) * L ** w * (v + w / L)
        else:
            out = u * t ** (v - 2) * L ** w * ((v - 1) * v + ((2 * v - 1) * w + (w - 1) * w / L) / L)
    elif kind == FamilyKind.LOG_POW_LOG_LOG:
        u, v, w = p["u"], p["v"], p["w"]
        M = np.log(L)
        if order == 0:
            out = u * L ** v * M ** w
        elif order == 1:
            out = u * L ** (v - 1) * M ** (w - 1) * (v * M + w) / t
        else:
            out = (u * L ** (v - 2) * M ** (w - 2) / t ** 2
                   * (w * (2 * v - L - 1) * M + v * (v - L - 1) * M ** 2 + (w - 1) * w))
    elif kind == FamilyKind.POWER_TIMES_ZETA:
        u, v = p["u"], p["v"]
        z = _real_zeta(t)
        if order == 0:
            out = u * t ** v * z[0]
        elif order == 1:
            out = u * v * t ** (v - 1) * z[0] + u * t ** v * z[1]
        else:
            out = (u * v * (v - 1) * t ** (v - 2) * z[0] + 2 * u * v * t ** (v - 1) * z[1]
                   + u * t ** v * z[2])
    else:
        alpha = p["alpha"]
        out = alpha * t if order == 0 else np.full_like(t, alpha if order == 1 else 0.0)
    return float(out[0]) if scalar else out


# -- classification ---------------------------------------------------------

def classify_power_log(u: float, v: float, w: float) -> Classification:
    """Region where u t^v (log t)^w is covered, plus the linear borderline cell."""
    if u == 0:
        raise ZeroAmplitude("amplitude u must be non-zero")
    if 0 < v < 1 or (v == 0 and w > 1) or (v == 1 and w < 0):
        return Classification.ADMISSIBLE
    if v == 1 and w == 0:
        return Classification.BORDERLINE
    return Classification.INADMISSIBLE


def symbolic_class(family: FunctionFamily) -> Classification | None:
    """Closed-form classification where one exists (power-log and the linear phase)."""
    if family.kind == FamilyKind.POWER_LOG:
        return classify_power_log(*family.params)
    if family.kind == FamilyKind.LINEAR_PHASE:
        return Classification.BORDERLINE
    return None


# -- numeric condition checks -----------------------------------------------

@dataclass
class ConditionReport:
    c_used: float
    verdicts: dict
    witness: float | None = None
    T: float | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if tuple(self.verdicts) != CONDITION_IDS:
            raise InvalidInput(f"verdicts must be keyed by {CONDITION_IDS}")

    def failing(self) -> list[str]:
        return [k for k, v in self.verdicts.items() if v == FAILS]

    def all_hold(self) -> bool:
        return all(v == HOLDS for v in self.verdicts.values())

    def to_json(self) -> dict:
        return {"c_used": self.c_used, "T": self.T, "verdicts": dict(self.verdicts),
                "witness": self.witness, "details": self.details}


def _monotone_single_signed(t: np.ndarray, q: np.ndarray):
    """(verdict, witness): q must keep one strict sign and one direction of change."""
    bad = ~np.isfinite(q) | (q == 0)
    if np.any(bad):
        return FAILS, float(t[np.argmax(bad)])
    sign = np.sign(q)
    if np.any(sign != sign[0]):
        return FAILS, float(t[np.argmax(sign != sign[0])])
    d = np.diff(q)
    flat = np.abs(d) <= _FLAT_REL * np.maximum(np.abs(q[:-1]), np.abs(q[1:]))
    direction = np.sign(d)
    direction[flat] = 0
    moving = direction[direction != 0]
    if moving.size == 0 or np.all(moving == moving[0]):
        return HOLDS, None
    first = moving[0]
    flip = np.flatnonzero(direction == -first)[0]
    return FAILS, float(t[flip])


def _trend(Ts, ratios):
    """Decide r(T) -> 0 from the ratios at successive doublings."""
    r = np.abs(np.asarray(ratios, dtype=float))
    if np.any(~np.isfinite(r)):
        return FAILS, float(Ts[int(np.argmax(~np.isfinite(r)))]), []
    if np.all(r == 0):
        return HOLDS, None, []
    if np.any(r == 0):
        return INDETERMINATE, None, []
    slopes = list(np.diff(np.log(r)) / math.log(2.0))
    if all(s < -TREND_EPS for s in slopes):
        return HOLDS, None, slopes
    if all(s >= -TREND_EPS for s in slopes):
        return FAILS, float(Ts[-1]), slopes
    return INDETERMINATE, None, slopes


def _kinks(family, lo, hi, n=4001):
    """Sign changes of f' inside [lo, hi], located on a geometric grid."""
    t = np.geomspace(lo, hi, n)
    s = np.sign(eval_f(family, t, 1))
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    return [float(np.sqrt(t[i] * t[i + 1])) for i in idx]


def _log_integral(family, lo, hi, weight, quad_tol=1e-10):
    """integral_lo^hi |f'(t)| weight(t) dt, in the variable x = log t."""
    def integrand(x):
        t = math.exp(x)
        return abs(eval_f(family, t, 1)) * weight(t) * t

    pts = [math.log(k) for k in _kinks(family, lo, hi)]
    val, err = integrate.quad(integrand, math.log(lo), math.log(hi), points=pts or None,
                              epsabs=0.0, epsrel=quad_tol, limit=400)
    if not math.isfinite(val) or err > 1e-6 * abs(val) + 1e-300:
        raise QuadratureFailure(f"integral of |f'| on [{lo}, {hi}] did not converge (err {err:.3g})")
    return val


def check_conditions(family: FunctionFamily, c: float = DEFAULT_C, T: float = 1e5,
                     grid_size: int = 2000, n_ak: int = 1) -> ConditionReport:
    """Numeric verdicts for the six admissibility conditions and the RH-weakened sixth.

    Sampling covers [c, 8T]; the growth conditions compare T, 2T, 4T, 8T.
    ``n_ak`` enters the third condition through log(t / (2 n pi)).
    """
    if not c > math.e:
        raise DomainError("c must exceed e")
    if not T > 2 * c:
        raise InvalidInput("T must exceed 2c")
    if grid_size < 100:
        raise InvalidInput("grid_size must be at least 100")
    Ts = [T * 2.0 ** j for j in range(_DOUBLINGS + 1)]
    t = np.geomspace(c, Ts[-1], int(grid_size))
    f1 = eval_f(family, t, 1)
    f2 = eval_f(family, t, 2)
    verdicts = {"C1": HOLDS}
    witnesses = {}
    details = {"C1": "closed-form C^2 function on (c, inf)"}

    verdicts["C2"], witnesses["C2"] = _monotone_single_signed(t, t * f1 ** 2)

    if np.all(f2 == 0):
        verdicts["C3"] = HOLDS
        details["C3"] = "f'' vanishes identically, so the term it controls is zero"
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            q3 = f1 ** 3 / (f2 * np.log(t / (2 * n_ak * math.pi)))
        verdicts["C3"], witnesses["C3"] = _monotone_single_signed(t, q3)

    T_arr = np.asarray(Ts)
    g1 = eval_f(family, T_arr, 1)
    g2 = eval_f(family, T_arr, 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r4 = 1.0 / (np.abs(g1) * T_arr)
        r5 = np.abs(g2) / (np.abs(g1) ** 3 * T_arr)
    r4 = np.where(g1 == 0, np.inf, r4)
    r5 = np.where(g1 == 0, np.inf, r5)
    verdicts["C4"], witnesses["C4"], s4 = _trend(Ts, r4)
    verdicts["C5"], witnesses["C5"], s5 = _trend(Ts, r5)

    for cid, weight in (("C6", math.log),
                        ("C6prime", lambda x: math.log(x) / math.sqrt(math.log(math.log(x))))):
        acc, edges, ratios = 0.0, [c] + Ts, []
        for lo, hi in zip(edges, edges[1:]):
            acc += _log_integral(family, lo, hi, weight)
            ratios.append(acc / (hi * math.log(hi)))
        verdicts[cid], witnesses[cid], s = _trend(Ts, ratios)
        details[cid] = {"ratios": ratios, "slopes": s}
    details["C4"] = {"ratios": list(r4), "slopes": s4}
    details["C5"] = {"ratios": list(r5), "slopes": s5}

    witness = None
    for cid in CONDITION_IDS:
        if verdicts[cid] == FAILS and witnesses.get(cid) is not None:
            witness = witnesses[cid]
            break
    ordered = {cid: verdicts[cid] for cid in CONDITION_IDS}
    return ConditionReport(c_used=float(c), verdicts=ordered, witness=witness, T=float(T),
                           details={k: details[k] for k in sorted(details)})
