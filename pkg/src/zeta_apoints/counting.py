"""Main term of the a-point counting function and the observed residual A(T)."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

from .errors import InvalidInput
from .zeta_kernel import TargetSpec, format_complex


def n_ak(target: TargetSpec) -> int:
    """2 for (a, k) = (1, 0) or (0, k >= 1), else 1; exact comparison on a."""
    a = complex(target.a)
    if a == 1 and target.k == 0:
        return 2
    if a == 0 and target.k >= 1:
        return 2
    return 1


def main_term(T: float, target: TargetSpec) -> float:
    """(T/2pi) (log T - log(2 n pi e))."""
    if not T > 1:
        raise InvalidInput(f"T must exceed 1, got {T}")
    n = n_ak(target)
    return T / (2 * math.pi) * (math.log(T) - math.log(2 * n * math.pi * math.e))


@dataclass(frozen=True)
class GeneralCountingModel:
    C1: float
    C2: float

    def __post_init__(self):
        if not math.isfinite(self.C1) or self.C1 == 0:
            raise InvalidInput("C1 must be finite and non-zero")
        if not (math.isfinite(self.C2) and self.C2 > 0):
            raise InvalidInput("C2 must be positive")

    @classmethod
    def for_target(cls, target: TargetSpec) -> "GeneralCountingModel":
        return cls(1 / (2 * math.pi), 2 * math.pi * n_ak(target) * math.e)


def general_main_term(T: float, model: GeneralCountingModel) -> float:
    """C1 T (log T - log C2)."""
    if not T > 0:
        raise InvalidInput(f"T must be positive, got {T}")
    return model.C1 * T * (math.log(T) - math.log(model.C2))


def envelopes(T: float) -> dict:
    """Error-term shapes for plotting next to the residual: unconditional and RH-conditional."""
    lt = math.log(T)
    llt = math.log(lt) if lt > 1 else float("nan")
    return {
        "logT": lt,
        "logT_over_loglogT": lt / llt if llt > 0 else float("nan"),
        "logT_over_sqrt_loglogT": lt / math.sqrt(llt) if llt > 0 else float("nan"),
    }


@dataclass(frozen=True)
class CountingCurve:
    target: TargetSpec
    t_grid: list
    main_term: list
    observed: list
    residual: list

    def __post_init__(self):
        n = len(self.t_grid)
        if not (len(self.main_term) == len(self.observed) == len(self.residual) == n):
            raise InvalidInput("CountingCurve lists must share one length")

    def envelopes(self) -> dict:
        cols = {"logT": [], "logT_over_loglogT": [], "logT_over_sqrt_loglogT": []}
        for T in self.t_grid:
            for key, val in envelopes(T).items():
                cols[key].append(val)
        return cols

    def max_ratio(self) -> float:
        """max |residual| / log T over the grid."""
        return max(abs(r) / math.log(T) for r, T in zip(self.residual, self.t_grid))

    def to_json(self) -> dict:
        return {
            "target": {"k": self.target.k, "a": format_complex(self.target.a)},
            "n_ak": n_ak(self.target),
            "t_grid": list(self.t_grid),
            "main_term": list(self.main_term),
            "observed": list(self.observed),
            "residual": list(self.residual),
            "envelopes": self.envelopes(),
        }


def residual_curve(target: TargetSpec, apoint_cache, t_grid) -> CountingCurve:
    """Observed count N(T) from the cache against the main term on ``t_grid``."""
    grid = [float(T) for T in t_grid]
    if not grid:
        raise InvalidInput("t_grid is empty")
    if any(not T > 1 for T in grid):
        raise InvalidInput("every grid point must exceed 1")
    gam = apoint_cache.gammas(target, 1.0, max(grid))
    observed = [bisect.bisect_right(gam, T) for T in grid]
    mains = [main_term(T, target) for T in grid]
    resid = [o - m for o, m in zip(observed, mains)]
    return CountingCurve(target, grid, mains, observed, resid)
