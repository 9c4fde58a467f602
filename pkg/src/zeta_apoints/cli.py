"""Command line front end.

JSON reports go to ``--out`` (or stdout) and are byte-stable for a fixed
configuration and cache: keys are sorted and nothing time-dependent is
written. Progress and human-readable tables go to stderr.

Exit codes: 0 success, 2 invalid input, 3 refused input, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import apoint_cache as ac
from .apoint_engine import DEFAULT_STRIP, DEFAULT_T_LOW, EngineStats, locate_apoints
from .counting import main_term, n_ak, residual_curve
from .equidist import ModOneSequence, geometric_prefixes, trend_report
from .errors import Inadmissible, InvalidInput, ZetaApointsError
from .families import (
    DEFAULT_C,
    Classification,
    FunctionFamily,
    check_conditions,
    eval_f,
    parse_family,
    symbolic_class,
)
from .oscillatory import decompose, s1_envelope
from .zeta_kernel import TargetSpec, format_complex

COMMANDS = ("apoints", "verify-counting", "equidist", "decompose", "check-conditions")
BORDERLINE_BANNER = "Borderline (not covered by the main equidistribution theorem; see Fujii)"
DEFAULT_GRID = (50.0, 100.0, 200.0, 400.0)


def parse_complex(text: str) -> complex:
    """``"re"`` or ``"re+imi"`` (e.g. ``0.5+0.5i``), no whitespace."""
    s = str(text)
    if not s or any(ch.isspace() for ch in s) or "j" in s.lower():
        raise InvalidInput(f"cannot parse complex value {text!r}; use re or re+imi")
    try:
        z = complex(s.replace("i", "j").replace("I", "j"))
    except ValueError:
        raise InvalidInput(f"cannot parse complex value {text!r}; use re or re+imi") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidInput("a must be finite")
    return z


def _float_list(text: str, what: str) -> list[float]:
    items = [p for p in str(text).split(",") if p.strip()]
    if not items:
        raise InvalidInput(f"{what} is empty")
    try:
        return [float(p) for p in items]
    except ValueError:
        raise InvalidInput(f"{what} must be a comma separated list of numbers") from None


@dataclass
class RunConfig:
    command: str
    target: TargetSpec
    family_spec: str | None = None
    t_max: float | None = None
    c: float = DEFAULT_C
    h_list: list = field(default_factory=list)
    prefix_list: list | None = None
    cache_path: Path | None = None
    out_path: Path | None = None
    seed: int = 0
    quad_tol: float = 1e-8
    plot_path: Path | None = None
    grid: list | None = None
    strip: tuple = DEFAULT_STRIP
    grid_size: int = 2000

    def family(self) -> FunctionFamily:
        if not self.family_spec:
            raise InvalidInput(f"{self.command} needs --family")
        return parse_family(self.family_spec)

    def require_cache(self) -> Path:
        if self.cache_path is None:
            raise InvalidInput(f"{self.command} needs --cache")
        return self.cache_path


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zeta-apoints",
                                description="a-points of zeta^(k) and equidistribution of {f(gamma)}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--k", type=int, default=0, help="derivative order, 0..4")
    p.add_argument("--a", default="0", help="target value, 're' or 're+imi'")
    p.add_argument("--t-max", type=float, default=None, help="height T")
    p.add_argument("--c", type=float, default=DEFAULT_C, help="lower cutoff c (default 100)")
    p.add_argument("--family", default=None, help="e.g. powerlog:u=1,v=0.5,w=0")
    p.add_argument("--h", type=int, action="append", default=None, help="Weyl frequency (repeatable)")
    p.add_argument("--prefixes", default=None, help="comma separated prefix sizes; 'full' = all")
    p.add_argument("--grid", default=None, help="comma separated T grid for verify-counting")
    p.add_argument("--grid-size", type=int, default=2000, help="samples for check-conditions")
    p.add_argument("--strip", default=None, help="sigma_min,sigma_max of the search strip")
    p.add_argument("--cache", type=Path, default=None, help="a-point cache CSV")
    p.add_argument("--out", type=Path, default=None, help="report path (default stdout)")
    p.add_argument("--plot", type=Path, default=None, help="write an SVG figure here")
    p.add_argument("--seed", type=int, default=0, help="seed for anything randomized (plot ids)")
    p.add_argument("--quad-tol", type=float, default=1e-8, help="quadrature tolerance")
    return p


def config_from_args(ns) -> RunConfig:
    target = TargetSpec(parse_complex(ns.a), ns.k)
    strip = DEFAULT_STRIP
    if ns.strip is not None:
        vals = _float_list(ns.strip, "--strip")
        if len(vals) != 2 or not vals[0] < vals[1]:
            raise InvalidInput("--strip needs sigma_min,sigma_max with sigma_min < sigma_max")
        strip = (vals[0], vals[1])
    prefixes = None
    if ns.prefixes is not None:
        prefixes = []
        for tok in str(ns.prefixes).split(","):
            tok = tok.strip().lower()
            if not tok:
                continue
            if tok == "full":
                prefixes.append("full")
            else:
                try:
                    prefixes.append(int(tok))
                except ValueError:
                    raise InvalidInput(f"bad prefix {tok!r}") from None
        if not prefixes:
            raise InvalidInput("--prefixes is empty")
    grid = _float_list(ns.grid, "--grid") if ns.grid is not None else None
    if not ns.quad_tol > 0:
        raise InvalidInput("--quad-tol must be positive")
    if not math.isfinite(ns.c):
        raise InvalidInput("--c must be finite")
    return RunConfig(command=ns.command, target=target, family_spec=ns.family, t_max=ns.t_max,
                     c=ns.c, h_list=list(ns.h or []), prefix_list=prefixes, cache_path=ns.cache,
                     out_path=ns.out, seed=ns.seed, quad_tol=ns.quad_tol, plot_path=ns.plot,
                     grid=grid, strip=strip, grid_size=ns.grid_size)


# -- output helpers ---------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(cfg: RunConfig, payload: dict, stdout):
    text = dumps(payload)
    if cfg.out_path is None:
        stdout.write(text)
    else:
        ac.atomic_write(cfg.out_path, text)


def _emit_plot(cfg: RunConfig, svg: str):
    if cfg.plot_path is not None:
        ac.atomic_write(cfg.plot_path, svg)


def _target_json(target: TargetSpec) -> dict:
    return {"k": target.k, "a": format_complex(target.a), "n_ak": n_ak(target)}


# -- commands -----------------------------------------------------------------

def cmd_apoints(cfg: RunConfig, stdout, stderr) -> int:
    path = cfg.require_cache()
    if cfg.t_max is None or not cfg.t_max > DEFAULT_T_LOW:
        raise InvalidInput("apoints needs --t-max above 1")
    cache = ac.read_cache(path) if path.exists() else ac.ApointCache()
    start = time.perf_counter()
    stats = EngineStats()
    pts = locate_apoints(cfg.target, DEFAULT_T_LOW, cfg.t_max, cfg.strip, stats=stats)
    cache.add(cfg.target, pts, ac.Coverage(DEFAULT_T_LOW, float(cfg.t_max), *map(float, cfg.strip)))
    ac.write_cache(cache, path)
    wall = time.perf_counter() - start
    count = sum(p.multiplicity for p in pts)
    max_res = max((p.residual for p in pts), default=0.0)
    mt = main_term(cfg.t_max, cfg.target)
    summary = {
        "command": "apoints",
        "target": _target_json(cfg.target),
        "t_max": cfg.t_max,
        "strip": list(cfg.strip),
        "count": count,
        "winding_count": stats.total_count,
        "max_residual": max_res,
        "main_term": mt,
        "count_minus_main_term": count - mt,
        "log_T": math.log(cfg.t_max),
        "cache": str(path),
    }
    _emit(cfg, summary, stdout)
    stderr.write(f"{cfg.target.label()}: {count} a-points up to T={cfg.t_max:g} "
                 f"(winding count {stats.total_count}, n_ak={n_ak(cfg.target)}, "
                 f"main term {mt:.3f}), max residual {max_res:.3g}, wall time {wall:.2f}s\n")
    return 0


def cmd_verify_counting(cfg: RunConfig, stdout, stderr) -> int:
    cache = ac.read_cache(cfg.require_cache())
    grid = cfg.grid
    if grid is None:
        cov = cache.coverage(cfg.target)
        top = cfg.t_max if cfg.t_max is not None else (cov.t_high if cov else max(DEFAULT_GRID))
        grid = [T for T in DEFAULT_GRID if T <= top] or [top]
    curve = residual_curve(cfg.target, cache, grid)
    payload = {"command": "verify-counting", **curve.to_json(),
               "max_abs_residual_over_logT": curve.max_ratio()}
    _emit(cfg, payload, stdout)
    stderr.write(f"{cfg.target.label()}: n_ak={n_ak(cfg.target)}\n")
    stderr.write("       T  observed   main_term   residual  residual/logT\n")
    for T, o, m, r in zip(curve.t_grid, curve.observed, curve.main_term, curve.residual):
        stderr.write(f"{T:8.1f}  {o:8d}  {m:10.3f}  {r:9.3f}  {r / math.log(T):13.3f}\n")
    if cfg.plot_path is not None:
        from .plots import counting_svg
        _emit_plot(cfg, counting_svg(curve, cfg.seed))
    return 0


def _banner(family: FunctionFamily) -> str | None:
    cls = symbolic_class(family)
    if cls == Classification.BORDERLINE:
        return BORDERLINE_BANNER
    if cls == Classification.INADMISSIBLE:
        return "Inadmissible (outside the covered region; trends carry no guarantee)"
    return None


def cmd_equidist(cfg: RunConfig, stdout, stderr) -> int:
    family = cfg.family()
    cache = ac.read_cache(cfg.require_cache())
    if not cfg.c > math.e:
        raise InvalidInput("--c must exceed e")
    cov = cache.coverage(cfg.target)
    t_max = cfg.t_max if cfg.t_max is not None else (cov.t_high if cov else math.inf)
    if not t_max > cfg.c:
        raise InvalidInput("--t-max must exceed --c")
    gam = cache.gammas(cfg.target, max(cfg.c, 1.0), t_max)
    if not gam:
        raise InvalidInput(f"no cached ordinates in ({cfg.c}, {t_max}]")
    label = f"{family.spec_string()} over {cfg.target.label()}, {cfg.c:g} < gamma <= {t_max:g}"
    seq = ModOneSequence(eval_f(family, np.asarray(gam), 0), label)
    if cfg.prefix_list is None:
        prefixes = geometric_prefixes(len(seq))
    else:
        prefixes = sorted({len(seq) if p == "full" else p for p in cfg.prefix_list})
    report = trend_report(seq, cfg.h_list or [1], prefixes)
    banner = _banner(family)
    cls = symbolic_class(family)
    payload = {"command": "equidist", "target": _target_json(cfg.target), "family": family.to_json(),
               "c": cfg.c, "t_max": t_max, "length": len(seq), "banner": banner,
               "classification": cls.value if cls else None, **report.to_json()}
    if cfg.out_path is not None and cfg.out_path.suffix.lower() == ".csv":
        ac.atomic_write(cfg.out_path, report.to_csv())
    else:
        _emit(cfg, payload, stdout)
    if banner:
        stderr.write(banner + "\n")
    for h, row in zip(report.frequencies, report.magnitudes):
        stderr.write(f"h={h}: " + " ".join(f"N={n}:{m:.4f}" for n, m in zip(report.prefix_sizes, row)) + "\n")
    stderr.write("D*: " + " ".join(f"N={n}:{d:.4f}" for n, d in zip(report.prefix_sizes, report.discrepancies)) + "\n")
    if cfg.plot_path is not None:
        from .plots import equidist_svg
        _emit_plot(cfg, equidist_svg(report, seq.values, cfg.seed))
    return 0


def _gate(family: FunctionFamily, c: float, target: TargetSpec):
    """Refuse inadmissible families, naming the conditions that fail."""
    cls = symbolic_class(family)
    if cls in (Classification.ADMISSIBLE, Classification.BORDERLINE):
        return cls
    report = check_conditions(family, c=c, T=max(1e5, 10 * c), n_ak=n_ak(target))
    failing = report.failing()
    if cls == Classification.INADMISSIBLE or failing:
        names = ", ".join(failing) if failing else "the (u,v,w) region"
        raise Inadmissible(f"{family.spec_string()} is inadmissible: fails {names}")
    return cls


def cmd_decompose(cfg: RunConfig, stdout, stderr) -> int:
    family = cfg.family()
    if cfg.t_max is None:
        raise InvalidInput("decompose needs --t-max")
    if not cfg.c > math.e or not cfg.t_max >= cfg.c:
        raise InvalidInput("need e < c <= t_max")
    _gate(family, cfg.c, cfg.target)
    cache = ac.read_cache(cfg.require_cache())
    hs = cfg.h_list or [None]
    reports = []
    for h in hs:
        fam = family if h is None else family.scaled(2 * math.pi * h)
        rep = decompose(fam, cfg.target, cfg.c, cfg.t_max, cache, cfg.quad_tol)
        body = rep.to_json()
        body["h"] = h
        body["identity_residual"] = abs(rep.S_total - (rep.S1 + rep.S2))
        reports.append(body)
        stderr.write(f"h={h}: |S_total|={abs(rep.S_total):.6g} |S1|={abs(rep.S1):.6g} "
                     f"|S2|={abs(rep.S2):.6g} normalized={rep.normalized:.6g}\n")
    banner = _banner(family)
    payload = {"command": "decompose", "banner": banner, "quad_tol": cfg.quad_tol, "reports": reports}
    _emit(cfg, payload, stdout)
    if banner:
        stderr.write(banner + "\n")
    if cfg.plot_path is not None and cfg.t_max > cfg.c:
        from .plots import decompose_svg
        fam = family if hs[0] is None else family.scaled(2 * math.pi * hs[0])
        Ts = [float(x) for x in np.geomspace(cfg.c, cfg.t_max, 13)[1:]]
        norm, env = [], []
        for T in Ts:
            rep = decompose(fam, cfg.target, cfg.c, T, cache, cfg.quad_tol)
            norm.append(rep.normalized)
            env.append(s1_envelope(rep.envelope_terms) / rep.count if rep.count else float("nan"))
        _emit_plot(cfg, decompose_svg(Ts, norm, env, fam.spec_string(), cfg.seed))
    return 0


def cmd_check_conditions(cfg: RunConfig, stdout, stderr) -> int:
    family = cfg.family()
    T = cfg.t_max if cfg.t_max is not None else 1e5
    report = check_conditions(family, c=cfg.c, T=T, grid_size=cfg.grid_size, n_ak=n_ak(cfg.target))
    cls = symbolic_class(family)
    payload = {"command": "check-conditions", "family": family.to_json(),
               "target": _target_json(cfg.target),
               "classification": cls.value if cls else None, **report.to_json()}
    _emit(cfg, payload, stdout)
    if cls is not None:
        stderr.write(f"symbolic classification: {cls.value}\n")
    for cid, verdict in report.verdicts.items():
        stderr.write(f"{cid:8s} {verdict}\n")
    if report.witness is not None:
        stderr.write(f"witness t = {report.witness:g}\n")
    if cls == Classification.BORDERLINE:
        stderr.write(BORDERLINE_BANNER + "\n")
    return 0


_DISPATCH = {
    "apoints": cmd_apoints,
    "verify-counting": cmd_verify_counting,
    "equidist": cmd_equidist,
    "decompose": cmd_decompose,
    "check-conditions": cmd_check_conditions,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports its own message
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        return _DISPATCH[cfg.command](cfg, stdout, stderr)
    except ZetaApointsError as exc:
        stderr.write(f"error ({type(exc).__name__}): {exc}\n")
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
