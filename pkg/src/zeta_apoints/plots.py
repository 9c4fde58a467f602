"""Optional SVG figures. Output is byte-stable: no timestamps, fixed hash salt."""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, seed: int) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": f"zeta-apoints-{seed}", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def counting_svg(curve, seed: int = 0) -> str:
    env = curve.envelopes()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(curve.t_grid, curve.residual, "o-", label="observed - main term")
    for key, style in (("logT", "--"), ("logT_over_loglogT", ":"), ("logT_over_sqrt_loglogT", "-.")):
        ax.plot(curve.t_grid, env[key], style, label=key)
        ax.plot(curve.t_grid, [-v for v in env[key]], style, color=ax.lines[-1].get_color())
    ax.set_xscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel("A(T)")
    ax.set_title(f"counting residual, {curve.target.label()}")
    ax.legend(fontsize=8)
    return _save(fig, seed)


def equidist_svg(report, values, seed: int = 0) -> str:
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    for h, row in zip(report.frequencies, report.magnitudes):
        axes[0].plot(report.prefix_sizes, row, "o-", label=f"h={h}")
    axes[0].set_xscale("log")
    axes[0].set_xlabel("N")
    axes[0].set_ylabel("|S_h(N)|")
    axes[0].legend(fontsize=8)
    axes[1].plot(report.prefix_sizes, report.discrepancies, "o-")
    axes[1].set_xscale("log")
    axes[1].set_xlabel("N")
    axes[1].set_ylabel("D*_N")
    axes[2].hist(values, bins=20, range=(0.0, 1.0))
    axes[2].set_xlabel("f(gamma) mod 1")
    fig.suptitle(report.source_label)
    fig.tight_layout()
    return _save(fig, seed)


def decompose_svg(Ts, normalized, envelope_sums, label: str, seed: int = 0) -> str:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(Ts, normalized, "o-", label="|S_total| / (N(T) - N(c))")
    ax.plot(Ts, envelope_sums, "--", label="S1 envelope sum / (N(T) - N(c))")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("T")
    ax.legend(fontsize=8)
    ax.set_title(label)
    return _save(fig, seed)
