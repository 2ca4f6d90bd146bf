"""Figure rendering for the report paths.

Figures are rendered to files next to the CSV output; the CSV stays the
machine-readable contract and nothing downstream depends on these images.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path: Path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def render_simulation_figures(metrics, outdir) -> list[str]:
    """Render regret, tracking, and per-round-decay figures for one exact run."""
    outdir = Path(outdir)
    run = metrics.run
    t = np.arange(1, run.T + 1)
    written = []

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(t, run.cum_regret_centralized, label="centralized regret")
    ax.plot(t, run.cum_regret_decentralized, label="decentralized regret")
    ax.plot(t, metrics.bound_centralized, "--", label="centralized bound")
    if metrics.bound_decentralized is not None:
        ax.plot(t, metrics.bound_decentralized, "--", label="decentralized bound")
    ax.set_xlabel("round t")
    ax.set_ylabel("cumulative regret")
    ax.set_yscale("symlog")
    ax.legend()
    ax.set_title("Cumulative regret vs theoretical envelopes")
    written.append(_save(fig, outdir / "regret.png"))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    if metrics.w1_mu_pi is not None:
        ax.plot(t, metrics.w1_mu_pi, label="W1(mu_t, pi_t)")
    ax.plot(t, metrics.tv_mu_pi, label="TV(mu_t, pi_t)")
    if metrics.constants is not None and metrics.shift_bounds is not None:
        from .theory import tracking_bound_curve

        track = tracking_bound_curve(run.T, metrics.constants.kappa_star,
                                     metrics.shift_bounds, 0.0)
        ax.plot(t, track, "--", label="tracking bound")
    ax.set_xlabel("round t")
    ax.set_ylabel("distance")
    ax.set_yscale("log")
    ax.legend()
    ax.set_title("Decentralized tracking of the centralized strategy")
    written.append(_save(fig, outdir / "tracking.png"))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(t, run.cum_regret_decentralized / t, label="decentralized regret / t")
    ax.plot(t, run.cum_regret_centralized / t, label="centralized regret / t")
    ax.set_xlabel("round t")
    ax.set_ylabel("per-round regret")
    ax.legend()
    ax.set_title("Per-round regret decay")
    written.append(_save(fig, outdir / "per_round_regret.png"))
    return written


def render_bound_figures(ts: np.ndarray, bound_centralized: np.ndarray,
                         bound_decentralized: np.ndarray | None, outdir) -> list[str]:
    outdir = Path(outdir)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(ts, bound_centralized, label="centralized bound")
    if bound_decentralized is not None:
        ax.plot(ts, bound_decentralized, label="decentralized bound")
    ax.set_xlabel("horizon T")
    ax.set_ylabel("regret bound")
    ax.set_yscale("log")
    ax.legend()
    ax.set_title("Regret envelopes vs horizon")
    return [_save(fig, outdir / "bounds.png")]
