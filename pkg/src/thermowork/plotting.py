"""Figure rendering for the CLI report paths (headless Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_isotropic_figure(rows: list[dict], path) -> None:
    """Closed-form vs optimizer assistance and the collaboration bound."""
    lam = [r["lambda"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.plot(lam, [r["w_a_closed_form"] for r in rows], "-", label="assistance (closed form)")
    ax1.plot(lam, [r["w_a_optimizer"] for r in rows], "o", ms=4, label="assistance (optimizer)")
    ax1.plot(lam, [r["w_r"] for r in rows], "--", label="collaboration bound")
    ax1.set_xlabel(r"$\lambda$")
    ax1.set_ylabel("work / energy units")
    ax1.legend(fontsize=8)
    ax2.plot(lam, [r["discord_gap"] for r in rows], "-", color="tab:red")
    ax2.set_xlabel(r"$\lambda$")
    ax2.set_ylabel("discord gap")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep_figure(rows: list[dict], path) -> None:
    """Hierarchy endpoints per sampled state plus the discord-gap spread."""
    wa = [r["w_assistance"] for r in rows]
    wr = [r["w_collaboration_upper"] for r in rows]
    gaps = [r["discord_gap"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.scatter(wa, wr, s=14, c=gaps, cmap="viridis")
    lim = max(max(wr, default=1.0), 1e-6)
    ax1.plot([0, lim], [0, lim], "k--", lw=0.8)
    ax1.set_xlabel("work of assistance")
    ax1.set_ylabel("collaboration upper bound")
    ax2.hist(gaps, bins=max(5, len(gaps) // 4), color="tab:blue", alpha=0.8)
    ax2.set_xlabel("discord gap")
    ax2.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
