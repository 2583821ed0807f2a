"""Report figures rendered straight through the Agg canvas.

No pyplot state is touched and the PNG writer gets an empty Software tag,
so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .mechanism import DirectMechanism, posterior_no_news
from .primitives import ModelParams

_DPI = 120


def _new_figure(width: float = 6.4, height: float = 4.2) -> Figure:
    fig = Figure(figsize=(width, height), dpi=_DPI)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, path) -> None:
    fig.savefig(path, format="png", metadata={"Software": None})


def frontier_figure(rows, d1, path) -> None:
    """Payoff frontier (pi_L, pi_H) with the named corner points and the
    refinement-surviving price segment."""
    fig = _new_figure()
    ax = fig.add_subplot()
    pl = [row[4] for row in rows]
    ph = [row[5] for row in rows]
    ax.plot(pl, ph, color="C0", lw=1.8, label="frontier")
    for row in rows:
        if row[6] in ("B", "F", "H"):
            ax.plot([row[4]], [row[5]], "o", color="C3", ms=5)
            ax.annotate(
                row[6],
                (row[4], row[5]),
                textcoords="offset points",
                xytext=(6, 4),
                fontsize=10,
            )
    if d1 is not None:
        seg_l = [d1.point_F.pi_L, d1.point_D.pi_L]
        seg_h = [d1.point_F.pi_H, d1.point_D.pi_H]
        ax.plot(seg_l, seg_h, "--", color="C2", lw=1.4, label="D1 segment")
        ax.plot([d1.point_D.pi_L], [d1.point_D.pi_H], "s", color="C2", ms=5)
        ax.annotate(
            "D",
            (d1.point_D.pi_L, d1.point_D.pi_H),
            textcoords="offset points",
            xytext=(6, -10),
            fontsize=10,
        )
    ax.set_xlabel("low-type payoff")
    ax.set_ylabel("high-type payoff")
    ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, path)


def welfare_figure(rows, path) -> None:
    """Welfare fraction of first best: free trial vs freemium, by prior."""
    fig = _new_figure()
    ax = fig.add_subplot()
    mu = [row[0] for row in rows]
    ax.plot(mu, [row[1] for row in rows], "o-", color="C0", ms=4, label="free trial")
    ax.plot(mu, [row[2] for row in rows], "s-", color="C1", ms=4, label="freemium")
    ax.set_xlabel("prior mu0")
    ax.set_ylabel("welfare / first best")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, path)


def refunds_figure(schedules, path) -> None:
    """Report-time payment deltas over time, one line per schedule."""
    fig = _new_figure()
    ax = fig.add_subplot()
    for idx, (name, schedule) in enumerate(schedules):
        ax.plot(schedule.times, schedule.deltas, color=f"C{idx}", lw=1.8, label=name)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("report time")
    ax.set_ylabel("payment delta")
    ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, path)


def mechanism_figure(
    mech: DirectMechanism, params: ModelParams, mu0: float, path
) -> None:
    """Uninformed access/utility paths and the matching no-news belief."""
    fig = _new_figure(6.4, 5.2)
    ax1, ax2 = fig.subplots(2, 1, sharex=True)
    access = mech.access_uninformed
    ax1.stairs(access.values, access.edges, color="C0", lw=1.8, label="access")
    utility = mech.uninformed_utility()
    if not (
        np.array_equal(utility.edges, access.edges)
        and np.array_equal(utility.values, access.values)
    ):
        ax1.stairs(
            utility.values, utility.edges, color="C1", lw=1.6, ls="--", label="utility"
        )
    ax1.set_ylabel("uninformed path")
    ax1.set_ylim(-0.05, 1.1)
    ax1.legend(loc="best")

    ts = np.linspace(access.start, access.end, 257)
    beliefs = [posterior_no_news(mech, mu0, t, params) for t in ts]
    ax2.plot(ts, beliefs, color="C2", lw=1.8)
    ax2.set_xlabel("time")
    ax2.set_ylabel("belief, no news")
    ax2.set_ylim(0.0, 1.0)
    fig.tight_layout()
    _save(fig, path)
