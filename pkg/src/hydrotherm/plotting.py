"""Report figures rendered to image files (Agg backend, no display needed)."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import OutputError  # noqa: E402
from .sim import PHASES  # noqa: E402

DAY = 86400.0


def _save(fig, path):
    path = Path(path)
    try:
        fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    finally:
        plt.close(fig)
    return path


def plot_profiles(profiles, path):
    """Temperature along every observation line, one panel per line.

    ``profiles`` is a list of ``(time_s, {line: (arc, T)})``.
    """
    names = list(profiles[0][1])
    ncol = min(3, len(names))
    nrow = -(-len(names) // ncol)
    fig, axes = plt.subplots(nrow, ncol, figsize=(4.2 * ncol, 3.2 * nrow), squeeze=False)
    cmap = plt.get_cmap("viridis")
    for ax, name in zip(axes.flat, names):
        for i, (t, prof) in enumerate(profiles):
            arc, T = prof[name]
            ax.plot(arc, T, color=cmap(i / max(1, len(profiles) - 1)), lw=1.2, label=f"{t / DAY:.0f} d")
        ax.set_title(name, fontsize=10)
        ax.set_xlabel("arc length (m)")
        ax.set_ylabel("T (K)")
        ax.grid(alpha=0.3)
    for ax in list(axes.flat)[len(names):]:
        ax.set_visible(False)
    axes.flat[0].legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return _save(fig, path)


def plot_phases(reports, path):
    """Stacked bars of the four phase timers per worker count."""
    workers = sorted(reports)
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    bottom = np.zeros(len(workers))
    x = np.arange(len(workers))
    for name in PHASES:
        vals = np.array([reports[w].phases[name] for w in workers])
        ax.bar(x, vals, bottom=bottom, label=name)
        bottom += vals
    ax.set_xticks(x, [str(w) for w in workers])
    ax.set_xlabel("workers")
    ax.set_ylabel("wall time (s)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_scaling(reports, path):
    """Total time against worker count on log-log axes, with ideal scaling."""
    workers = np.array(sorted(reports), dtype=float)
    totals = np.array([reports[int(w)].total for w in workers])
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.loglog(workers, totals, "o-", label="measured")
    ax.loglog(workers, totals[0] * workers[0] / workers, "k--", lw=0.8, label="ideal")
    ax.set_xticks(workers, [str(int(w)) for w in workers])
    ax.set_xlabel("workers")
    ax.set_ylabel("total time (s)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    return _save(fig, path)


__all__ = ["plot_phases", "plot_profiles", "plot_scaling"]
