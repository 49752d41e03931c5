"""Figures for the ``report`` subcommands, rendered off-screen to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .logic import AreaReport  # noqa: E402
from .metrics import InstructionStats, TimingModel, cycle_time  # noqa: E402


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def stats_figure(stats: InstructionStats, path) -> None:
    rows = stats.rows()
    names = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(names, [r[3] for r in rows], color="tab:blue", label="t_ins (quads)")
    ax.bar(names, [r[1] for r in rows], color="tab:orange", alpha=0.7, label="n_ins")
    ax.set_ylabel("count")
    ax.set_title("retired instructions by mnemonic")
    ax.legend()
    _save(fig, path)


def area_figure(reports: dict[str, AreaReport], path) -> None:
    labels = list(reports)
    sin = [r.sin_mm2 for r in reports.values()]
    inp = [r.inp_mm2 for r in reports.values()]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(labels, sin, label="SiN")
    ax.bar(labels, inp, bottom=sin, label="InP")
    ax.set_ylabel("area (mm$^2$)")
    ax.legend()
    _save(fig, path)


def timing_figure(model: TimingModel, path, max_length_m: float | None = None) -> None:
    """Cycle time against critical-path length, with the configured point marked."""
    top = max_length_m or 2.0 * model.l_max_m
    steps = 50
    xs = [top * i / steps for i in range(1, steps + 1)]
    ys = [cycle_time(TimingModel(x, model.group_index, model.thread_spacing_ps, model.c)) for x in xs]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot([x * 100 for x in xs], ys)
    ax.plot([model.l_max_m * 100], [cycle_time(model)], "o", color="tab:red")
    ax.set_xlabel("longest path (cm)")
    ax.set_ylabel("cycle time (ns)")
    ax.set_title(f"group index {model.group_index:g}")
    _save(fig, path)
