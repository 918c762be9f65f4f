"""File output: atomic writes, CSV tables, and rendered figures.

All writers go through a temp-file-and-rename step so a crash never leaves
a half-written artifact.  Figures are rendered headlessly and carry no
clock-dependent metadata, so byte-identical inputs give byte-identical
files.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .invert import LiftTrace

__all__ = [
    "atomic_write_text",
    "write_json",
    "profile_csv_text",
    "write_profile_csv",
    "radius_csv_text",
    "write_radius_csv",
    "write_trace_csv",
    "render_profile_figure",
    "render_trace_figure",
    "render_radius_figure",
]

_SAVEFIG = {"dpi": 120, "metadata": {"Software": None}}
_VERDICT_COLORS = {
    "certified": "#2a7e43",
    "refuted": "#b4373b",
    "inconclusive": "#c58a1f",
}


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _fmt(v: float) -> str:
    return repr(float(v))


def profile_csv_text(rows: Sequence[dict]) -> str:
    lines = ["rho,inf_index"]
    for row in rows:
        lines.append(f"{_fmt(row['rho'])},{_fmt(row['inf_index'])}")
    return "\n".join(lines) + "\n"


def write_profile_csv(path: str, rows: Sequence[dict]) -> None:
    atomic_write_text(path, profile_csv_text(rows))


def radius_csv_text(table: Sequence[dict]) -> str:
    lines = ["r,rho,verdict"]
    for row in table:
        lines.append(f"{_fmt(row['r'])},{_fmt(row['rho'])},{row['verdict']}")
    return "\n".join(lines) + "\n"


def write_radius_csv(path: str, table: Sequence[dict]) -> None:
    atomic_write_text(path, radius_csv_text(table))


def write_trace_csv(path: str, trace: LiftTrace) -> None:
    atomic_write_text(path, trace.csv_text())


def _atomic_savefig(fig, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".png")
    os.close(fd)
    try:
        fig.savefig(tmp, format="png", **_SAVEFIG)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    finally:
        plt.close(fig)


def render_profile_figure(rows: Sequence[dict], path: str,
                          title: Optional[str] = None) -> None:
    """Step plot of the running rate infimum against the ball radius."""
    rhos = [float(r["rho"]) for r in rows]
    vals = [float(r["inf_index"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.step([0.0] + rhos, [vals[0]] + vals, where="post", color="#1f5fa8")
    ax.plot(rhos, vals, "o", color="#1f5fa8", markersize=4)
    ax.axhline(0.0, color="#888888", linewidth=0.8)
    ax.set_xlabel("ball radius")
    ax.set_ylabel("infimum of the surjection-rate index")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _atomic_savefig(fig, path)


def render_trace_figure(trace: LiftTrace, path: str,
                        title: Optional[str] = None) -> None:
    """Lifted point coordinates and the local rate estimate against t."""
    ts = [row["t"] for row in trace.rows]
    fig, (ax1, ax2) = plt.subplots(
        2, 1, figsize=(6.0, 5.5), sharex=True,
        gridspec_kw={"height_ratios": [2, 1]},
    )
    xs = np.array([row["x"] for row in trace.rows])
    for j in range(trace.dim):
        ax1.plot(ts, xs[:, j], label=f"x{j}")
    ax1.set_ylabel("lifted point")
    ax1.grid(alpha=0.3)
    if trace.dim <= 6:
        ax1.legend(loc="best", fontsize=8)
    ax2.plot(ts, [row["index_estimate"] for row in trace.rows],
             color="#2a7e43")
    ax2.set_xlabel("path parameter t")
    ax2.set_ylabel("local rate estimate")
    ax2.grid(alpha=0.3)
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    _atomic_savefig(fig, path)


def render_radius_figure(table: Sequence[dict], path: str,
                         title: Optional[str] = None) -> None:
    """Guaranteed target radius against the source ball radius."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    rs = [float(row["r"]) for row in table]
    rhos = [float(row["rho"]) for row in table]
    colors = [_VERDICT_COLORS.get(row["verdict"], "#555555") for row in table]
    ax.plot(rs, rhos, color="#bbbbbb", linewidth=1.0, zorder=1)
    ax.scatter(rs, rhos, c=colors, s=45, zorder=2)
    for verdict, color in _VERDICT_COLORS.items():
        if any(row["verdict"] == verdict for row in table):
            ax.scatter([], [], c=color, label=verdict)
    ax.set_xlabel("source ball radius")
    ax.set_ylabel("guaranteed target radius")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _atomic_savefig(fig, path)
