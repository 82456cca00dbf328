"""Matplotlib figures rendered alongside the delimited report outputs.

Rendering is deterministic: the Agg backend, fixed dpi, and fixed PNG
metadata, so repeated runs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .metrics import FOCUS_CONDITIONS, FOCUS_ROLES, FocusSummary  # noqa: E402

_SAVE_KWARGS = dict(dpi=150, metadata={"Software": "prosotok"})


def _save(fig, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_bar_figure(
    path: str | Path,
    labels: Sequence[str],
    means: Sequence[float],
    errors: Sequence[float],
    title: str,
    ylabel: str,
) -> None:
    """Generic bar chart with standard-error bars (style pairs, dialogue
    contrast, per-word log-probability differences)."""
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(labels)), 3.2))
    x = range(len(labels))
    ax.bar(x, means, yerr=errors, capsize=3, color="#4878a8")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def save_focus_figure(path: str | Path, summary: FocusSummary) -> None:
    """Grouped bars of mean F0 per sentence component under the pre-focus,
    on-focus, and post-focus conditions."""
    fig, ax = plt.subplots(figsize=(6.4, 3.2))
    width = 0.25
    offsets = (-width, 0.0, width)
    colors = ("#9aa8bf", "#c5443c", "#4878a8")
    for offset, color, condition in zip(offsets, colors, FOCUS_CONDITIONS):
        xs, means, errs = [], [], []
        for i, role in enumerate(FOCUS_ROLES):
            cell = summary.cells[(role, condition)]
            if cell is None:
                continue
            xs.append(i + offset)
            means.append(cell.mean)
            errs.append(0.0 if cell.stderr != cell.stderr else cell.stderr)
        ax.bar(xs, means, width=width, yerr=errs, capsize=2, color=color, label=condition)
    ax.set_xticks(range(len(FOCUS_ROLES)))
    ax.set_xticklabels(FOCUS_ROLES)
    ax.set_ylabel("mean F0 (Hz)")
    ax.set_title("Average F0 by focus condition")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
