"""PNG figures for corpus statistics and balancing reports.

Figures carry no software or date metadata, so identical inputs give
identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}


def _save(fig, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", dpi=100, metadata=_META)
    plt.close(fig)


def plot_type_counts(counts: Mapping[str, int], path: str | Path, title: str = "Questions per type") -> None:
    names = list(counts)
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.bar(range(len(names)), [counts[n] for n in names], color="#4c72b0")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("questions")
    ax.set_title(title)
    fig.tight_layout()
    _save(fig, path)


def plot_length_histogram(lengths: Mapping[int, int], path: str | Path) -> None:
    xs = sorted(lengths)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(xs, [lengths[x] for x in xs], color="#55a868")
    ax.set_xlabel("question length (words)")
    ax.set_ylabel("questions")
    ax.set_title("Question length")
    fig.tight_layout()
    _save(fig, path)


def plot_balance(groups: Sequence[Mapping], path: str | Path, top: int = 10) -> None:
    """Relative answer frequencies before and after balancing, one row per group."""
    n = max(1, len(groups))
    fig, axes = plt.subplots(n, 2, figsize=(10, 2.2 * n), squeeze=False)
    for row, g in zip(axes, groups):
        before = g["input"]
        after = g["realized"]
        answers = sorted(before, key=lambda a: (-before[a], a))[:top]
        for ax, dist, label in ((row[0], before, "before"), (row[1], after, "after")):
            total = sum(dist.values()) or 1
            ax.bar(range(len(answers)), [dist.get(a, 0) / total for a in answers], color="#c44e52")
            ax.set_xticks(range(len(answers)))
            ax.set_xticklabels(answers, rotation=45, ha="right", fontsize=7)
            ax.set_ylim(0, 1)
            ax.set_title(f"{g['group']} ({label})", fontsize=9)
    fig.tight_layout()
    _save(fig, path)
