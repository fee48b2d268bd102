"""Figures written next to the JSON reports.

Everything goes through the Agg backend and PNG metadata is pinned, so the
same report renders to the same bytes.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .core import CharacterApprox, Structure  # noqa: E402

_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", dpi=80, metadata=_META)
    plt.close(fig)
    return path


def class_counts(ch: CharacterApprox) -> dict[int, int]:
    """Size k -> number of classes of size k, read off the (k, n) pairs."""
    out: dict[int, int] = {}
    for k, n in ch.pairs:
        out[k] = max(out.get(k, 0), n)
    return out


def character_figure(trace: list[CharacterApprox], path, max_size: int = 8) -> Path:
    """Number of classes of each size k <= max_size against the stage."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    stages = [c.stage for c in trace]
    counts = [class_counts(c) for c in trace]
    sizes = sorted({k for c in counts for k in c if k <= max_size})
    for k in sizes:
        ax.plot(stages, [c.get(k, 0) for c in counts], marker="o", label=f"size {k}")
    ax.set_xlabel("stage")
    ax.set_ylabel("classes")
    ax.set_title("finite classes by size")
    if sizes:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return _save(fig, path)


def size_histogram(S: Structure, stage: int, path, created_by: int | None = None) -> Path:
    sizes = Counter(S.finite_sizes(stage, created_by))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    keys = sorted(sizes)
    ax.bar([str(k) for k in keys], [sizes[k] for k in keys], color="tab:blue")
    ax.set_xlabel("class size")
    ax.set_ylabel("classes")
    ax.set_title(f"stage {stage}: {S.infinite_count(stage)} classes declared infinite")
    fig.tight_layout()
    return _save(fig, path)


def stabilization_figure(approx, path) -> Path:
    """Last change of each element's image, with retractions marked."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    xs = sorted(approx.history)
    ax.scatter(xs, [approx.history[a][-1][0] for a in xs], s=8, label="last change")
    if approx.retractions:
        ax.scatter([r["element"] for r in approx.retractions], [r["stage"] for r in approx.retractions],
                   marker="x", color="tab:red", s=12, label="retraction")
    ax.axhline(approx.budget // 2, color="grey", lw=0.8, ls="--")
    ax.set_xlabel("element")
    ax.set_ylabel("stage")
    ax.set_title(f"{approx.level} map, budget {approx.budget}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def diag_figure(statuses: list[dict], path) -> Path:
    """Final sizes of x_e in B1 and of its guess in B2, per requirement."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    es = [st["e"] for st in statuses]
    b1 = [st.get("b1_size", 0) for st in statuses]
    b2 = [0 if st.get("b2_infinite") else st.get("b2_size", 0) for st in statuses]
    ax.bar([e - 0.2 for e in es], b1, width=0.4, label="witness in B1")
    ax.bar([e + 0.2 for e in es], b2, width=0.4, label="guess in B2 (0 = infinite)")
    ax.set_xlabel("requirement")
    ax.set_ylabel("class size at budget")
    ax.set_xticks(es)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)
