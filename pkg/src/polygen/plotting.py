"""Figure rendering for runs and reports (headless, deterministic PNGs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .manifolds import ManifoldSpec, sample

# fixed seed for the grey ground-truth reference cloud in scatter figures
_REFERENCE_SEED = 123456
_REFERENCE_N = 2000


def _reference_cloud(spec: ManifoldSpec) -> np.ndarray:
    return sample(spec, _REFERENCE_N, _REFERENCE_SEED)


def save_scatter(points, path, spec: ManifoldSpec | None = None, title: str = "") -> None:
    """Scatter generated samples over a reference cloud of the target."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    is3d = pts.shape[1] == 3
    fig = plt.figure(figsize=(5, 4), dpi=120)
    ax = fig.add_subplot(111, projection="3d" if is3d else None)
    if spec is not None:
        ref = _reference_cloud(spec)
        ax.scatter(*ref.T, s=2, c="0.8", label="target")
    if len(pts):
        ax.scatter(*pts.T, s=2, c="tab:blue", label="samples")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=7, markerscale=3)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def save_history(history, path, title: str = "") -> None:
    """Loss curves and the residual trace from a training history."""
    steps = [h["step"] for h in history]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5, 5), dpi=120, sharex=True)
    ax1.plot(steps, [h["loss_d"] for h in history], label="discriminator")
    ax1.plot(steps, [h["loss_g"] for h in history], label="generator")
    ax1.set_ylabel("loss")
    ax1.legend(fontsize=7)
    res = np.asarray([h["mean_residual"] for h in history], dtype=np.float64)
    finite = np.isfinite(res)
    ax2.plot(np.asarray(steps)[finite], res[finite])
    ax2.set_yscale("log")
    ax2.set_xlabel("step")
    ax2.set_ylabel("mean residual")
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def save_comparison(rows, path, title: str = "") -> None:
    """Grouped bar chart of residual and coverage per (run label)."""
    labels = [r["label"] for r in rows]
    x = np.arange(len(labels))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.5), dpi=120)
    ax1.bar(x, [r["mean_residual"] for r in rows], color="tab:blue")
    ax1.set_xticks(x, labels, rotation=30, ha="right", fontsize=7)
    ax1.set_ylabel("mean residual")
    ax1.set_yscale("log")
    ax2.bar(x, [r["coverage"] for r in rows], color="tab:orange")
    ax2.set_xticks(x, labels, rotation=30, ha="right", fontsize=7)
    ax2.set_ylabel("coverage")
    ax2.set_ylim(0, 1.05)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
