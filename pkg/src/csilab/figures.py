"""Small matplotlib helpers for the report path (files only, Agg backend)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _atomic_save(fig, path):
    """Write the figure next to `path` and rename into place."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.path.splitext(path)[1]}"
    fig.savefig(tmp, dpi=130, bbox_inches="tight")
    plt.close(fig)
    os.replace(tmp, path)


def save_heatmaps(path, images, suptitle=None, cmap="viridis"):
    """Render a row of labelled magnitude images to `path`.

    `images` is a sequence of (title, 2-D array) pairs sharing one color scale.
    """
    n = len(images)
    vmax = max(float(np.max(img)) for _, img in images) or 1.0
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.2), squeeze=False)
    for ax, (title, img) in zip(axes[0], images):
        im = ax.imshow(np.asarray(img), cmap=cmap, vmin=0.0, vmax=vmax,
                       aspect="auto", interpolation="nearest")
        ax.set_title(title, fontsize=9)
        ax.set_xlabel("angle bin")
        ax.set_ylabel("delay bin")
    fig.colorbar(im, ax=axes[0].tolist(), shrink=0.85)
    if suptitle:
        fig.suptitle(suptitle)
    _atomic_save(fig, path)


def save_lines(path, x, ys, xlabel, ylabel, title=None, logy=False):
    """Line plot; `ys` maps series label -> values over `x`."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, vals in ys.items():
        ax.plot(x, vals, marker="o", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if logy:
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    _atomic_save(fig, path)


def save_cdf(path, groups, xlabel, title=None):
    """Empirical CDF step curves; `groups` maps label -> 1-D sample array."""
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for label, vals in groups.items():
        v = np.sort(np.asarray(vals).ravel())
        ax.step(v, np.arange(1, v.size + 1) / v.size, where="post", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("empirical CDF")
    ax.set_ylim(0.0, 1.02)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    _atomic_save(fig, path)


def save_box(path, groups, ylabel, title=None):
    """Box plot; `groups` maps label -> 1-D sample array."""
    fig, ax = plt.subplots(figsize=(1.6 * max(len(groups), 2) + 1.5, 3.6))
    labels = list(groups)
    ax.boxplot([np.asarray(groups[k]).ravel() for k in labels],
               tick_labels=labels)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3, axis="y")
    _atomic_save(fig, path)


def save_bars(path, labels, values, ylabel, title=None):
    fig, ax = plt.subplots(figsize=(0.9 * max(len(labels), 2) + 2.0, 3.6))
    ax.bar(range(len(labels)), values)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3, axis="y")
    _atomic_save(fig, path)
