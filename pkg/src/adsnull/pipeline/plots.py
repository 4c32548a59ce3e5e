"""Figure rendering for the report paths; PNG files next to the CSVs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_MAX_POINTS = 6000


def _decimate(*arrays):
    n = len(arrays[0])
    if n <= _MAX_POINTS:
        return arrays
    step = int(np.ceil(n / _MAX_POINTS))
    return tuple(a[::step] for a in arrays)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def torus_curve(path, coords, title=""):
    """3-d plot of a curve in the solid-torus chart."""
    (coords,) = _decimate(np.asarray(coords))
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(projection="3d")
    ax.plot(coords[:, 0], coords[:, 1], coords[:, 2], lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    lim = max(3.0, float(np.abs(coords).max()))
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_zlim(-1.2, 1.2)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def torus_slices(path, coords_by_t, labels):
    """Several t-slices of a flow in the torus chart, one panel each."""
    k = len(coords_by_t)
    fig = plt.figure(figsize=(5 * k, 5))
    for idx, (coords, label) in enumerate(zip(coords_by_t, labels)):
        (coords,) = _decimate(np.asarray(coords))
        ax = fig.add_subplot(1, k, idx + 1, projection="3d")
        ax.plot(coords[:, 0], coords[:, 1], coords[:, 2], lw=0.8)
        ax.set_title(label)
        lim = max(3.0, float(np.abs(coords).max()))
        ax.set_xlim(-lim, lim)
        ax.set_ylim(-lim, lim)
        ax.set_zlim(-1.2, 1.2)
    return _save(fig, path)


def cousins(path, eta_p, eta_m):
    """The star-shaped cousin pair in the plane."""
    eta_p, eta_m = _decimate(np.asarray(eta_p), np.asarray(eta_m))
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.plot(eta_p[:, 0], eta_p[:, 1], color="tab:blue", lw=0.9, label="plus cousin")
    ax.plot(eta_m[:, 0], eta_m[:, 1], color="tab:red", lw=0.9, label="minus cousin")
    ax.plot([0], [0], "k.", ms=6)
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return _save(fig, path)


def profiles(path, s, named_values, xlabel="s", title=""):
    """Overlaid profiles; named_values maps label -> array over s."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, vals in named_values.items():
        ss, vv = _decimate(np.asarray(s), np.asarray(vals))
        ax.plot(ss, vv, lw=1.0, label=label)
    ax.set_xlabel(xlabel)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def decay(path, s, deviation, edges, bound, title=""):
    """|deviation| on a log scale with the window edges and the bound."""
    ss, dd = _decimate(np.asarray(s), np.abs(np.asarray(deviation)))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(ss, np.maximum(dd, 1e-300), lw=1.0)
    ax.axhline(bound, color="k", ls="--", lw=0.8, label=f"bound {bound:g}")
    for edge, color in zip(edges, ("gold", "tab:red")):
        if np.isfinite(edge):
            ax.axvline(edge, color=color, ls=":", lw=1.0)
    ax.set_xlabel("s")
    ax.set_ylabel("|deviation|")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def waterfall(path, s, t, field, title=""):
    """Stacked bending profiles over time (offset by row)."""
    field = np.asarray(field)
    n_show = min(len(t), 24)
    idx = np.linspace(0, len(t) - 1, n_show).astype(int)
    span = float(np.nanmax(field) - np.nanmin(field)) or 1.0
    fig, ax = plt.subplots(figsize=(7, 6))
    for rank, j in enumerate(idx):
        ss, vv = _decimate(np.asarray(s), field[j])
        ax.plot(ss, vv + 0.8 * span * rank, lw=0.8, color="tab:blue")
    ax.set_xlabel("s")
    ax.set_yticks([])
    ax.set_title(title or "profiles over time (bottom to top)")
    return _save(fig, path)
