"""Static SVG figures of coincidence curves and scans."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .measurement import CoincidenceHistogram  # noqa: E402

# fixed id salt and no timestamp keep the SVG bytes reproducible
_RC = {"svg.hashsalt": "transent", "svg.fonttype": "path", "font.size": 8}

_AXIS_LABEL = {
    ("rho", "minus"): r"$\rho_i - \rho_s$",
    ("rho", "plus"): r"$\rho_i + \rho_s$",
    ("q", "minus"): r"$q_i - q_s$",
    ("q", "plus"): r"$q_i + q_s$",
}


def _panel(ax, hist: CoincidenceHistogram):
    x = hist.bin_centers
    ax.plot(x, hist.counts, "o", ms=3, color="k")
    if hist.fit is not None:
        fine = np.linspace(x.min(), x.max(), 400)
        f = hist.fit
        ax.plot(fine, f.amplitude * np.exp(-((fine - f.center) ** 2) / (2 * f.variance)), "-", color="tab:red", lw=1)
        ax.set_title(f"{hist.label}: var = {f.variance:.4g} ± {f.variance_std_error:.2g}")
    else:
        ax.set_title(hist.label)
    ax.set_xlabel(_AXIS_LABEL[(hist.variable, hist.which)])
    ax.set_ylabel("coincidences")


def emit_plot(data, path, title=None, style=None):
    """Write an SVG of one or more histograms, or of a ``{"x", "y"}`` curve.

    Four histograms are laid out 2x2. ``style`` is an optional dict of
    matplotlib rc overrides. Identical inputs give identical bytes.
    """
    if isinstance(data, CoincidenceHistogram):
        data = [data]
    if isinstance(data, dict):
        if len(data.get("x", ())) == 0:
            raise ValueError("nothing to plot")
    elif not data:
        raise ValueError("nothing to plot")
    rc = dict(_RC, **(style or {}))
    with plt.rc_context(rc):
        if isinstance(data, dict):
            fig, ax = plt.subplots(figsize=(4.5, 3.2))
            ax.plot(data["x"], data["y"], "-", color="k", lw=1)
            if data.get("marker") is not None:
                ax.axvline(data["marker"], color="tab:red", ls="--", lw=1)
            ax.set_xlabel(data.get("xlabel", ""))
            ax.set_ylabel(data.get("ylabel", ""))
            if data.get("logy", True) and min(data["y"]) > 0:
                ax.set_yscale("log")
        else:
            n = len(data)
            cols = 2 if n > 1 else 1
            rows = math.ceil(n / cols)
            fig, axes = plt.subplots(rows, cols, figsize=(3.6 * cols, 2.8 * rows), squeeze=False)
            for ax, hist in zip(axes.flat, data):
                _panel(ax, hist)
            for ax in list(axes.flat)[n:]:
                ax.set_visible(False)
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path
