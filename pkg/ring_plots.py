#!/usr/bin/env python3
"""
SVG figures rendered from scan and sweep records.

The figures are conveniences; the CSV/JSON records stay the reference
output. Rendering uses the Agg backend with a fixed SVG hash salt and no date
metadata so identical records give identical files.
"""

import logging
from typing import Dict, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ring_scan import PhaseDiagram  # noqa: E402

logger = logging.getLogger(__name__)

SVG_HASH_SALT = "polariton-ring"


def _save(figure, path: str) -> None:
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        figure.savefig(path, format="svg", metadata={"Date": None})
    plt.close(figure)
    logger.info("wrote %s", path)


def render_heatmap_svg(
    diagram: PhaseDiagram,
    path: str,
    field: str = "var",
    contour_ratio: Optional[float] = None,
    title: str = "",
) -> None:
    """
    Heatmap of one record field over (Δ, Δc).

    field="ratio" is drawn as log10(κ/U_eff). With `contour_ratio` set, the
    κ/U_eff = contour_ratio line is drawn on top.
    """
    deltas = np.array(diagram.grid.delta_values)
    delta_cs = np.array(diagram.grid.delta_c_values)
    values = diagram.as_array(field)
    label = "var(N_i)"
    if field == "ratio":
        values = np.log10(values)
        label = "log10(κ/U_eff)"

    figure, axes = plt.subplots(figsize=(6.0, 4.5))
    mesh = axes.pcolormesh(deltas, delta_cs, values, shading="nearest", cmap="viridis")
    figure.colorbar(mesh, ax=axes, label=label)
    if contour_ratio is not None and deltas.size > 1 and delta_cs.size > 1:
        ratios = diagram.as_array("ratio")
        lines = axes.contour(deltas, delta_cs, ratios, levels=[contour_ratio], colors="white", linewidths=1.2)
        axes.clabel(lines, fmt=f"κ/U_eff={contour_ratio:g}", fontsize=8)
    axes.set_xlabel("Δ / g")
    axes.set_ylabel("Δc / g")
    axes.set_title(title or f"{label}, {diagram.grid.n_sites} sites ({diagram.grid.model.value})")
    _save(figure, path)


def render_curves_svg(
    curves: Dict[str, Tuple[Sequence[float], Sequence[float]]],
    path: str,
    xlabel: str,
    ylabel: str,
    title: str = "",
) -> None:
    """Line plot with one labeled curve per entry of `curves`."""
    figure, axes = plt.subplots(figsize=(6.0, 4.0))
    for label, (xs, ys) in curves.items():
        axes.plot(xs, ys, marker="o", markersize=3, label=label)
    axes.set_xlabel(xlabel)
    axes.set_ylabel(ylabel)
    if title:
        axes.set_title(title)
    axes.legend()
    axes.grid(alpha=0.3)
    _save(figure, path)


__all__ = ["render_heatmap_svg", "render_curves_svg"]
