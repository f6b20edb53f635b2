"""Standalone SVG phase maps: grayscale P_s cells with the d* polyline on top."""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .grid import SuccessGrid, ThresholdCurve

CELL = 14
MARGIN_L, MARGIN_B, MARGIN_T, MARGIN_R = 70, 40, 24, 16


def render_phase_svg(grid: SuccessGrid, curve: ThresholdCurve | None = None,
                     title: str = "") -> str:
    """Success-probability map for one burn-in time.

    Columns are training dimensions, rows thresholds (first threshold at the
    bottom). Black means every run succeeded, white that none did.
    """
    t = curve.t if curve is not None else grid.ts[0]
    p = grid.p_success[grid.ts.index(t)]  # (dims, thresholds)
    nd, nth = len(grid.dims), len(grid.thresholds)
    width = MARGIN_L + nd * CELL + MARGIN_R
    height = MARGIN_T + nth * CELL + MARGIN_B
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1",
                     width=str(width), height=str(height),
                     viewBox=f"0 0 {width} {height}")
    if title:
        ET.SubElement(svg, "title").text = title
    cells = ET.SubElement(svg, "g", id="cells")
    for j in range(nd):
        for k in range(nth):
            prob = p[j, k]
            level = 255 if np.isnan(prob) else int(round(255 * (1.0 - prob)))
            ET.SubElement(cells, "rect", x=str(MARGIN_L + j * CELL),
                          y=str(MARGIN_T + (nth - 1 - k) * CELL), width=str(CELL),
                          height=str(CELL), fill=f"rgb({level},{level},{level})")
    axes = ET.SubElement(svg, "g", id="axes", fill="black")
    axes.set("font-size", "9")
    axes.set("font-family", "sans-serif")
    step_d = max(1, nd // 10)
    for j in range(0, nd, step_d):
        lab = ET.SubElement(axes, "text", x=str(MARGIN_L + j * CELL + 2),
                            y=str(MARGIN_T + nth * CELL + 12))
        lab.text = str(grid.dims[j])
    step_k = max(1, nth // 10)
    for k in range(0, nth, step_k):
        lab = ET.SubElement(axes, "text", x="4",
                            y=str(MARGIN_T + (nth - 1 - k) * CELL + 10))
        lab.text = f"{grid.thresholds[k]:.3g}"
    xl = ET.SubElement(axes, "text", x=str(MARGIN_L), y=str(height - 8))
    xl.text = f"training dimension d (t={t})"
    yl = ET.SubElement(axes, "text", x="4", y="14")
    yl.text = grid.metric
    if curve is not None:
        pts = []
        for k, ds in enumerate(curve.d_star):
            if ds is None or ds not in grid.dims:
                continue
            j = grid.dims.index(ds)
            pts.append(f"{MARGIN_L + j * CELL + CELL / 2:g},"
                       f"{MARGIN_T + (nth - 1 - k) * CELL + CELL / 2:g}")
        if pts:
            ET.SubElement(svg, "polyline", id="threshold", points=" ".join(pts),
                          fill="none", stroke="#d62728")
    return ET.tostring(svg, encoding="unicode", xml_declaration=False)
