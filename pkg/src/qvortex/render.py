"""SVG rendering of principal-direction fields.

Directions are axial (defined mod pi), so every regular site gets a
headless segment centred on the site.  Vortices are filled circles and
boundary sites with a known compression angle get a short grey tick.
All coordinates go through ``_num`` so the output is byte-stable.
"""

from __future__ import annotations

import math

from .fieldio import VorticityField
from .lattice import LatticeSpec, boundary_angles, build_lattice
from .vortex_analysis import default_epsilon

CELL = 40.0
MARGIN = 30.0
MAX_HALF = 0.42 * CELL
TICK_HALF = 0.25 * CELL
DOT_R = 4.0


def _num(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def render_svg(vf: VorticityField, thetas: dict | None = None, eps: float | None = None, title: str = "") -> str:
    """Return the SVG document for ``vf``.

    ``thetas`` maps boundary sites to compression angles; ``eps`` is the
    vortex threshold (relative default when omitted).
    """
    thetas = thetas or {}
    eps = default_epsilon(vf) if eps is None else eps
    if not vf.sites:
        xs = ys = [0]
    else:
        xs = [s[0] for s in vf.sites]
        ys = [s[1] for s in vf.sites]
    x0, y1 = min(xs), max(ys)
    width = 2 * MARGIN + CELL * (max(xs) - x0)
    height = 2 * MARGIN + CELL * (y1 - min(ys))

    def px(site):
        # lattice y grows upward, SVG y grows downward
        return MARGIN + CELL * (site[0] - x0), MARGIN + CELL * (y1 - site[1])

    norms = vf.norms
    gaps = vf.eigengaps
    angles = vf.principal_angles
    regular = norms > eps
    top = float(gaps[regular].max()) if regular.any() else 0.0

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
    ]
    if title:
        esc = title.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
        out.append(f"<title>{esc}</title>")
    out.append('<rect width="100%" height="100%" fill="white"/>')

    ticks = ['<g id="boundary-ticks" stroke="#999999" stroke-width="1">']
    for s in vf.sites:
        if s in thetas:
            cx, cy = px(s)
            th = thetas[s]
            dx, dy = TICK_HALF * math.cos(th), -TICK_HALF * math.sin(th)
            ticks.append(
                f'<line x1="{_num(cx - dx)}" y1="{_num(cy - dy)}" x2="{_num(cx + dx)}" y2="{_num(cy + dy)}"/>'
            )
    ticks.append("</g>")
    out.extend(ticks)

    segs = ['<g id="directions" stroke="black" stroke-width="2" stroke-linecap="round">']
    dots = ['<g id="vortices" fill="#cc0000">']
    for i, s in enumerate(vf.sites):
        cx, cy = px(s)
        if not regular[i]:
            dots.append(f'<circle cx="{_num(cx)}" cy="{_num(cy)}" r="{_num(DOT_R)}"/>')
            continue
        half = MAX_HALF * float(gaps[i]) / top if top > 0 else 0.0
        a = float(angles[i])
        dx, dy = half * math.cos(a), -half * math.sin(a)
        segs.append(f'<line x1="{_num(cx - dx)}" y1="{_num(cy - dy)}" x2="{_num(cx + dx)}" y2="{_num(cy + dy)}"/>')
    segs.append("</g>")
    dots.append("</g>")
    out.extend(segs)
    out.extend(dots)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def field_thetas(vf: VorticityField) -> dict:
    """Compression angles for boundary rows, rebuilt from field metadata."""
    meta = vf.meta
    lat = meta.get("lattice")
    if not lat or "d" not in meta or "phi" not in meta:
        return {}
    lattice = build_lattice(LatticeSpec(lat["width"], lat["height"], lat["layers"]))
    angles = boundary_angles(lattice, meta["d"], meta["phi"])
    return {s: angles[s] for s, role in zip(vf.sites, vf.roles) if role == "boundary"}


__all__ = ["render_svg", "field_thetas", "CELL"]
