"""Rectangular lattice geometry with compressed boundary layers.

Sites are integer pairs ``(x, y)`` with ``0 <= x < width`` and
``0 <= y < height``; ``y`` points north.  Sites are stored in row-major
order (``y`` outer, ``x`` inner).  That order is the tensor-factor order
used by every engine and the row order of every file written.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator

INTERIOR = "interior"
BOUNDARY = "boundary"

Site = tuple[int, int]


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    total_width: int
    total_height: int
    boundary_layers: int = 0

    def __post_init__(self):
        if self.boundary_layers < 0:
            raise LatticeError("boundary_layers must be >= 0")
        if self.interior_width < 1 or self.interior_height < 1:
            raise LatticeError(
                f"empty interior: {self.total_width}x{self.total_height} "
                f"with {self.boundary_layers} boundary layers"
            )

    @property
    def interior_width(self) -> int:
        return self.total_width - 2 * self.boundary_layers

    @property
    def interior_height(self) -> int:
        return self.total_height - 2 * self.boundary_layers


@dataclass(frozen=True)
class Lattice:
    spec: LatticeSpec
    sites: tuple[Site, ...]
    roles: tuple[str, ...]
    nn_pairs: tuple[tuple[int, int], ...]
    center: tuple[float, float]
    _index: dict = field(repr=False, compare=False, default_factory=dict)

    def index(self, site: Site) -> int:
        try:
            return self._index[tuple(site)]
        except KeyError:
            raise LatticeError(f"site {site} is not on the lattice") from None

    def role(self, site: Site) -> str:
        return self.roles[self.index(site)]

    def is_boundary(self, site: Site) -> bool:
        return self.role(site) == BOUNDARY

    @property
    def interior_sites(self) -> list[Site]:
        return [s for s, r in zip(self.sites, self.roles) if r == INTERIOR]

    @property
    def boundary_sites(self) -> list[Site]:
        return [s for s, r in zip(self.sites, self.roles) if r == BOUNDARY]

    def neighbors(self, site: Site) -> Iterator[Site]:
        x, y = site
        for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nb in self._index:
                yield nb

    def degree(self, site: Site) -> int:
        return sum(1 for _ in self.neighbors(site))

    def to_json(self, angles: "BoundaryAngles | None" = None) -> str:
        doc = {
            "spec": {
                "total_width": self.spec.total_width,
                "total_height": self.spec.total_height,
                "boundary_layers": self.spec.boundary_layers,
            },
            "sites": [
                {"x": x, "y": y, "role": r} for (x, y), r in zip(self.sites, self.roles)
            ],
        }
        if angles is not None:
            doc["boundary_angles"] = {
                "d": float(repr_float(angles.d)),
                "phi": float(repr_float(angles.phi)),
                "theta": [
                    {"x": x, "y": y, "theta": float(repr_float(t))}
                    for (x, y), t in angles.theta.items()
                ],
            }
        return json.dumps(doc, indent=1)


def repr_float(v: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(v), ".17g")


def build_lattice(spec: LatticeSpec) -> Lattice:
    w, h, layers = spec.total_width, spec.total_height, spec.boundary_layers
    sites = tuple((x, y) for y in range(h) for x in range(w))
    index = {s: i for i, s in enumerate(sites)}

    def edge_distance(x, y):
        return min(x, y, w - 1 - x, h - 1 - y)

    roles = tuple(BOUNDARY if edge_distance(x, y) < layers else INTERIOR for x, y in sites)
    pairs = []
    for i, (x, y) in enumerate(sites):
        if x + 1 < w:
            pairs.append((i, index[(x + 1, y)]))
        if y + 1 < h:
            pairs.append((i, index[(x, y + 1)]))
    center = ((w - 1) / 2.0, (h - 1) / 2.0)
    return Lattice(spec, sites, roles, tuple(pairs), center, index)


def polar_angle(lattice: Lattice, site: Site) -> float:
    """Angle of ``site - center`` in (-pi, pi]."""
    dx = site[0] - lattice.center[0] + 0.0
    dy = site[1] - lattice.center[1] + 0.0
    if dx == 0 and dy == 0:
        raise LatticeError(f"site {site} is the lattice center; polar angle undefined")
    ang = math.atan2(dy, dx)
    if ang == -math.pi:
        ang = math.pi
    return ang


@dataclass(frozen=True)
class BoundaryAngles:
    theta: dict  # boundary site -> radians, row-major insertion order
    d: float
    phi: float

    def __getitem__(self, site: Site) -> float:
        return self.theta[tuple(site)]


def boundary_angles(lattice: Lattice, d: float, phi: float) -> BoundaryAngles:
    """theta_j = d * omega_j + phi with omega_j the polar angle of j."""
    theta = {s: d * polar_angle(lattice, s) + phi for s in lattice.boundary_sites}
    return BoundaryAngles(theta, float(d), float(phi))


def ring_contour(lattice: Lattice, depth: int) -> list[Site]:
    """Counter-clockwise rectangular ring of interior sites at ``depth``.

    Depth 1 is the outermost interior ring (adjacent to the boundary
    layers).  The ring starts at its south-west corner and runs east
    first.  The returned list does not repeat its first site.
    """
    if depth < 1:
        raise LatticeError("depth must be >= 1")
    spec = lattice.spec
    off = spec.boundary_layers + depth - 1
    x0, x1 = off, spec.total_width - 1 - off
    y0, y1 = off, spec.total_height - 1 - off
    if x1 - x0 < 1 or y1 - y0 < 1:
        raise LatticeError(
            f"depth {depth} ring is degenerate for a "
            f"{spec.interior_width}x{spec.interior_height} interior"
        )
    ring = [(x, y0) for x in range(x0, x1 + 1)]
    ring += [(x1, y) for y in range(y0 + 1, y1 + 1)]
    ring += [(x, y1) for x in range(x1 - 1, x0 - 1, -1)]
    ring += [(x0, y) for y in range(y1 - 1, y0, -1)]
    return ring
