"""Rectangular subdomain partitions, structured subdomain meshes and the
interface skeleton with mortar/nonmortar side assignment."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .fem_core import gauss_lobatto_points

TOL = 1e-12


class GeometryError(ValueError):
    """Invalid partition, mesh or interface layout."""


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise GeometryError(f"rectangle {self} has non-positive area")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def edges(self) -> dict[str, tuple[int, float, float, float]]:
        """Edges as ``side -> (const_axis, const_value, lo, hi)``.

        ``const_axis`` 0 means x is constant along the edge (a vertical edge).
        """
        return {
            "left": (0, self.x0, self.y0, self.y1),
            "right": (0, self.x1, self.y0, self.y1),
            "bottom": (1, self.y0, self.x0, self.x1),
            "top": (1, self.y1, self.x0, self.x1),
        }


@dataclass(frozen=True)
class SharedEdge:
    """Full common edge of subdomains ``a < b``."""

    a: int
    b: int
    axis: int
    coord: float
    lo: float
    hi: float


@dataclass(frozen=True)
class Partition:
    subdomains: tuple[Rect, ...]
    interface_specs: tuple[SharedEdge, ...]
    name: str = "custom"

    @property
    def n_subdomains(self) -> int:
        return len(self.subdomains)

    @property
    def area(self) -> float:
        return float(sum(r.area for r in self.subdomains))

    def boundary_edges(self) -> list[tuple[int, float, float, float]]:
        """Subdomain edges (as in :meth:`Rect.edges`) lying on the domain boundary."""
        shared = set()
        for e in self.interface_specs:
            shared.add((e.a, e.axis, e.coord))
            shared.add((e.b, e.axis, e.coord))
        out = []
        for i, r in enumerate(self.subdomains):
            for axis, c, lo, hi in r.edges().values():
                if (i, axis, c) not in shared:
                    out.append((axis, c, lo, hi))
        return out

    def on_boundary(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Mask of points lying on the outer boundary of the domain."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        mask = np.zeros(x.shape, dtype=bool)
        for axis, c, lo, hi in self.boundary_edges():
            along, across = (y, x) if axis == 0 else (x, y)
            mask |= (np.abs(across - c) <= TOL) & (along >= lo - TOL) & (along <= hi + TOL)
        return mask


PRESETS: dict[str, list[tuple[float, float, float, float]]] = {
    # L-shaped domain [-1,1]^2 minus [0,1]^2
    "lshape": [(-1.0, 0.0, 0.0, 1.0), (-1.0, 0.0, -1.0, 0.0), (0.0, 1.0, -1.0, 0.0)],
    "unit-square-2x1": [(0.0, 0.5, 0.0, 1.0), (0.5, 1.0, 0.0, 1.0)],
    "unit-square": [(0.0, 1.0, 0.0, 1.0)],
    "unit-square-2x2": [
        (0.0, 0.5, 0.0, 0.5),
        (0.5, 1.0, 0.0, 0.5),
        (0.0, 0.5, 0.5, 1.0),
        (0.5, 1.0, 0.5, 1.0),
    ],
}


def _overlap_1d(a0, a1, b0, b1) -> float:
    return min(a1, b1) - max(a0, b0)


def build_partition(
    preset: Optional[str] = None,
    rectangles: Optional[Sequence[Union[Rect, Sequence[float]]]] = None,
) -> Partition:
    """Validated partition from a preset name or explicit ``(x0, x1, y0, y1)`` tuples.

    Raises :class:`GeometryError` on overlapping rectangles and on shared
    boundaries that are not a full edge of both neighbours.
    """
    if (preset is None) == (rectangles is None):
        raise GeometryError("give exactly one of preset or rectangles")
    if preset is not None:
        if preset not in PRESETS:
            raise GeometryError(f"unknown partition preset {preset!r}; known: {sorted(PRESETS)}")
        rectangles = PRESETS[preset]
    rects = tuple(r if isinstance(r, Rect) else Rect(*map(float, r)) for r in rectangles)
    if not rects:
        raise GeometryError("partition needs at least one subdomain")

    specs = []
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            ri, rj = rects[i], rects[j]
            ox = _overlap_1d(ri.x0, ri.x1, rj.x0, rj.x1)
            oy = _overlap_1d(ri.y0, ri.y1, rj.y0, rj.y1)
            if ox > TOL and oy > TOL:
                raise GeometryError(f"subdomains {i} and {j} overlap")
            if ox > TOL and abs(oy) <= TOL:
                # horizontal contact line
                coord = max(ri.y0, rj.y0)
                if abs(ri.x0 - rj.x0) > TOL or abs(ri.x1 - rj.x1) > TOL:
                    raise GeometryError(
                        f"subdomains {i} and {j} share a partial edge at y={coord}; "
                        "only geometrically conforming partitions are supported"
                    )
                specs.append(SharedEdge(i, j, 1, coord, ri.x0, ri.x1))
            elif oy > TOL and abs(ox) <= TOL:
                coord = max(ri.x0, rj.x0)
                if abs(ri.y0 - rj.y0) > TOL or abs(ri.y1 - rj.y1) > TOL:
                    raise GeometryError(
                        f"subdomains {i} and {j} share a partial edge at x={coord}; "
                        "only geometrically conforming partitions are supported"
                    )
                specs.append(SharedEdge(i, j, 0, coord, ri.y0, ri.y1))
    return Partition(rects, tuple(specs), name=preset or "custom")


@dataclass(frozen=True)
class SubdomainMesh:
    """Structured Q_k mesh of one rectangular subdomain.

    Node ``ix + (nx*k + 1) * iy`` sits at ``(xs[ix], ys[iy])``; the 1D node
    rows are Gauss-Lobatto points mapped into each cell.
    """

    subdomain_id: int
    rect: Rect
    nx: int
    ny: int
    degree: int
    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    cells: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.xs) * len(self.ys)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def hx(self) -> float:
        return (self.rect.x1 - self.rect.x0) / self.nx

    @property
    def hy(self) -> float:
        return (self.rect.y1 - self.rect.y0) / self.ny

    @property
    def h(self) -> float:
        return float(np.hypot(self.hx, self.hy))

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.xs, self.ys)
        return X.ravel(), Y.ravel()

    def cell_bounds(self) -> np.ndarray:
        """(n_cells, 4) array of ``x0, x1, y0, y1``; cell ``cx + nx*cy``."""
        xb = np.linspace(self.rect.x0, self.rect.x1, self.nx + 1)
        yb = np.linspace(self.rect.y0, self.rect.y1, self.ny + 1)
        cx, cy = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        cx, cy = cx.ravel(), cy.ravel()
        return np.column_stack([xb[cx], xb[cx + 1], yb[cy], yb[cy + 1]])

    def breakpoints(self, axis: int) -> np.ndarray:
        """Cell breakpoints along an edge where coordinate ``axis`` is constant."""
        if axis == 0:
            return np.linspace(self.rect.y0, self.rect.y1, self.ny + 1)
        return np.linspace(self.rect.x0, self.rect.x1, self.nx + 1)

    def edge_nodes(self, side: str) -> np.ndarray:
        """Node indices along an edge, ordered by increasing coordinate."""
        nxn, nyn = len(self.xs), len(self.ys)
        if side == "left":
            return np.arange(nyn) * nxn
        if side == "right":
            return np.arange(nyn) * nxn + nxn - 1
        if side == "bottom":
            return np.arange(nxn)
        if side == "top":
            return (nyn - 1) * nxn + np.arange(nxn)
        raise GeometryError(f"unknown side {side!r}")

    def side_of(self, axis: int, coord: float) -> str:
        r = self.rect
        if axis == 0:
            if abs(coord - r.x0) <= TOL:
                return "left"
            if abs(coord - r.x1) <= TOL:
                return "right"
        else:
            if abs(coord - r.y0) <= TOL:
                return "bottom"
            if abs(coord - r.y1) <= TOL:
                return "top"
        raise GeometryError(f"subdomain {self.subdomain_id} has no edge at axis={axis}, coord={coord}")


def _node_row(a: float, b: float, n: int, degree: int) -> np.ndarray:
    ref = gauss_lobatto_points(degree)
    bps = np.linspace(a, b, n + 1)
    row = [bps[0]]
    for c in range(n):
        left, right = bps[c], bps[c + 1]
        inner = left + 0.5 * (right - left) * (ref[1:] + 1.0)
        inner[-1] = right
        row.extend(inner)
    return np.array(row)


def build_subdomain_mesh(partition: Partition, subdomain_id: int, nx: int, ny: int, degree: int) -> SubdomainMesh:
    """Tensor-product mesh with ``(nx*degree + 1) * (ny*degree + 1)`` nodes."""
    if nx < 1 or ny < 1:
        raise GeometryError(f"cell counts must be positive, got nx={nx}, ny={ny}")
    if degree < 1:
        raise GeometryError(f"polynomial degree must be >= 1, got {degree}")
    rect = partition.subdomains[subdomain_id]
    xs = _node_row(rect.x0, rect.x1, nx, degree)
    ys = _node_row(rect.y0, rect.y1, ny, degree)
    nxn = nx * degree + 1
    loc = np.arange(degree + 1)
    li, lj = np.meshgrid(loc, loc)
    li, lj = li.ravel(), lj.ravel()
    cx, cy = np.meshgrid(np.arange(nx), np.arange(ny))
    cx, cy = cx.ravel(), cy.ravel()
    cells = (cy[:, None] * degree + lj[None, :]) * nxn + cx[:, None] * degree + li[None, :]
    for arr in (xs, ys, cells):
        arr.flags.writeable = False
    return SubdomainMesh(subdomain_id, rect, int(nx), int(ny), int(degree), xs, ys, cells)


@dataclass(frozen=True)
class InterfaceSegment:
    gamma_id: int
    mortar_side: int
    nonmortar_side: int
    axis: int
    coord: float
    extent: tuple[float, float]
    mortar_trace_mesh: np.ndarray = field(repr=False)
    nonmortar_trace_mesh: np.ndarray = field(repr=False)

    @property
    def length(self) -> float:
        return self.extent[1] - self.extent[0]

    def points(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map the along-interface coordinate to (x, y)."""
        s = np.asarray(s, dtype=float)
        c = np.full_like(s, self.coord)
        return (c, s) if self.axis == 0 else (s, c)


MortarRule = Union[None, Mapping[int, int], Callable[[SharedEdge, SubdomainMesh, SubdomainMesh], int]]


def _default_mortar(edge: SharedEdge, ma: SubdomainMesh, mb: SubdomainMesh) -> int:
    na = len(ma.breakpoints(edge.axis)) - 1
    nb = len(mb.breakpoints(edge.axis)) - 1
    if na != nb:
        return edge.a if na < nb else edge.b
    return min(edge.a, edge.b)


def extract_interfaces(
    partition: Partition, meshes: Sequence[SubdomainMesh], mortar_rule: MortarRule = None
) -> list[InterfaceSegment]:
    """Interface segments with inherited trace meshes.

    By default the side with the coarser trace is mortar (ties go to the lower
    subdomain index). ``mortar_rule`` may map ``gamma_id -> mortar subdomain``
    or be a callable ``(edge, mesh_a, mesh_b) -> mortar subdomain``.
    """
    if len(meshes) != partition.n_subdomains:
        raise GeometryError(f"expected {partition.n_subdomains} meshes, got {len(meshes)}")
    out = []
    for g, edge in enumerate(partition.interface_specs):
        ma, mb = meshes[edge.a], meshes[edge.b]
        if callable(mortar_rule):
            mortar = mortar_rule(edge, ma, mb)
        elif mortar_rule is not None and g in mortar_rule:
            mortar = int(mortar_rule[g])
        else:
            mortar = _default_mortar(edge, ma, mb)
        if mortar not in (edge.a, edge.b):
            raise GeometryError(f"interface {g}: mortar side {mortar} is not one of {edge.a}, {edge.b}")
        nonmortar = edge.b if mortar == edge.a else edge.a
        m_bp = meshes[mortar].breakpoints(edge.axis).copy()
        nm_bp = meshes[nonmortar].breakpoints(edge.axis).copy()
        if len(nm_bp) - 1 < 2:
            raise GeometryError(
                f"interface {g}: nonmortar side (subdomain {nonmortar}) has "
                f"{len(nm_bp) - 1} trace subinterval(s); at least 2 are required"
            )
        m_bp.flags.writeable = False
        nm_bp.flags.writeable = False
        out.append(
            InterfaceSegment(g, mortar, nonmortar, edge.axis, edge.coord, (edge.lo, edge.hi), m_bp, nm_bp)
        )
    return out
