"""Mortar coupling on a single interface.

Trace spaces, the multiplier space with reduced degree on the two end
subintervals, the moment-matching mortar projection and the master/slave
coupling map that realises weak continuity by elimination.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .fem_core import gauss_legendre, gauss_lobatto_points, lagrange_basis
from .geometry import TOL, GeometryError, InterfaceSegment, SubdomainMesh


class SingularMortarSystem(np.linalg.LinAlgError):
    pass


def multiplier_dim(n_intervals: int, k: int) -> int:
    """Dimension of the multiplier space on ``n_intervals`` subintervals."""
    if k < 1:
        raise ValueError(f"degree must be >= 1, got {k}")
    if n_intervals < 2:
        raise ValueError(
            f"multiplier space on {n_intervals} subinterval(s) has dimension {k} but the "
            f"interior trace space only {n_intervals * k - 1}; need at least 2 subintervals"
        )
    return k * n_intervals - 1


def _locate(breakpoints: np.ndarray, x: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(breakpoints, x, side="right") - 1
    return np.clip(idx, 0, len(breakpoints) - 2)


@dataclass(frozen=True)
class TraceSpace:
    """Continuous piecewise Q_k traces on a 1D mesh, nodal (Gauss-Lobatto) basis.

    Basis ``j`` is attached to node ``j`` in increasing coordinate order,
    matching :meth:`SubdomainMesh.edge_nodes`.
    """

    breakpoints: np.ndarray
    degree: int
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        ref = gauss_lobatto_points(self.degree)
        nodes = [bp[0]]
        for a, b in zip(bp[:-1], bp[1:]):
            inner = a + 0.5 * (b - a) * (ref[1:] + 1.0)
            inner[-1] = b
            nodes.extend(inner)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "nodes", np.array(nodes))

    @property
    def n_intervals(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def dim(self) -> int:
        return self.degree * self.n_intervals + 1

    def eval(self, x: np.ndarray) -> np.ndarray:
        """Basis values, shape ``(dim, len(x))``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = self.degree
        out = np.zeros((self.dim, len(x)))
        cell = _locate(self.breakpoints, x)
        for c in np.unique(cell):
            sel = cell == c
            loc = self.nodes[c * k : c * k + k + 1]
            out[c * k : c * k + k + 1, sel] = lagrange_basis(loc, x[sel])[0]
        return out

    def interior(self) -> slice:
        return slice(1, self.dim - 1)


@dataclass(frozen=True)
class MultiplierSpace:
    """Continuous piecewise polynomials, degree k inside and k-1 on the end subintervals.

    Basis function ``j`` is attached to interior trace node ``j + 1``. On an
    end subinterval it is the degree-(k-1) Lagrange polynomial on the k
    nodes of that subinterval that are not the interface endpoint.
    """

    trace: TraceSpace

    def __post_init__(self):
        multiplier_dim(self.trace.n_intervals, self.trace.degree)

    @property
    def degree(self) -> int:
        return self.trace.degree

    @property
    def dim(self) -> int:
        return multiplier_dim(self.trace.n_intervals, self.trace.degree)

    def eval(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = self.degree
        last = self.trace.n_intervals - 1
        nodes = self.trace.nodes
        out = np.zeros((self.dim, len(x)))
        cell = _locate(self.trace.breakpoints, x)
        for c in np.unique(cell):
            sel = cell == c
            glob = np.arange(c * k, c * k + k + 1)
            if c == 0:
                glob = glob[1:]
            if c == last:
                glob = glob[:-1]
            out[np.ix_(glob - 1, np.flatnonzero(sel))] = lagrange_basis(nodes[glob], x[sel])[0]
        return out


def merge_breakpoints(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(abs(a[-1] - a[0]), 1.0)
    if abs(a[0] - b[0]) > TOL * scale or abs(a[-1] - b[-1]) > TOL * scale:
        raise GeometryError(f"trace meshes span different intervals: [{a[0]}, {a[-1]}] vs [{b[0]}, {b[-1]}]")
    merged = np.sort(np.concatenate([a, b]))
    keep = np.concatenate(([True], np.diff(merged) > TOL * scale))
    merged = merged[keep]
    merged[0], merged[-1] = a[0], a[-1]
    return merged


def interface_quadrature(mesh_a: np.ndarray, mesh_b: np.ndarray, order: int):
    """Composite Gauss rule on the union of two breakpoint sets.

    Returns ``(points, weights, merged_breakpoints)``; exact for piecewise
    polynomials of degree ``2*order - 1`` on the merged mesh.
    """
    merged = merge_breakpoints(mesh_a, mesh_b)
    rule = gauss_legendre(order)
    a, b = merged[:-1, None], merged[1:, None]
    pts = (a + 0.5 * (b - a) * (rule.points[None, :] + 1.0)).ravel()
    wts = (0.5 * (b - a) * rule.weights[None, :]).ravel()
    return pts, wts, merged


def _moment_matrix(nonmortar: TraceSpace, other_mesh: np.ndarray, order: int):
    mult = MultiplierSpace(nonmortar)
    pts, wts, _ = interface_quadrature(nonmortar.breakpoints, other_mesh, order)
    chi = mult.eval(pts)
    phi = nonmortar.eval(pts)
    D = (chi * wts) @ phi[nonmortar.interior()].T
    return mult, pts, wts, chi, D


def _lu(D: np.ndarray):
    try:
        lu = sla.lu_factor(D, check_finite=True)
    except (ValueError, sla.LinAlgError) as exc:
        raise SingularMortarSystem(str(exc)) from exc
    if np.min(np.abs(np.diag(lu[0]))) <= 1e-14 * max(np.max(np.abs(D)), 1e-300):
        raise SingularMortarSystem("mortar moment matrix is singular")
    return lu


def mortar_project(nonmortar: TraceSpace, v: Callable[[np.ndarray], np.ndarray], order: int | None = None) -> np.ndarray:
    """Coefficients (interior trace nodes) of the mortar projection of ``v``.

    ``v`` is evaluated on the along-interface coordinate. It is integrated on
    the nonmortar mesh refined by ``order`` Gauss points per subinterval.
    """
    if order is None:
        order = nonmortar.degree + 4
    mult, pts, wts, chi, D = _moment_matrix(nonmortar, nonmortar.breakpoints, order)
    rhs = (chi * wts) @ np.asarray(v(pts), dtype=float)
    return sla.lu_solve(_lu(D), rhs)


def mortar_project_piecewise(nonmortar: TraceSpace, source: TraceSpace, coeffs: np.ndarray) -> np.ndarray:
    """Mortar projection of a trace given by nodal coefficients on another mesh."""
    order = max(nonmortar.degree, source.degree) + 2
    mult, pts, wts, chi, D = _moment_matrix(nonmortar, source.breakpoints, order)
    rhs = (chi * wts) @ (np.asarray(coeffs) @ source.eval(pts))
    return sla.lu_solve(_lu(D), rhs)


@dataclass(frozen=True)
class CouplingMap:
    """Slave = coeffs @ masters on one interface.

    Node ids are local to the owning subdomain mesh. Master ordering is all
    mortar trace nodes followed by the two nonmortar endpoint nodes.
    """

    gamma_id: int
    mortar_side: int
    nonmortar_side: int
    slave_nodes: np.ndarray
    mortar_nodes: np.ndarray
    endpoint_nodes: np.ndarray
    coeffs: np.ndarray = field(repr=False)
    # moment matrices kept for residual checks
    D: np.ndarray = field(repr=False)
    B_M: np.ndarray = field(repr=False)
    B_E: np.ndarray = field(repr=False)

    @property
    def n_slaves(self) -> int:
        return len(self.slave_nodes)

    @property
    def n_masters(self) -> int:
        return len(self.mortar_nodes) + len(self.endpoint_nodes)

    def slaves_from(self, mortar_values: np.ndarray, endpoint_values: np.ndarray) -> np.ndarray:
        return self.coeffs @ np.concatenate([mortar_values, endpoint_values])

    def constraint_residual(self, mortar_values, slave_values, endpoint_values) -> np.ndarray:
        """Moments of the jump against every multiplier basis function."""
        return self.B_M @ mortar_values - self.D @ slave_values - self.B_E @ endpoint_values


def trace_spaces(interface: InterfaceSegment, mortar_mesh: SubdomainMesh, nonmortar_mesh: SubdomainMesh):
    return (
        TraceSpace(interface.mortar_trace_mesh, mortar_mesh.degree),
        TraceSpace(interface.nonmortar_trace_mesh, nonmortar_mesh.degree),
    )


def build_coupling(interface: InterfaceSegment, mortar_mesh: SubdomainMesh, nonmortar_mesh: SubdomainMesh) -> CouplingMap:
    """Coefficient matrix ``D^-1 [B_M | -B_E]`` expressing slaves through masters."""
    if mortar_mesh.subdomain_id != interface.mortar_side or nonmortar_mesh.subdomain_id != interface.nonmortar_side:
        raise GeometryError(f"interface {interface.gamma_id}: meshes do not match the mortar/nonmortar sides")
    wm, wn = trace_spaces(interface, mortar_mesh, nonmortar_mesh)
    # exact for chi * phi on either side
    order = max(wm.degree, wn.degree) + 2
    mult = MultiplierSpace(wn)
    pts, wts, _ = interface_quadrature(wm.breakpoints, wn.breakpoints, order)
    chi = mult.eval(pts) * wts
    phi_n = wn.eval(pts)
    D = chi @ phi_n[wn.interior()].T
    B_M = chi @ wm.eval(pts).T
    B_E = chi @ phi_n[[0, -1]].T
    lu = _lu(D)
    coeffs = sla.lu_solve(lu, np.hstack([B_M, -B_E]))

    m_nodes = mortar_mesh.edge_nodes(mortar_mesh.side_of(interface.axis, interface.coord))
    n_nodes = nonmortar_mesh.edge_nodes(nonmortar_mesh.side_of(interface.axis, interface.coord))
    return CouplingMap(
        gamma_id=interface.gamma_id,
        mortar_side=interface.mortar_side,
        nonmortar_side=interface.nonmortar_side,
        slave_nodes=n_nodes[1:-1].copy(),
        mortar_nodes=m_nodes.copy(),
        endpoint_nodes=n_nodes[[0, -1]].copy(),
        coeffs=coeffs,
        D=D,
        B_M=B_M,
        B_E=B_E,
    )
