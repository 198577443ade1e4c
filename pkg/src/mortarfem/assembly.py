"""Global DOF numbering, block assembly over subdomains and reduction to the
constrained (mortar) space through a master/slave prolongation."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .fem_core import gauss_legendre, lagrange_basis, local_matrices, reference_element
from .geometry import (
    InterfaceSegment,
    MortarRule,
    Partition,
    SubdomainMesh,
    build_subdomain_mesh,
    extract_interfaces,
)
from .mortar import CouplingMap, TraceSpace, build_coupling, interface_quadrature

Coefficient = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]
ScalarField = Callable[..., np.ndarray]


class DofClass(IntEnum):
    INTERIOR = 0
    DIRICHLET = 1
    MASTER = 2
    SLAVE = 3


def _pick(obj, i):
    """Per-subdomain entry of a sequence, or the object itself."""
    if isinstance(obj, (list, tuple)):
        return obj[i]
    return obj


@dataclass(frozen=True)
class DofMap:
    offsets: np.ndarray
    classes: np.ndarray
    reduced_index: np.ndarray = field(repr=False)

    @property
    def n_total(self) -> int:
        return len(self.classes)

    @property
    def n_reduced(self) -> int:
        return int(np.count_nonzero(self.reduced_index >= 0))

    def global_ids(self, subdomain: int, local: np.ndarray) -> np.ndarray:
        return self.offsets[subdomain] + np.asarray(local)

    def block(self, subdomain: int) -> slice:
        return slice(int(self.offsets[subdomain]), int(self.offsets[subdomain + 1]))


def build_dofmap(partition: Partition, meshes: Sequence[SubdomainMesh], couplings: Sequence[CouplingMap]) -> DofMap:
    offsets = np.concatenate(([0], np.cumsum([m.n_nodes for m in meshes]))).astype(np.int64)
    classes = np.full(offsets[-1], DofClass.INTERIOR, dtype=np.int8)
    for i, m in enumerate(meshes):
        X, Y = m.coordinates()
        classes[offsets[i] : offsets[i + 1]][partition.on_boundary(X, Y)] = DofClass.DIRICHLET
    for c in couplings:
        masters = np.concatenate(
            [offsets[c.mortar_side] + c.mortar_nodes, offsets[c.nonmortar_side] + c.endpoint_nodes]
        )
        masters = masters[classes[masters] != DofClass.DIRICHLET]
        classes[masters] = DofClass.MASTER
    for c in couplings:
        slaves = offsets[c.nonmortar_side] + c.slave_nodes
        if np.any(classes[slaves] == DofClass.DIRICHLET):
            raise ValueError(f"interface {c.gamma_id}: slave node on the Dirichlet boundary")
        classes[slaves] = DofClass.SLAVE
    for c in couplings:
        masters = np.concatenate(
            [offsets[c.mortar_side] + c.mortar_nodes, offsets[c.nonmortar_side] + c.endpoint_nodes]
        )
        if np.any(classes[masters] == DofClass.SLAVE):
            raise ValueError(f"interface {c.gamma_id}: a master node is also a slave of another interface")
    free = (classes != DofClass.DIRICHLET) & (classes != DofClass.SLAVE)
    reduced = np.full(len(classes), -1, dtype=np.int64)
    reduced[free] = np.arange(np.count_nonzero(free))
    return DofMap(offsets, classes, reduced)


def build_prolongation(dofmap: DofMap, couplings: Sequence[CouplingMap]) -> sp.csr_matrix:
    """Sparse P with full = P @ reduced; slaves follow the coupling, Dirichlet rows vanish."""
    red = dofmap.reduced_index
    free = np.flatnonzero(red >= 0)
    rows = [free]
    cols = [red[free]]
    vals = [np.ones(len(free))]
    off = dofmap.offsets
    for c in couplings:
        slaves = off[c.nonmortar_side] + c.slave_nodes
        masters = np.concatenate([off[c.mortar_side] + c.mortar_nodes, off[c.nonmortar_side] + c.endpoint_nodes])
        keep = red[masters] >= 0
        S, Mi = np.meshgrid(slaves, np.flatnonzero(keep), indexing="ij")
        rows.append(S.ravel())
        cols.append(red[masters[Mi.ravel()]])
        vals.append(c.coeffs[:, keep].ravel())
    P = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dofmap.n_total, dofmap.n_reduced),
    )
    return P.tocsr()


def _local_blocks(mesh: SubdomainMesh, alpha: Coefficient):
    el = reference_element(mesh.degree)
    bounds = mesh.cell_bounds()
    if callable(alpha):
        mats = [local_matrices(el, b, alpha) for b in bounds]
        return np.stack([m for m, _ in mats]), np.stack([a for _, a in mats])
    mass, stiff = local_matrices(el, bounds[0], alpha)
    nc = mesh.n_cells
    return np.broadcast_to(mass, (nc,) + mass.shape), np.broadcast_to(stiff, (nc,) + stiff.shape)


def _scatter(mesh: SubdomainMesh, blocks: np.ndarray, offset: int, n: int) -> sp.csr_matrix:
    cells = mesh.cells + offset
    nl = cells.shape[1]
    rows = np.repeat(cells, nl, axis=1).ravel()
    cols = np.tile(cells, (1, nl)).ravel()
    return sp.coo_matrix((np.ascontiguousarray(blocks).ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_unconstrained(meshes: Sequence[SubdomainMesh], alphas: Sequence[Coefficient]):
    """Block-diagonal (M_full, A_full) over all subdomains, no coupling applied."""
    if len(alphas) != len(meshes):
        raise ValueError(f"need one alpha per subdomain: {len(alphas)} given for {len(meshes)}")
    offsets = np.concatenate(([0], np.cumsum([m.n_nodes for m in meshes])))
    n = int(offsets[-1])
    M = sp.csr_matrix((n, n))
    A = sp.csr_matrix((n, n))
    for i, m in enumerate(meshes):
        mb, ab = _local_blocks(m, alphas[i])
        M = M + _scatter(m, mb, int(offsets[i]), n)
        A = A + _scatter(m, ab, int(offsets[i]), n)
    # exact symmetry
    M = ((M + M.T) * 0.5).tocsr()
    A = ((A + A.T) * 0.5).tocsr()
    M.eliminate_zeros()
    A.eliminate_zeros()
    return M, A


def reduce(obj, P: sp.spmatrix):
    """``P^T K P`` for a matrix, ``P^T b`` for a vector."""
    if sp.issparse(obj) or (isinstance(obj, np.ndarray) and obj.ndim == 2):
        if obj.shape != (P.shape[0], P.shape[0]):
            raise ValueError(f"matrix shape {obj.shape} incompatible with prolongation {P.shape}")
        K = P.T @ obj @ P
        if sp.issparse(K):
            K = ((K + K.T) * 0.5).tocsc()
        else:
            K = 0.5 * (K + K.T)
        return K
    b = np.asarray(obj, dtype=float)
    if b.shape[0] != P.shape[0]:
        raise ValueError(f"vector length {b.shape[0]} incompatible with prolongation {P.shape}")
    return P.T @ b


@dataclass(frozen=True)
class CellQuadrature:
    """Tabulated quadrature over every cell of one subdomain mesh.

    ``X``, ``Y``, ``W`` have shape (n_cells, nq, nq); ``val``, ``gx``, ``gy``
    have shape (n_local, nq, nq) and are identical for all cells.
    """

    X: np.ndarray
    Y: np.ndarray
    W: np.ndarray
    val: np.ndarray
    gx: np.ndarray
    gy: np.ndarray


def cell_quadrature(mesh: SubdomainMesh, n_points: Optional[int] = None) -> CellQuadrature:
    el = reference_element(mesh.degree)
    n_points = n_points or mesh.degree + 2
    rule = gauss_legendre(n_points)
    phi, dphi = lagrange_basis(el.nodes, rule.points)
    b = mesh.cell_bounds()
    hx, hy = mesh.hx, mesh.hy
    xq = b[:, :1] + 0.5 * hx * (rule.points[None, :] + 1.0)
    yq = b[:, 2:3] + 0.5 * hy * (rule.points[None, :] + 1.0)
    nc, nq = len(b), n_points
    X = np.broadcast_to(xq[:, None, :], (nc, nq, nq))
    Y = np.broadcast_to(yq[:, :, None], (nc, nq, nq))
    W = np.broadcast_to(np.outer(rule.weights, rule.weights) * (0.25 * hx * hy), (nc, nq, nq))
    n1 = mesh.degree + 1
    val = np.einsum("jb,ia->jiba", phi, phi).reshape(n1 * n1, nq, nq)
    gx = np.einsum("jb,ia->jiba", phi, dphi).reshape(val.shape) * (2.0 / hx)
    gy = np.einsum("jb,ia->jiba", dphi, phi).reshape(val.shape) * (2.0 / hy)
    return CellQuadrature(X, Y, W, val, gx, gy)


def _eval_field(f, X, Y, t):
    return np.asarray(f(X, Y, t), dtype=float) * np.ones_like(X)


def _eval_coef(alpha: Coefficient, X, Y):
    if callable(alpha):
        return np.asarray(alpha(X, Y), dtype=float) * np.ones_like(X)
    return float(alpha)


def _outward_normal(side: str) -> tuple[float, float]:
    return {"left": (-1.0, 0.0), "right": (1.0, 0.0), "bottom": (0.0, -1.0), "top": (0.0, 1.0)}[side]


@dataclass(frozen=True)
class InterfaceFlux:
    """Exact-gradient data for the two-sided interface term.

    ``grad(x, y, t) -> (ux, uy)``; a sequence gives one gradient per subdomain.
    """

    grad: Union[Callable, Sequence[Callable]]
    alphas: Sequence[Coefficient]


def _flux_vector(meshes, interfaces, flux: InterfaceFlux, t: float, n: int, offsets) -> np.ndarray:
    out = np.zeros(n)
    for itf in interfaces:
        for side_id, other_id in ((itf.mortar_side, itf.nonmortar_side), (itf.nonmortar_side, itf.mortar_side)):
            mesh = meshes[side_id]
            other = meshes[other_id]
            trace = TraceSpace(mesh.breakpoints(itf.axis), mesh.degree)
            order = max(mesh.degree, other.degree) + 2
            s, w, _ = interface_quadrature(trace.breakpoints, other.breakpoints(itf.axis), order)
            x, y = itf.points(s)
            side = mesh.side_of(itf.axis, itf.coord)
            nx_, ny_ = _outward_normal(side)
            ux, uy = _pick(flux.grad, side_id)(x, y, t)
            a = _eval_coef(flux.alphas[side_id], x, y)
            g = a * (np.asarray(ux) * nx_ + np.asarray(uy) * ny_)
            contrib = trace.eval(s) @ (g * w)
            np.add.at(out, offsets[side_id] + mesh.edge_nodes(side), contrib)
    return out


def assemble_load(
    meshes: Sequence[SubdomainMesh],
    f: Union[ScalarField, Sequence[ScalarField], None],
    t: float = 0.0,
    consistency_flux: Optional[InterfaceFlux] = None,
    interfaces: Sequence[InterfaceSegment] = (),
    quadrature: Optional[Sequence[CellQuadrature]] = None,
) -> np.ndarray:
    """Full load vector: volume term plus the optional interface flux term.

    ``f`` is ``f(x, y, t)`` or one such callable per subdomain.
    """
    offsets = np.concatenate(([0], np.cumsum([m.n_nodes for m in meshes])))
    n = int(offsets[-1])
    out = np.zeros(n)
    if f is not None:
        for i, m in enumerate(meshes):
            q = quadrature[i] if quadrature is not None else cell_quadrature(m)
            fv = _eval_field(_pick(f, i), q.X, q.Y, t) * q.W
            loc = np.einsum("iba,cba->ci", q.val, fv)
            out += np.bincount((m.cells + offsets[i]).ravel(), loc.ravel(), minlength=n)
    if consistency_flux is not None:
        out += _flux_vector(meshes, interfaces, consistency_flux, t, n, offsets)
    return out


def energy_load(meshes, grad, alphas, t: float = 0.0, quadrature=None) -> np.ndarray:
    """Vector of ``sum_i int alpha_i grad(u) . grad(phi)`` for an exact gradient."""
    offsets = np.concatenate(([0], np.cumsum([m.n_nodes for m in meshes])))
    n = int(offsets[-1])
    out = np.zeros(n)
    for i, m in enumerate(meshes):
        q = quadrature[i] if quadrature is not None else cell_quadrature(m)
        ux, uy = _pick(grad, i)(q.X, q.Y, t)
        a = _eval_coef(alphas[i], q.X, q.Y)
        wx = a * np.asarray(ux) * q.W
        wy = a * np.asarray(uy) * q.W
        loc = np.einsum("iba,cba->ci", q.gx, wx) + np.einsum("iba,cba->ci", q.gy, wy)
        out += np.bincount((m.cells + offsets[i]).ravel(), loc.ravel(), minlength=n)
    return out


@dataclass(frozen=True)
class MeshSpec:
    nx: int
    ny: int
    degree: int


@dataclass(frozen=True, eq=False)
class MortarSystem:
    """Everything needed to work on the constrained space V_{h,k}."""

    partition: Partition
    meshes: tuple[SubdomainMesh, ...]
    interfaces: tuple[InterfaceSegment, ...]
    couplings: tuple[CouplingMap, ...]
    alphas: tuple[Coefficient, ...]
    dofmap: DofMap
    P: sp.csr_matrix = field(repr=False)
    M_full: sp.csr_matrix = field(repr=False)
    A_full: sp.csr_matrix = field(repr=False)
    M_c: sp.csc_matrix = field(repr=False)
    A_c: sp.csc_matrix = field(repr=False)
    quadrature: tuple[CellQuadrature, ...] = field(repr=False)

    @property
    def n_reduced(self) -> int:
        return self.dofmap.n_reduced

    @property
    def h(self) -> float:
        return max(max(m.hx, m.hy) for m in self.meshes)

    def prolong(self, reduced: np.ndarray) -> np.ndarray:
        return self.P @ reduced

    def load(self, f, t: float = 0.0, flux: Optional[InterfaceFlux] = None) -> np.ndarray:
        """Constrained load vector ``P^T F(t)``."""
        full = assemble_load(self.meshes, f, t, flux, self.interfaces, self.quadrature)
        return self.P.T @ full

    def nodal_values(self, u: ScalarField, t: float = 0.0) -> np.ndarray:
        """Nodal interpolant on the full (broken) space."""
        out = np.empty(self.dofmap.n_total)
        for i, m in enumerate(self.meshes):
            X, Y = m.coordinates()
            out[self.dofmap.block(i)] = _eval_field(_pick(u, i), X, Y, t)
        return out

    def interpolate(self, u: ScalarField, t: float = 0.0) -> np.ndarray:
        """Mortar interpolant: nodal values at free DOFs, slaves from the coupling."""
        full = self.nodal_values(u, t)
        red = self.dofmap.reduced_index
        out = np.empty(self.n_reduced)
        out[red[red >= 0]] = full[red >= 0]
        return out


def build_system(
    partition: Partition,
    mesh_specs: Sequence[MeshSpec],
    alphas: Sequence[Coefficient],
    mortar_rule: MortarRule = None,
) -> MortarSystem:
    if len(mesh_specs) != partition.n_subdomains:
        raise ValueError(f"need one mesh spec per subdomain: {len(mesh_specs)} given for {partition.n_subdomains}")
    if len(alphas) != partition.n_subdomains:
        raise ValueError(f"need one alpha per subdomain: {len(alphas)} given for {partition.n_subdomains}")
    meshes = tuple(build_subdomain_mesh(partition, i, s.nx, s.ny, s.degree) for i, s in enumerate(mesh_specs))
    interfaces = tuple(extract_interfaces(partition, meshes, mortar_rule))
    couplings = tuple(build_coupling(g, meshes[g.mortar_side], meshes[g.nonmortar_side]) for g in interfaces)
    dofmap = build_dofmap(partition, meshes, couplings)
    P = build_prolongation(dofmap, couplings)
    M_full, A_full = assemble_unconstrained(meshes, alphas)
    return MortarSystem(
        partition=partition,
        meshes=meshes,
        interfaces=interfaces,
        couplings=couplings,
        alphas=tuple(alphas),
        dofmap=dofmap,
        P=P,
        M_full=M_full,
        A_full=A_full,
        M_c=reduce(M_full, P),
        A_c=reduce(A_full, P),
        quadrature=tuple(cell_quadrature(m) for m in meshes),
    )
