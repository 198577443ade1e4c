import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from mortarfem.analysis import Problem, manufactured
from mortarfem.assembly import (
    DofClass,
    InterfaceFlux,
    MeshSpec,
    assemble_load,
    assemble_unconstrained,
    build_system,
    reduce,
)
from mortarfem.fem_core import local_matrices, reference_element
from mortarfem.geometry import build_partition, build_subdomain_mesh
from mortarfem.solvers import SPDFactor

from .oracles import conforming_system


def test_single_cell_mass_is_local_mass():
    p = build_partition("unit-square")
    m = build_subdomain_mesh(p, 0, 1, 1, 1)
    M, A = assemble_unconstrained([m], [1.0])
    mass, stiff = local_matrices(reference_element(1), (0, 1, 0, 1))
    assert np.abs(M.toarray() - mass).max() < 1e-15
    assert np.abs(A.toarray() - stiff).max() < 1e-15


def test_block_diagonal_and_semidefinite(rng):
    p = build_partition("unit-square-2x1")
    meshes = [build_subdomain_mesh(p, 0, 2, 3, 2), build_subdomain_mesh(p, 1, 3, 4, 1)]
    M, A = assemble_unconstrained(meshes, [1.0, 5.0])
    n0 = meshes[0].n_nodes
    for K in (M, A):
        K = K.tocoo()
        assert not np.any((K.row < n0) != (K.col < n0))
        assert (abs(K - K.T)).max() == 0
    Ad = A.toarray()
    for _ in range(100):
        x = rng.standard_normal(Ad.shape[0])
        assert x @ Ad @ x >= -1e-12
    assert np.linalg.eigvalsh(M.toarray()).min() > 0


def test_reduce_dimension_mismatch(lshape_system):
    s = lshape_system
    with pytest.raises(ValueError):
        reduce(sp.eye(3), s.P)
    with pytest.raises(ValueError):
        reduce(np.ones(3), s.P)


def test_no_interface_reduction_is_restriction():
    p = build_partition("unit-square")
    s = build_system(p, [MeshSpec(3, 3, 2)], [2.0])
    free = s.dofmap.classes != DofClass.DIRICHLET
    K = s.A_full.toarray()[np.ix_(free, free)]
    assert np.abs(s.A_c.toarray() - K).max() == 0


def test_dofmap_classes(lshape_system):
    s = lshape_system
    cls = s.dofmap.classes
    assert set(np.unique(cls)) <= {c.value for c in DofClass}
    n_slaves = sum(c.n_slaves for c in s.couplings)
    assert np.count_nonzero(cls == DofClass.SLAVE) == n_slaves
    assert s.n_reduced == np.count_nonzero((cls == DofClass.INTERIOR) | (cls == DofClass.MASTER))
    for i, m in enumerate(s.meshes):
        X, Y = m.coordinates()
        dirichlet = cls[s.dofmap.block(i)] == DofClass.DIRICHLET
        assert np.array_equal(dirichlet, s.partition.on_boundary(X, Y))


def test_prolongation_rows(lshape_system):
    s = lshape_system
    P = s.P.toarray()
    assert np.linalg.matrix_rank(P) == s.n_reduced
    off = s.dofmap.offsets
    red = s.dofmap.reduced_index
    for c in s.couplings:
        masters = np.concatenate([off[c.mortar_side] + c.mortar_nodes, off[c.nonmortar_side] + c.endpoint_nodes])
        for row, slave in enumerate(off[c.nonmortar_side] + c.slave_nodes):
            for col, m in enumerate(masters):
                expected = c.coeffs[row, col] if red[m] >= 0 else 0.0
                if red[m] >= 0:
                    assert P[slave, red[m]] == pytest.approx(expected, abs=1e-15)


def _matching_pair(partition, counts, k, alphas):
    p = build_partition(partition)
    specs = [MeshSpec(nx, ny, k) for nx, ny in counts]
    s = build_system(p, specs, alphas)
    Mc, Ac, coords, free, glob = conforming_system(s.meshes, alphas, p)
    # reduced dof -> merged conforming node
    red = s.dofmap.reduced_index
    perm = np.empty(s.n_reduced, dtype=int)
    for i in range(p.n_subdomains):
        blk = s.dofmap.block(i)
        r = red[blk]
        perm[r[r >= 0]] = glob[i][r >= 0]
    return s, Mc, Ac, free, perm


@pytest.mark.parametrize(
    "partition, counts, k, alphas",
    [
        ("unit-square-2x1", [(2, 4), (2, 4)], 1, [1.0, 1.0]),
        ("unit-square-2x1", [(2, 3), (3, 3)], 2, [1.0, 4.0]),
        ("lshape", [(3, 3), (3, 3), (3, 3)], 2, [1.0, 10.0, 10.0]),
        ("lshape", [(2, 2), (2, 2), (2, 2)], 3, [1.0, 1.0, 1.0]),
    ],
)
def test_matching_grids_equal_conforming_system(partition, counts, k, alphas):
    s, Mc, Ac, free, perm = _matching_pair(partition, counts, k, alphas)
    assert np.array_equal(np.sort(perm), np.flatnonzero(free))
    for red_mat, conf in ((s.M_c, Mc), (s.A_c, Ac)):
        ref = conf.toarray()[np.ix_(perm, perm)]
        assert np.abs(red_mat.toarray() - ref).max() < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("preset", ["lshape", "unit-square-2x1", "unit-square-2x2"])
def test_constrained_stiffness_spd(preset, k):
    p = build_partition(preset)
    specs = [MeshSpec(2 + (i % 2) * 2, 3 + i % 2, k) for i in range(p.n_subdomains)]
    s = build_system(p, specs, [1.0 + 9.0 * (i > 0) for i in range(p.n_subdomains)])
    assert (abs(s.A_c - s.A_c.T)).max() == 0
    assert SPDFactor(s.A_c).min_pivot > 0
    assert SPDFactor(s.M_c).min_pivot > 0
    np.linalg.cholesky(s.A_c.toarray())


def test_load_examples():
    p = build_partition("unit-square")
    m = build_subdomain_mesh(p, 0, 1, 1, 1)
    assert np.all(assemble_load([m], lambda x, y, t: 0 * x) == 0)
    assert np.allclose(assemble_load([m], lambda x, y, t: 1 + 0 * x), 0.25, atol=1e-15)


def test_load_matches_mass_times_interpolant_for_polynomial(square_k2_system):
    s = square_k2_system
    f = lambda x, y, t: x * x - y + 2 * x * y  # noqa: E731
    full = s.nodal_values(f)
    assert np.allclose(assemble_load(s.meshes, f), s.M_full @ full, atol=1e-14)


def test_continuous_flux_in_multiplier_space_gives_no_consistency_term():
    # u = x(1-x)(1+x) y(1-y): normal flux on x = 1/2 is y(1-y)/4, quadratic along
    # the interface, hence in the multiplier space for k = 3.
    p = build_partition("unit-square-2x1")
    s = build_system(p, [MeshSpec(2, 3, 3), MeshSpec(3, 5, 3)], [1.0, 1.0])

    def grad(x, y, t):
        return ((1 - 2 * x) * (1 + x) + x * (1 - x)) * y * (1 - y), x * (1 - x) * (1 + x) * (1 - 2 * y)

    flux = assemble_load(s.meshes, None, 0.0, InterfaceFlux(grad, [1.0, 1.0]), s.interfaces)
    assert np.abs(s.P.T @ flux).max() <= 1e-12
    # the unreduced vector itself is not zero: the two sides only cancel weakly
    assert np.abs(flux).max() > 1e-3


def test_consistency_flux_makes_jump_coefficient_exact():
    # alpha jumps across the interface; with the two-sided flux term the
    # interpolant of a polynomial solution in V_hk is reproduced exactly
    p = build_partition("unit-square-2x1")
    s = build_system(p, [MeshSpec(2, 3, 2), MeshSpec(2, 5, 2)], [1.0, 7.0])
    ms = manufactured("patch", (1.0, 7.0))
    rhs = s.load(ms.elliptic_sources(), 0.0, ms.flux())
    uh = spla.spsolve(s.A_c.tocsc(), rhs)
    assert np.abs(uh - s.interpolate(ms.u)).max() < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
def test_interior_cross_point_keeps_extra_unknowns(k):
    # Matching 2x2 grids: the centre vertex carries four independent values
    # (one per subdomain corner) instead of the single conforming one.
    part = build_partition("unit-square-2x2")
    s = build_system(part, [MeshSpec(2, 2, k)] * 4, [1.0] * 4)
    _, _, _, free, _ = conforming_system(s.meshes, [1.0] * 4, part)
    assert s.n_reduced == free.sum() + 3
