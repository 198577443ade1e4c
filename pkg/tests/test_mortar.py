import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mortarfem.fem_core import gauss_legendre
from mortarfem.geometry import GeometryError, build_partition, build_subdomain_mesh, extract_interfaces
from mortarfem.mortar import (
    MultiplierSpace,
    TraceSpace,
    build_coupling,
    interface_quadrature,
    mortar_project,
    mortar_project_piecewise,
    multiplier_dim,
)

from .oracles import composite_simpson


def _fine_integral(breaks, fn, n=12):
    """Gauss rule with n points on every subinterval of ``breaks``."""
    q = gauss_legendre(n)
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        x = a + 0.5 * (b - a) * (q.points + 1)
        total = total + 0.5 * (b - a) * (fn(x) * q.weights).sum(axis=-1)
    return total


def _count_oracle(n_intervals, k):
    # sum of local dimensions minus one continuity condition per interior breakpoint
    degrees = [k - 1] + [k] * (n_intervals - 2) + [k - 1]
    return sum(d + 1 for d in degrees) - (n_intervals - 1)


def test_multiplier_dim_examples():
    assert multiplier_dim(2, 1) == 1
    assert multiplier_dim(3, 2) == 5
    assert _count_oracle(3, 2) == 5
    for k in range(1, 5):
        with pytest.raises(ValueError):
            multiplier_dim(1, k)


@pytest.mark.parametrize("n_int", range(2, 11))
@pytest.mark.parametrize("k", range(1, 5))
def test_multiplier_dim_equals_interior_trace_dim(n_int, k):
    bp = np.linspace(0.0, 1.0, n_int + 1)
    trace = TraceSpace(bp, k)
    mult = MultiplierSpace(trace)
    assert multiplier_dim(n_int, k) == _count_oracle(n_int, k) == trace.dim - 2 == mult.dim
    # the basis is linearly independent
    x = np.linspace(0, 1, 40 * n_int * (k + 1))
    assert np.linalg.matrix_rank(mult.eval(x)) == mult.dim


@given(n_int=st.integers(2, 8), k=st.integers(1, 4), seed=st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_multiplier_space_structure(n_int, k, seed):
    rng = np.random.default_rng(seed)
    bp = np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0.05, 0.95, n_int - 1)]))
    if np.min(np.diff(bp)) < 1e-3:
        return
    mult = MultiplierSpace(TraceSpace(bp, k))
    x = np.linspace(0, 1, 301)
    vals = mult.eval(x)
    # constants lie in the space
    assert np.allclose(vals.sum(axis=0), 1.0, atol=1e-12)
    # continuity across interior breakpoints
    for b in bp[1:-1]:
        left = mult.eval(np.array([b - 1e-13]))
        right = mult.eval(np.array([b + 1e-13]))
        assert np.allclose(left, right, atol=1e-7)
    # degree k-1 on the end intervals
    for a, b in ((bp[0], bp[1]), (bp[-2], bp[-1])):
        s = np.linspace(a, b, k + 3)
        for row in mult.eval(s):
            coef = np.polynomial.polynomial.polyfit(s - a, row, k)
            assert abs(coef[-1]) * (b - a) ** k < 1e-7


def test_interface_quadrature_merge():
    _, _, merged = interface_quadrature(np.array([0, 0.5, 1]), np.array([0, 1 / 3, 2 / 3, 1]), 2)
    assert np.allclose(merged, [0, 1 / 3, 0.5, 2 / 3, 1], atol=1e-15)
    _, _, same = interface_quadrature(np.linspace(0, 1, 5), np.linspace(0, 1, 5), 2)
    assert np.array_equal(same, np.linspace(0, 1, 5))
    with pytest.raises(GeometryError):
        interface_quadrature(np.array([0, 1.0]), np.array([0, 2.0]), 2)


def test_interface_quadrature_product_of_two_meshes():
    a = np.array([0, 0.5, 1])
    b = np.array([0, 1 / 3, 2 / 3, 1])
    fa = np.array([0.3, -1.0, 2.0])
    fb = np.array([1.0, 0.5, -0.25, 4.0])

    def prod(x):
        return np.interp(x, a, fa) * np.interp(x, b, fb)

    oracle = composite_simpson(sorted(set(a) | set(b)), prod)
    pts, wts, _ = interface_quadrature(a, b, 2)
    assert abs(np.sum(prod(pts) * wts) - oracle) < 1e-14


def test_mortar_projection_hand_example():
    trace = TraceSpace(np.array([0.0, 0.5, 1.0]), 1)
    c = mortar_project(trace, lambda x: x * (1 - x))
    assert c.shape == (1,)
    assert abs(c[0] - 1 / 3) < 1e-14


def test_mortar_projection_zero_and_range():
    trace = TraceSpace(np.linspace(-1, 0, 5), 3)
    assert np.all(mortar_project(trace, lambda x: 0 * x) == 0)
    w = np.random.default_rng(1).standard_normal(trace.dim - 2)
    full = np.concatenate(([0.0], w, [0.0]))
    assert np.allclose(mortar_project(trace, lambda x: full @ trace.eval(x)), w, atol=1e-12)


@given(n_int=st.integers(2, 9), k=st.integers(1, 4), seed=st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_projection_moments_and_idempotence(n_int, k, seed):
    rng = np.random.default_rng(seed)
    bp = np.linspace(0.0, 2.0, n_int + 1)
    trace = TraceSpace(bp, k)
    mult = MultiplierSpace(trace)
    coeffs = rng.standard_normal(4)

    def v(x):
        return np.polynomial.polynomial.polyval(x, coeffs)

    c = mortar_project(trace, v)
    full = np.concatenate(([0.0], c, [0.0]))

    def residual(x):
        return (v(x) - full @ trace.eval(x)) * mult.eval(x)

    assert np.abs(_fine_integral(bp, residual)).max() <= 1e-11
    again = mortar_project(trace, lambda x: full @ trace.eval(x))
    assert np.abs(again - c).max() <= 1e-11


def _interface(counts_mortar, counts_nonmortar, km=1, kn=1, axis_len=1.0):
    p = build_partition("unit-square-2x1")
    m0 = build_subdomain_mesh(p, 0, 1, counts_mortar, km)
    m1 = build_subdomain_mesh(p, 1, 1, counts_nonmortar, kn)
    (g,) = extract_interfaces(p, [m0, m1], {0: 0})
    return g, m0, m1


def test_coupling_matching_is_selection():
    # with coincident endpoints (equal mortar/nonmortar endpoint values) every
    # slave copies the mortar node at the same position
    for k in (1, 2, 3):
        g, m0, m1 = _interface(4, 4, k, k)
        c = build_coupling(g, m0, m1)
        nm = len(c.mortar_nodes)
        sel = c.coeffs[:, :nm].copy()
        sel[:, 0] += c.coeffs[:, nm]
        sel[:, -1] += c.coeffs[:, nm + 1]
        expect = np.zeros_like(sel)
        for s in range(c.n_slaves):
            expect[s, s + 1] = 1.0
        assert np.abs(sel - expect).max() < 1e-12


def test_coupling_dimensions_single_mortar_interval():
    g, m0, m1 = _interface(1, 2)
    c = build_coupling(g, m0, m1)
    assert c.n_slaves == 1 and c.n_masters == 4
    assert c.coeffs.shape == (1, 4)


@pytest.mark.parametrize("nm, nn, km, kn", [(3, 5, 1, 1), (4, 7, 2, 2), (2, 3, 3, 2), (5, 4, 2, 3)])
def test_constants_preserved(nm, nn, km, kn):
    g, m0, m1 = _interface(nm, nn, km, kn)
    c = build_coupling(g, m0, m1)
    ones = c.slaves_from(np.ones(len(c.mortar_nodes)), np.ones(2))
    assert np.abs(ones - 1).max() < 1e-12


@pytest.mark.parametrize("nm, nn, km, kn", [(3, 5, 1, 1), (4, 7, 2, 2), (6, 4, 3, 3), (2, 9, 1, 4)])
def test_constraint_residual_random_masters(nm, nn, km, kn, rng):
    g, m0, m1 = _interface(nm, nn, km, kn)
    c = build_coupling(g, m0, m1)
    wm = TraceSpace(g.mortar_trace_mesh, km)
    wn = TraceSpace(g.nonmortar_trace_mesh, kn)
    mult = MultiplierSpace(wn)
    breaks = np.union1d(g.mortar_trace_mesh, g.nonmortar_trace_mesh)
    worst = 0.0
    for _ in range(100):
        vm = rng.standard_normal(len(c.mortar_nodes))
        ve = rng.standard_normal(2)
        vs = c.slaves_from(vm, ve)
        vn = np.concatenate(([ve[0]], vs, [ve[1]]))

        def jump(x):
            return (vm @ wm.eval(x) - vn @ wn.eval(x)) * mult.eval(x)

        worst = max(worst, np.abs(_fine_integral(breaks, jump)).max())
        assert np.abs(c.constraint_residual(vm, vs, ve)).max() <= 1e-11
    assert worst <= 1e-11


def test_slave_equals_projection_of_mortar_trace():
    # with zero endpoint data the slaves are the mortar projection of the mortar trace
    g, m0, m1 = _interface(3, 5, 2, 2)
    c = build_coupling(g, m0, m1)
    vm = np.random.default_rng(3).standard_normal(len(c.mortar_nodes))
    wm = TraceSpace(g.mortar_trace_mesh, 2)
    wn = TraceSpace(g.nonmortar_trace_mesh, 2)
    assert np.allclose(c.slaves_from(vm, np.zeros(2)), mortar_project_piecewise(wn, wm, vm), atol=1e-12)
