"""Manufactured solutions, error norms, EOC tables and the convergence studies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, Union

import numpy as np
import sympy

from .assembly import InterfaceFlux, MeshSpec, MortarSystem, build_system, cell_quadrature
from .geometry import Partition, build_partition
from .solvers import (
    EllipticOperator,
    TimeStepper,
    backward_euler_run,
    discrete_negative_seminorm,
    elliptic_solve,
    initial_data,
)

_x, _y, _t = sympy.symbols("x y t", real=True)


def _lambdify(expr) -> Callable:
    fn = sympy.lambdify((_x, _y, _t), expr, "numpy")

    def wrapped(x, y, t=0.0):
        x = np.asarray(x, dtype=float)
        return np.asarray(fn(x, y, t), dtype=float) * np.ones_like(x)

    return wrapped


@dataclass(frozen=True)
class ManufacturedSolution:
    """Closed-form u(x, y, t) with derived gradient, time derivative and sources.

    The per-subdomain source is ``u_t - alpha_i * laplace(u)`` for constant
    ``alpha_i``.
    """

    expression: str
    alphas: tuple[float, ...]
    name: str = "custom"
    u: Callable = field(init=False, repr=False)
    dudt: Callable = field(init=False, repr=False)
    laplacian: Callable = field(init=False, repr=False)
    _grad: tuple = field(init=False, repr=False)

    def __post_init__(self):
        expr = sympy.sympify(self.expression, locals={"x": _x, "y": _y, "t": _t})
        object.__setattr__(self, "u", _lambdify(expr))
        object.__setattr__(self, "dudt", _lambdify(sympy.diff(expr, _t)))
        object.__setattr__(self, "laplacian", _lambdify(sympy.diff(expr, _x, 2) + sympy.diff(expr, _y, 2)))
        object.__setattr__(self, "_grad", (_lambdify(sympy.diff(expr, _x)), _lambdify(sympy.diff(expr, _y))))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    def grad(self, x, y, t=0.0):
        return self._grad[0](x, y, t), self._grad[1](x, y, t)

    def u0(self, x, y, t=0.0):
        return self.u(x, y, 0.0)

    def source(self, i: int) -> Callable:
        a = self.alphas[i]

        def f(x, y, t=0.0):
            return self.dudt(x, y, t) - a * self.laplacian(x, y, t)

        return f

    def sources(self) -> list[Callable]:
        return [self.source(i) for i in range(len(self.alphas))]

    def elliptic_sources(self, t: float = 0.0) -> list[Callable]:
        """``-alpha_i laplace(u)(., t)``: sources for the stationary problem at frozen t."""
        def make(a):
            return lambda x, y, _t=0.0: -a * self.laplacian(x, y, t)

        return [make(a) for a in self.alphas]

    def flux(self) -> InterfaceFlux:
        return InterfaceFlux(self.grad, self.alphas)

    def with_alphas(self, alphas: Sequence[float]) -> "ManufacturedSolution":
        return replace(self, alphas=tuple(alphas))


SOLUTION_PRESETS = {
    "lshape-poly": "x*y*(1 - x**2)*(1 - y**2)*exp(t)",
    # smooth on the unit square, nonzero normal flux on x = 1/2
    "smooth": "sin(pi*x)*sin(pi*y)*exp(x - t)",
    "patch": "x*(1 - x)*y*(1 - y)",
    "zero": "0",
}


def manufactured(name: str, alphas: Sequence[float]) -> ManufacturedSolution:
    try:
        expr = SOLUTION_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown manufactured solution {name!r}; known: {sorted(SOLUTION_PRESETS)}") from None
    return ManufacturedSolution(expr, tuple(alphas), name=name)


def error_norms(system: MortarSystem, coeffs: np.ndarray, exact: ManufacturedSolution, t: float) -> tuple[float, float]:
    """L2 and broken H1 norms of ``u(t) - u_h`` with k+3 Gauss points per direction.

    ``coeffs`` are constrained coefficients; they are prolonged first.
    """
    full = system.prolong(coeffs)
    l2 = 0.0
    h1 = 0.0
    for i, m in enumerate(system.meshes):
        q = cell_quadrature(m, m.degree + 3)
        loc = full[system.dofmap.block(i)][m.cells]
        uh = np.einsum("ci,iba->cba", loc, q.val)
        gxh = np.einsum("ci,iba->cba", loc, q.gx)
        gyh = np.einsum("ci,iba->cba", loc, q.gy)
        ux, uy = exact.grad(q.X, q.Y, t)
        e0 = np.sum((exact.u(q.X, q.Y, t) - uh) ** 2 * q.W)
        e1 = np.sum(((ux - gxh) ** 2 + (uy - gyh) ** 2) * q.W)
        l2 += e0
        h1 += e0 + e1
    return math.sqrt(l2), math.sqrt(h1)


@dataclass
class ConvergenceRecord:
    h: float
    r: float = float("nan")
    error_l2: float = float("nan")
    error_x: float = float("nan")
    error_neg: float = float("nan")
    p: float = float("nan")
    q: float = float("nan")
    p_x: float = float("nan")
    p_neg: float = float("nan")
    q_coupled: float = float("nan")
    n_dofs: int = 0


def _rate(e0, e1, s0, s1) -> float:
    if not (e0 > 0 and e1 > 0) or s0 == s1:
        return float("nan")
    return math.log(e0 / e1) / math.log(s0 / s1)


def eoc(records: Sequence[ConvergenceRecord], vs: str = "h") -> list[ConvergenceRecord]:
    """Fill consecutive-pair orders.

    ``p`` is measured against h and ``q`` against r. With ``vs='r'`` the
    records must be ordered by strictly decreasing r instead of h.
    ``q_coupled`` is p/2, the value implied by r = h^2.
    """
    if len(records) < 2:
        raise ValueError("need >= 2 resolutions for an order estimate")
    key = [getattr(r, vs) for r in records]
    if any(not (a > b) for a, b in zip(key, key[1:])):
        raise ValueError(f"{vs} must be strictly decreasing across records, got {key}")
    out = [replace(records[0], p=float("nan"), q=float("nan"))]
    for a, b in zip(records, records[1:]):
        p = _rate(a.error_l2, b.error_l2, a.h, b.h)
        out.append(
            replace(
                b,
                p=p,
                q=_rate(a.error_l2, b.error_l2, a.r, b.r),
                p_x=_rate(a.error_x, b.error_x, a.h, b.h),
                p_neg=_rate(a.error_neg, b.error_neg, a.h, b.h),
                q_coupled=p / 2.0,
            )
        )
    return out


# -- studies -----------------------------------------------------------------


@dataclass(frozen=True)
class Problem:
    """Discretisation layout independent of resolution.

    ``partition`` is a preset name or a tuple of ``(x0, x1, y0, y1)``
    rectangles. ``degree`` is one degree or one per subdomain. With
    ``meshes`` set, resolution-dependent cell counts are ignored.
    """

    partition: Union[str, tuple] = "lshape"
    degree: Union[int, tuple[int, ...]] = 1
    alphas: tuple[float, ...] = (1.0, 10.0, 10.0)
    solution: str = "lshape-poly"
    # extra cells per direction given to each subdomain (n + offset at h = 1/n)
    cell_offsets: tuple[int, ...] = (0, 2, 0)
    consistency_flux: bool = True
    mortar_rule: Optional[dict] = None
    meshes: Optional[tuple[MeshSpec, ...]] = None

    def build_partition(self) -> Partition:
        if isinstance(self.partition, str):
            return build_partition(self.partition)
        return build_partition(rectangles=self.partition)

    def exact(self) -> ManufacturedSolution:
        return manufactured(self.solution, self.alphas)

    def degree_of(self, i: int) -> int:
        return self.degree[i] if isinstance(self.degree, (tuple, list)) else int(self.degree)

    @property
    def min_degree(self) -> int:
        return min(self.degree) if isinstance(self.degree, (tuple, list)) else int(self.degree)

    def mesh_specs(self, n: int) -> list[MeshSpec]:
        """Cell counts for parameter h = 1/n on every subdomain.

        A subdomain with side length L gets ``round(L*n) + offset`` cells per
        direction, so unit subdomains get n or n + 2.
        """
        if self.meshes is not None:
            return list(self.meshes)
        part = self.build_partition()
        specs = []
        for i, r in enumerate(part.subdomains):
            off = self.cell_offsets[i] if i < len(self.cell_offsets) else 0
            nx = max(1, int(round((r.x1 - r.x0) * n)) + off)
            ny = max(1, int(round((r.y1 - r.y0) * n)) + off)
            specs.append(MeshSpec(nx, ny, self.degree_of(i)))
        return specs

    def system(self, n: int) -> MortarSystem:
        part = self.build_partition()
        if len(self.alphas) != part.n_subdomains:
            raise ValueError(f"alphas has {len(self.alphas)} entries for {part.n_subdomains} subdomains")
        return build_system(part, self.mesh_specs(n), self.alphas, self.mortar_rule)


def _map(fn, items, threads: int):
    """Ordered map, optionally over a thread pool."""
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def run_parabolic(
    problem: Problem,
    n: int,
    r: float,
    T: float = 1.0,
    u0_mode: str = "interpolant",
) -> tuple[MortarSystem, np.ndarray, ConvergenceRecord]:
    """Backward Euler to time T; returns the final constrained coefficients and errors."""
    N = int(round(T / r))
    if N < 1 or abs(N * r - T) > 1e-9 * T:
        raise ValueError(f"T={T} is not an integer multiple of r={r}")
    system = problem.system(n)
    exact = problem.exact()
    flux = exact.flux() if problem.consistency_flux else None
    sources = exact.sources()
    op = EllipticOperator(system) if u0_mode == "elliptic_projection" else None
    u0 = initial_data(system, exact.u0, u0_mode, op=op, grad_u0=exact.grad)
    stepper = TimeStepper.for_system(system, r)
    traj = backward_euler_run(stepper, lambda t: system.load(sources, t, flux), u0, N, keep="ends")
    uN = traj[-1]
    l2, hx = error_norms(system, uN, exact, N * r)
    rec = ConvergenceRecord(h=1.0 / n, r=r, error_l2=l2, error_x=hx, n_dofs=system.n_reduced)
    return system, uN, rec


def space_convergence(
    problem: Problem,
    ns: Sequence[int],
    r_of_h: Callable[[float], float] = lambda h: h * h,
    T: float = 1.0,
    u0_mode: str = "interpolant",
    threads: int = 1,
) -> list[ConvergenceRecord]:
    """Parabolic sweep over h = 1/n with r = r_of_h(h); orders against h and r."""
    if len(ns) < 2:
        raise ValueError("need >= 2 resolutions")
    ns = sorted(set(ns))
    recs = _map(lambda n: run_parabolic(problem, n, r_of_h(1.0 / n), T, u0_mode)[2], ns, threads)
    return eoc(recs)


def time_convergence(
    problem: Problem,
    n: int,
    rs: Sequence[float],
    T: float = 1.0,
    u0_mode: str = "interpolant",
    threads: int = 1,
) -> list[ConvergenceRecord]:
    """Fixed mesh h = 1/n, decreasing time steps; ``q`` is the temporal order."""
    if len(rs) < 2:
        raise ValueError("need >= 2 resolutions")
    rs = sorted(set(rs), reverse=True)
    recs = _map(lambda r: run_parabolic(problem, n, r, T, u0_mode)[2], rs, threads)
    return eoc(recs, vs="r")


def stationary_convergence(
    problem: Problem, ns: Sequence[int], t: float = 0.0, s: Optional[int] = None, threads: int = 1
) -> list[ConvergenceRecord]:
    """Elliptic sweep at frozen time t: errors of ``A_hk f`` for ``f = -alpha laplace u``.

    With ``s`` given the discrete negative seminorm ``|u - u_hk|_{-s,hk}`` is
    recorded as ``error_neg``.
    """
    if len(ns) < 2:
        raise ValueError("need >= 2 resolutions")
    exact = problem.exact()

    def one(n):
        system = problem.system(n)
        op = EllipticOperator(system)
        rhs = op.moments(exact.elliptic_sources(t))
        if problem.consistency_flux:
            rhs = rhs + system.load(None, t, exact.flux())
        uh = op.stiffness.solve(rhs)
        l2, hx = error_norms(system, uh, exact, t)
        rec = ConvergenceRecord(h=1.0 / n, error_l2=l2, error_x=hx, n_dofs=system.n_reduced)
        if s is not None:
            rec.error_neg = negative_norm_error(op, uh, exact, t, s)
        return rec

    return eoc(_map(one, sorted(set(ns)), threads))


def negative_norm_error(op: EllipticOperator, uh: np.ndarray, exact: ManufacturedSolution, t: float, s: int) -> float:
    """``|u(t) - u_h|_{-s,hk}`` via the L2 projection of the error onto V_hk.

    For s = 0 this is the plain L2 error (A^0 is the identity).
    """
    system = op.system
    if s == 0:
        return error_norms(system, uh, exact, t)[0]
    err_moments = op.moments(lambda x, y, _t=0.0: exact.u(x, y, t)) - system.M_c @ uh
    projected = op.mass.solve(err_moments)
    return discrete_negative_seminorm(op, projected, s)


def superconvergence_study(
    problem: Problem, ns: Sequence[int], s: int = 1, t: float = 0.0, threads: int = 1
) -> list[ConvergenceRecord]:
    """EOC of the discrete negative seminorm of the error next to the L2 EOC.

    Runs the stationary problem at frozen time t, so time-stepping error does
    not mask the spatial rate.
    """
    if problem.min_degree < 2 and s > 0:
        raise ValueError(
            "superconvergence study needs polynomial degree k >= 2: the negative-norm "
            "estimate requires regularity beyond H^2 to be visible"
        )
    return stationary_convergence(problem, ns, t=t, s=s, threads=threads)


def functional_error(
    system: MortarSystem, uh: np.ndarray, exact: ManufacturedSolution, weight: Callable, t: float
) -> float:
    """``|F(u) - F(u_h)|`` for ``F(v) = int v * weight``."""
    full = system.prolong(uh)
    total = 0.0
    for i, m in enumerate(system.meshes):
        q = cell_quadrature(m, m.degree + 3)
        loc = full[system.dofmap.block(i)][m.cells]
        uhq = np.einsum("ci,iba->cba", loc, q.val)
        total += np.sum((exact.u(q.X, q.Y, t) - uhq) * weight(q.X, q.Y) * q.W)
    return abs(float(total))


def evaluate_points(system: MortarSystem, coeffs: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Point values of the discrete solution; NaN outside every subdomain.

    A point on a subdomain boundary takes the value from the lowest-index
    subdomain containing it.
    """
    from .fem_core import lagrange_basis, reference_element

    full = system.prolong(coeffs)
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    out = np.full(len(x), np.nan)
    done = np.zeros(len(x), dtype=bool)
    for i, m in enumerate(system.meshes):
        r = m.rect
        sel = ~done & (x >= r.x0 - 1e-12) & (x <= r.x1 + 1e-12) & (y >= r.y0 - 1e-12) & (y <= r.y1 + 1e-12)
        if not sel.any():
            continue
        idx = np.flatnonzero(sel)
        cx = np.clip(((x[idx] - r.x0) / m.hx).astype(int), 0, m.nx - 1)
        cy = np.clip(((y[idx] - r.y0) / m.hy).astype(int), 0, m.ny - 1)
        xi = 2.0 * (x[idx] - (r.x0 + cx * m.hx)) / m.hx - 1.0
        eta = 2.0 * (y[idx] - (r.y0 + cy * m.hy)) / m.hy - 1.0
        nodes = reference_element(m.degree).nodes
        px = lagrange_basis(nodes, xi)[0]
        py = lagrange_basis(nodes, eta)[0]
        n1 = m.degree + 1
        loc = full[system.dofmap.block(i)][m.cells[cx + m.nx * cy]]
        shape = (py[:, None, :] * px[None, :, :]).reshape(n1 * n1, len(idx))
        out[idx] = np.einsum("pi,ip->p", loc, shape)
        done[idx] = True
    return out
