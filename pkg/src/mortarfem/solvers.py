"""Discrete elliptic solution operator, projections, backward Euler and
discrete negative seminorms on the constrained space."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import InterfaceFlux, MortarSystem, assemble_load, cell_quadrature, energy_load

log = logging.getLogger(__name__)


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Raised when a system expected to be SPD has a non-positive pivot."""


@dataclass(eq=False)
class SPDFactor:
    """Symmetric sparse LDL^T factorisation (SuperLU with symmetric ordering, no pivoting).

    With the diagonal pivot threshold at zero SuperLU keeps row and column
    permutations equal, so the U diagonal holds the LDL^T pivots and their
    signs certify positive definiteness.
    """

    matrix: sp.spmatrix
    lu: object = field(init=False, repr=False)
    min_pivot: float = field(init=False)

    def __post_init__(self):
        K = sp.csc_matrix(self.matrix)
        if K.shape[0] == 0:
            raise NotPositiveDefinite("empty system")
        try:
            lu = spla.splu(
                K,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError as exc:
            raise NotPositiveDefinite(f"factorisation failed: {exc}") from exc
        if not np.array_equal(lu.perm_r, lu.perm_c):
            raise NotPositiveDefinite("factorisation needed off-diagonal pivoting")
        piv = lu.U.diagonal()
        self.min_pivot = float(piv.min())
        if self.min_pivot <= 0.0:
            raise NotPositiveDefinite(f"non-positive pivot {self.min_pivot:.3e}")
        self.lu = lu

    def solve(self, b: np.ndarray) -> np.ndarray:
        return self.lu.solve(np.asarray(b, dtype=float))


Source = Union[np.ndarray, Callable, Sequence[Callable]]


@dataclass(eq=False)
class EllipticOperator:
    """A_hk on V_hk: ``a(A_hk f, chi) = (f, chi)`` for every chi in V_hk.

    Vectors returned by the methods are constrained (reduced) coefficients.
    """

    system: MortarSystem
    stiffness: SPDFactor = field(init=False, repr=False)
    mass: SPDFactor = field(init=False, repr=False)

    def __post_init__(self):
        self.stiffness = SPDFactor(self.system.A_c)
        self.mass = SPDFactor(self.system.M_c)

    def moments(self, f: Source, t: float = 0.0) -> np.ndarray:
        """``(f, chi_j)`` over the constrained basis.

        ``f`` is a field ``f(x, y, t)`` (or one per subdomain) or a vector of
        coefficients on the full broken space.
        """
        if isinstance(f, np.ndarray):
            if f.shape != (self.system.dofmap.n_total,):
                raise ValueError(f"full vector must have length {self.system.dofmap.n_total}")
            return self.system.P.T @ (self.system.M_full @ f)
        s = self.system
        return s.P.T @ assemble_load(s.meshes, f, t, quadrature=s.quadrature)

    def apply(self, v: np.ndarray) -> np.ndarray:
        """A_hk applied to an element of V_hk given by reduced coefficients."""
        return self.stiffness.solve(self.system.M_c @ v)

    def inner(self, v: np.ndarray, w: np.ndarray) -> float:
        return float(v @ (self.system.M_c @ w))


def elliptic_solve(op: EllipticOperator, f: Source, t: float = 0.0) -> np.ndarray:
    """Mortar approximation ``A_hk f`` of ``-div(alpha grad u) = f``, u = 0 on the boundary."""
    return op.stiffness.solve(op.moments(f, t))


def l2_project(op: EllipticOperator, v: Source, t: float = 0.0) -> np.ndarray:
    """Orthogonal L2 projection onto V_hk."""
    return op.mass.solve(op.moments(v, t))


def elliptic_projection(
    op: EllipticOperator,
    u_exact: Optional[Callable] = None,
    grad_u_exact: Callable = None,
    alpha: Optional[Sequence] = None,
    t: float = 0.0,
) -> np.ndarray:
    """Modified Ritz projection with the two-sided interface flux removed.

    Solves ``a(Pu, chi) = a(u, chi) - sum_i int_{dOmega_i cap Gamma} alpha_i grad u . n_i chi_i``.
    Only the gradient enters; ``u_exact`` is accepted for symmetry with the
    other projections.
    """
    s = op.system
    alpha = s.alphas if alpha is None else tuple(alpha)
    rhs = energy_load(s.meshes, grad_u_exact, alpha, t, s.quadrature)
    flux = assemble_load(s.meshes, None, t, InterfaceFlux(grad_u_exact, alpha), s.interfaces)
    return op.stiffness.solve(s.P.T @ (rhs - flux))


@dataclass(eq=False)
class TimeStepper:
    """Backward Euler for ``M u' + A u = F(t)`` with one factorisation of ``M + r A``."""

    mass: Union[sp.spmatrix, np.ndarray]
    stiffness: Union[sp.spmatrix, np.ndarray]
    r: float
    factor: SPDFactor = field(init=False, repr=False)
    n: int = field(init=False, default=0)

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"time step must be positive, got {self.r}")
        M = sp.csc_matrix(self.mass)
        A = sp.csc_matrix(self.stiffness)
        self.mass = M
        self.factor = SPDFactor((M + self.r * A).tocsc())

    @classmethod
    def for_system(cls, system: MortarSystem, r: float) -> "TimeStepper":
        return cls(system.M_c, system.A_c, r)

    def step(self, u_prev: np.ndarray, load: Optional[np.ndarray]) -> np.ndarray:
        rhs = self.mass @ u_prev
        if load is not None:
            rhs = rhs + self.r * load
        self.n += 1
        return self.factor.solve(rhs)


def initial_data(
    system: MortarSystem,
    u0: Callable,
    mode: str = "interpolant",
    op: Optional[EllipticOperator] = None,
    grad_u0: Optional[Callable] = None,
) -> np.ndarray:
    """``u_{0,hk}`` as the mortar interpolant or the modified elliptic projection."""
    if mode == "interpolant":
        return system.interpolate(u0, 0.0)
    if mode == "elliptic_projection":
        if grad_u0 is None:
            raise ValueError("elliptic_projection initial data needs the exact gradient")
        op = op or EllipticOperator(system)
        return elliptic_projection(op, u0, grad_u0, t=0.0)
    raise ValueError(f"unknown initial-data mode {mode!r}; use 'interpolant' or 'elliptic_projection'")


def backward_euler_run(
    stepper: TimeStepper,
    load: Optional[Callable[[float], np.ndarray]],
    u0: np.ndarray,
    N: int,
    t0: float = 0.0,
    keep: str = "all",
) -> list[np.ndarray]:
    """Run N steps of ``(M + rA) U^n = M U^{n-1} + r F(t_n)``.

    ``load(t)`` returns the constrained load vector at time t (None for f = 0).
    Returns the trajectory ``[U^0, ..., U^N]`` or ``[U^0, U^N]`` when
    ``keep='ends'``.
    """
    if N < 1:
        raise ValueError(f"need at least one time step, got N={N}")
    u = np.asarray(u0, dtype=float).copy()
    out = [u]
    for n in range(1, N + 1):
        tn = t0 + n * stepper.r
        u = stepper.step(u, None if load is None else load(tn))
        if keep == "all":
            out.append(u)
    if keep != "all":
        out.append(u)
    return out


def discrete_negative_seminorm(op: EllipticOperator, v: Source, s: int, t: float = 0.0) -> float:
    """``(A_hk^s v, v)^(1/2)`` by s successive elliptic solves.

    ``v`` is reduced coefficients of an element of V_hk, or a field / full
    vector which is L2-projected first.
    """
    if s not in (0, 1, 2):
        raise ValueError(f"s must be 0, 1 or 2, got {s}")
    if isinstance(v, np.ndarray) and v.shape == (op.system.n_reduced,):
        c = v
    elif s == 0:
        # A^0 is the identity: plain L2 norm, no projection
        return _l2_norm(op.system, v, t)
    else:
        c = l2_project(op, v, t)
    w = c
    for _ in range(s):
        w = op.apply(w)
    val = op.inner(w, c)
    if val < 0:
        log.warning("negative discrete seminorm square %.3e clamped to 0", val)
        val = 0.0
    return float(np.sqrt(val))


def _l2_norm(system: MortarSystem, v: Source, t: float) -> float:
    if isinstance(v, np.ndarray):
        return float(np.sqrt(v @ (system.M_full @ v)))
    total = 0.0
    for i, m in enumerate(system.meshes):
        q = cell_quadrature(m, m.degree + 3)
        f = v[i] if isinstance(v, (list, tuple)) else v
        total += float(np.sum(np.asarray(f(q.X, q.Y, t)) ** 2 * q.W))
    return float(np.sqrt(total))
