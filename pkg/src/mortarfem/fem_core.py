"""Reference-element machinery for tensor-product Lagrange elements.

Quadrature, Gauss-Lobatto node sets, 1D Lagrange shape functions and the
local mass/stiffness/load integrals on axis-aligned rectangular cells.
Local node ordering is lexicographic with x running fastest, i.e. local
index ``i + (k + 1) * j`` for the node at 1D positions ``(i, j)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from numpy.polynomial import legendre

Field = Callable[..., np.ndarray]
Coefficient = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule on [-1, 1]."""

    points: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.points)

    def mapped(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Points and weights transported to the interval [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.points + 1.0), half * self.weights


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule, exact for polynomials of degree 2n - 1."""
    if n < 1:
        raise ValueError(f"quadrature needs at least one point, got n={n}")
    x, w = legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(x, w)


@lru_cache(maxsize=None)
def gauss_lobatto_points(degree: int) -> np.ndarray:
    """The degree + 1 Gauss-Lobatto points on [-1, 1] (endpoints included)."""
    if degree < 1:
        raise ValueError(f"polynomial degree must be >= 1, got {degree}")
    if degree == 1:
        pts = np.array([-1.0, 1.0])
    else:
        # interior points are the roots of P_k'
        coeffs = np.zeros(degree + 1)
        coeffs[-1] = 1.0
        interior = np.sort(legendre.legroots(legendre.legder(coeffs)).real)
        pts = np.concatenate(([-1.0], interior, [1.0]))
    pts.flags.writeable = False
    return pts


def lagrange_basis(nodes: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and first derivatives of the Lagrange polynomials on ``nodes``.

    Returns two arrays of shape ``(len(nodes), len(x))``.
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(nodes)
    vals = np.ones((n, len(x)))
    ders = np.zeros((n, len(x)))
    for i in range(n):
        others = [m for m in range(n) if m != i]
        denom = np.prod([nodes[i] - nodes[m] for m in others]) if others else 1.0
        for m in others:
            vals[i] *= x - nodes[m]
        for m in others:
            term = np.ones_like(x)
            for q in others:
                if q != m:
                    term = term * (x - nodes[q])
            ders[i] += term
        vals[i] /= denom
        ders[i] /= denom
    return vals, ders


@dataclass(frozen=True)
class ReferenceElement:
    """Q_k element on [-1, 1]^2 with Gauss-Lobatto nodes.

    Shape values are cached at ``degree + 2`` Gauss points per direction,
    which integrates mass and stiffness exactly for constant coefficients.
    """

    degree: int
    nodes: np.ndarray = field(init=False, repr=False)
    quad: QuadratureRule = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)
    dphi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError(f"polynomial degree must be >= 1, got {self.degree}")
        nodes = gauss_lobatto_points(self.degree)
        quad = gauss_legendre(self.degree + 2)
        phi, dphi = lagrange_basis(nodes, quad.points)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "dphi", dphi)

    @property
    def n_local(self) -> int:
        return (self.degree + 1) ** 2

    def tabulate(self, n_points: int) -> tuple[QuadratureRule, np.ndarray, np.ndarray]:
        """1D shape values/derivatives at an n-point Gauss rule."""
        rule = gauss_legendre(n_points)
        phi, dphi = lagrange_basis(self.nodes, rule.points)
        return rule, phi, dphi


@lru_cache(maxsize=None)
def reference_element(degree: int) -> ReferenceElement:
    return ReferenceElement(degree)


def _check_cell(cell) -> tuple[float, float, float, float]:
    x0, x1, y0, y1 = (float(c) for c in cell)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate cell {cell!r}: need x1 > x0 and y1 > y0")
    return x0, x1, y0, y1


def _shape_2d(phi_x, dphi_x, phi_y, dphi_y, hx, hy):
    """Tensor-product values and physical gradients at the quadrature grid.

    Output arrays have shape (n_local, nqy, nqx).
    """
    n1 = phi_x.shape[0]
    val = np.einsum("jb,ia->jiba", phi_y, phi_x).reshape(n1 * n1, phi_y.shape[1], phi_x.shape[1])
    gx = np.einsum("jb,ia->jiba", phi_y, dphi_x).reshape(val.shape) * (2.0 / hx)
    gy = np.einsum("jb,ia->jiba", dphi_y, phi_x).reshape(val.shape) * (2.0 / hy)
    return val, gx, gy


def local_matrices(element: ReferenceElement, cell, alpha: Coefficient = 1.0):
    """Mass and stiffness matrices of one rectangular cell.

    ``cell`` is ``(x0, x1, y0, y1)``. ``alpha`` is a positive constant or a
    vectorised callable ``alpha(x, y)`` evaluated at the quadrature points.
    """
    x0, x1, y0, y1 = _check_cell(cell)
    hx, hy = x1 - x0, y1 - y0
    q = element.quad
    w2 = np.outer(q.weights, q.weights) * (0.25 * hx * hy)
    val, gx, gy = _shape_2d(element.phi, element.dphi, element.phi, element.dphi, hx, hy)
    if callable(alpha):
        xq, _ = q.mapped(x0, x1)
        yq, _ = q.mapped(y0, y1)
        X, Y = np.meshgrid(xq, yq)
        a = np.asarray(alpha(X, Y), dtype=float) * np.ones_like(X)
        if np.any(a <= 0):
            raise ValueError("coefficient alpha must be positive")
    else:
        if alpha <= 0:
            raise ValueError(f"coefficient alpha must be positive, got {alpha}")
        a = float(alpha)
    mass = np.einsum("iab,jab,ab->ij", val, val, w2)
    stiff = np.einsum("iab,jab,ab->ij", gx, gx, a * w2) + np.einsum("iab,jab,ab->ij", gy, gy, a * w2)
    mass = 0.5 * (mass + mass.T)
    stiff = 0.5 * (stiff + stiff.T)
    return mass, stiff


def local_load(element: ReferenceElement, cell, f: Field, t: float = 0.0) -> np.ndarray:
    """Load vector ``int f(., t) phi_i`` over one cell with k+2 points per direction."""
    x0, x1, y0, y1 = _check_cell(cell)
    q = element.quad
    xq, wx = q.mapped(x0, x1)
    yq, wy = q.mapped(y0, y1)
    X, Y = np.meshgrid(xq, yq)
    fv = np.asarray(f(X, Y, t), dtype=float) * np.ones_like(X)
    val, _, _ = _shape_2d(element.phi, element.dphi, element.phi, element.dphi, x1 - x0, y1 - y0)
    return np.einsum("iab,ab->i", val, fv * np.outer(wy, wx))
