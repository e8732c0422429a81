"""Local hierarchical Lagrange basis of bounded degree.

A point on level ``l`` with spacing ``h = 2**-l`` owns a basis function
supported on ``(x - h, x + h)``. Its degree is ``min(p_max, l)``: constant on
level 0, a hat on level 1, and from level 2 on a Lagrange polynomial through
``x - h``, ``x + h`` and the nearest hierarchical ancestors of ``x``, cut off
outside the support.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

from hgsg.exceptions import DegreeError, ShapeError
from hgsg.lattice import Coord1D, LatticePoint, ancestor_chain_1d, coordinate_1d


@dataclass(frozen=True)
class DegreeRule:
    """Maximum polynomial degree of the local basis."""

    p_max: int = 1

    def __post_init__(self):
        if int(self.p_max) < 1:
            raise DegreeError(f"p_max must be >= 1, got {self.p_max}")

    def degree(self, level: int) -> int:
        return degree_for_level(level, self.p_max)


def _as_rule(rule) -> DegreeRule:
    return rule if isinstance(rule, DegreeRule) else DegreeRule(int(rule))


def degree_for_level(level: int, p_max: int) -> int:
    return min(p_max, level)


def half_width(level: int) -> float:
    """Support half width; levels 0 and 1 both use 0.5."""
    return 0.5 if level <= 1 else 2.0 ** -level


def support_nodes(c: Coord1D, p: int) -> tuple:
    """Zero nodes of the degree ``p`` basis function centred at ``c``.

    Raises
    ------
    DegreeError
        If ``p`` exceeds the level of ``c`` or is not positive.
    """
    level = c[0]
    if p < 1 or p > level:
        raise DegreeError(f"degree {p} needs level >= {p}, point is on level {level}")
    x = coordinate_1d(c)
    if level == 1:
        return (0.5,)
    h = half_width(level)
    nodes = [x - h, x + h]
    if p == 1:
        return tuple(nodes)
    for a in ancestor_chain_1d(c):
        if len(nodes) == p:
            break
        ax = coordinate_1d(a)
        if ax not in nodes:
            nodes.append(ax)
    return tuple(nodes)


@dataclass(frozen=True)
class BasisSpec:
    """One-dimensional basis function descriptor."""

    center: Coord1D
    degree: int
    nodes: tuple

    @property
    def x(self) -> float:
        return coordinate_1d(self.center)

    @property
    def h(self) -> float:
        return half_width(self.center[0])

    @property
    def support(self) -> tuple:
        if self.center[0] == 0:
            return (0.0, 1.0)
        return (max(0.0, self.x - self.h), min(1.0, self.x + self.h))

    @property
    def scale(self) -> float:
        """Reciprocal of the Lagrange denominator."""
        return 1.0 / math.prod(self.x - xk for xk in self.nodes)


@lru_cache(maxsize=None)
def basis_of_degree(level: int, pos: int, degree: int) -> BasisSpec:
    c = Coord1D(level, pos)
    nodes = () if degree == 0 else support_nodes(c, degree)
    return BasisSpec(c, degree, nodes)


def make_basis(level: int, pos: int, p_max: int) -> BasisSpec:
    """Basis of the point ``(level, pos)`` under the degree cap ``p_max``."""
    return basis_of_degree(level, pos, degree_for_level(level, p_max))


def eval_1d(spec: BasisSpec, x):
    """Evaluate ``spec`` at ``x`` (scalar or array); zero off the open support."""
    xs = np.asarray(x, dtype=float)
    if spec.degree == 0:
        out = np.ones_like(xs)
        return float(out) if out.ndim == 0 else out
    xc, h = spec.x, spec.h
    dist = np.abs(xs - xc)
    if spec.degree == 1:
        val = 1.0 - dist / h
    else:
        val = np.full_like(xs, spec.scale)
        for xk in spec.nodes:
            val = val * (xs - xk)
    val = np.where(dist < h, val, 0.0)
    return float(val) if val.ndim == 0 else val


@lru_cache(maxsize=8)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=None)
def _volume(level: int, pos: int, degree: int) -> float:
    spec = basis_of_degree(level, pos, degree)
    if degree == 0:
        return 1.0
    lo, hi = spec.support
    xc = spec.x
    # exact for the polynomial on each side of the centre
    t, w = _gauss_legendre(-(-(degree + 1) // 2))
    total = 0.0
    for a, b in ((lo, xc), (xc, hi)):
        if b > a:
            xs = 0.5 * (b - a) * t + 0.5 * (a + b)
            total += 0.5 * (b - a) * float(np.dot(w, eval_1d(spec, xs)))
    return total


def volume_1d(spec: BasisSpec) -> float:
    """Integral of the basis function over [0, 1]."""
    return _volume(spec.center[0], spec.center[1], spec.degree)


def eval_nd(p: LatticePoint, rule, x) -> float:
    """Tensor product basis of point ``p`` at ``x``."""
    rule = _as_rule(rule)
    if len(x) != len(p.levels):
        raise ShapeError(f"expected a vector of length {len(p.levels)}, got {len(x)}")
    out = 1.0
    for lv, ps, xv in zip(p.levels, p.positions, x):
        if lv == 0:
            continue
        out *= eval_1d(make_basis(lv, ps, rule.p_max), xv)
        if out == 0.0:
            break
    return out


def volume_nd(p: LatticePoint, rule) -> float:
    """Quadrature weight of point ``p``: product of 1D volumes."""
    rule = _as_rule(rule)
    out = 1.0
    for lv, ps in zip(p.levels, p.positions):
        if lv:
            out *= _volume(lv, ps, degree_for_level(lv, rule.p_max))
    return out

