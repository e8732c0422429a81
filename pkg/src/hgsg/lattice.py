"""Exact integer representation of the hierarchical dyadic lattice.

One-dimensional layout:

* level 0 holds the single midpoint 0.5 (position 0),
* level 1 holds the two boundary points 0 and 1 (positions 0 and 2),
* level ``l >= 2`` holds the odd multiples ``j * 2**-l`` with ``0 < j < 2**l``.

Points are identified by their integer ``(level, pos)`` pairs, never by
floating point coordinates. The 1D points form a tree: the midpoint has the
two boundaries as children, each boundary has one interior child and every
interior point has two children.

Multi-indices are plain tuples of non-negative ints.
"""

from __future__ import annotations

from typing import Callable, Iterable, NamedTuple, Sequence

from hgsg.exceptions import LatticeRangeError, ShapeError

MultiIndex = tuple


class Coord1D(NamedTuple):
    """Canonical one-dimensional lattice coordinate."""

    level: int
    pos: int

    @property
    def x(self) -> float:
        return coordinate_1d(self)


ROOT_1D = Coord1D(0, 0)


class LatticePoint(NamedTuple):
    """A d-dimensional grid point stored as parallel level/position tuples.

    ``levels`` is the multi-index of the difference space that owns the
    point; ``positions`` are the per-dimension positions on those levels.
    """

    levels: tuple
    positions: tuple

    @classmethod
    def from_coords(cls, coords: Iterable[Sequence[int]]) -> "LatticePoint":
        """Build from ``(level, pos)`` pairs; non-canonical pairs are reduced."""
        coords = [Coord1D(lv, ps) if is_canonical(lv, ps) else canonicalize_1d(lv, ps)
                  for lv, ps in coords]
        return cls(tuple(c.level for c in coords), tuple(c.pos for c in coords))

    @classmethod
    def root(cls, d: int) -> "LatticePoint":
        return cls((0,) * d, (0,) * d)

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def index(self) -> tuple:
        return self.levels

    @property
    def coords(self) -> tuple:
        return tuple(Coord1D(lv, ps) for lv, ps in zip(self.levels, self.positions))

    def coordinates(self) -> list:
        return [_coord(lv, ps) for lv, ps in zip(self.levels, self.positions)]


def _coord(level: int, pos: int) -> float:
    if level == 0:
        return 0.5
    return pos / (1 << level)


def is_canonical(level: int, pos: int) -> bool:
    """True if ``(level, pos)`` is in reduced form."""
    if level == 0:
        return pos == 0
    if level == 1:
        return pos in (0, 2)
    return pos % 2 == 1 and 0 < pos < (1 << level)


def coordinate_1d(c: Coord1D) -> float:
    """Return the real coordinate of a canonical 1D lattice point."""
    return _coord(c[0], c[1])


def canonicalize_1d(level: int, pos: int) -> Coord1D:
    """Reduce the dyadic coordinate ``pos * 2**-level`` to canonical form.

    Raises
    ------
    LatticeRangeError
        If ``level < 0`` or ``pos`` is outside ``[0, 2**level]``.
    """
    level, pos = int(level), int(pos)
    if level < 0 or pos < 0 or pos > (1 << level):
        raise LatticeRangeError(f"position {pos} out of range on level {level}")
    if pos == 0:
        return Coord1D(1, 0)
    if pos == (1 << level):
        return Coord1D(1, 2)
    while pos % 2 == 0:
        pos //= 2
        level -= 1
    if level == 1:
        return ROOT_1D
    return Coord1D(level, pos)


def children_1d(c: Coord1D) -> list:
    """Children of ``c`` in the 1D point tree."""
    level, pos = c
    if level == 0:
        return [Coord1D(1, 0), Coord1D(1, 2)]
    if level == 1:
        return [Coord1D(2, 1 if pos == 0 else 3)]
    return [Coord1D(level + 1, 2 * pos - 1), Coord1D(level + 1, 2 * pos + 1)]


def parent_1d(c: Coord1D):
    """Tree parent of ``c``; ``None`` for the midpoint."""
    level, pos = c
    if level == 0:
        return None
    if level == 1:
        return ROOT_1D
    if level == 2:
        return Coord1D(1, 0 if pos == 1 else 2)
    q = (pos - 1) // 2
    return Coord1D(level - 1, q if q % 2 == 1 else q + 1)


def ancestor_at_level(c: Coord1D, level: int) -> Coord1D:
    """The unique point on ``level`` whose open support contains ``c``.

    ``level`` must not exceed ``c.level``; on ``c.level`` this is ``c`` itself.
    """
    lv, pos = c
    if level > lv:
        raise LatticeRangeError(f"level {level} is finer than {tuple(c)}")
    if level == lv:
        return Coord1D(lv, pos)
    if level == 0:
        return ROOT_1D
    if level == 1:
        # pos * 2**-lv < 0.5 selects the left boundary
        return Coord1D(1, 0 if 2 * pos < (1 << lv) else 2)
    return Coord1D(level, 2 * (pos >> (lv - level + 1)) + 1)


def ancestor_chain_1d(c: Coord1D) -> list:
    """Hierarchical ancestors of ``c`` ordered by distance from it.

    The chain holds the distinct endpoints of every coarser dyadic interval
    containing ``c`` together with the midpoint 0.5. Equal distances are
    resolved left to right.
    """
    level, pos = c
    if level == 0:
        return []
    found = {}
    for m in range(level - 1, 0, -1):
        left = pos >> (level - m)
        for q in (left, left + 1):
            a = canonicalize_1d(m, q)
            found[a] = None
    for a in (Coord1D(1, 0), ROOT_1D, Coord1D(1, 2)):
        found[a] = None
    found.pop(Coord1D(level, pos), None)

    # integer distances in units of 2**-level
    def key(a):
        num = (1 << (level - 1)) if a.level == 0 else a.pos << (level - a.level)
        return abs(num - pos), num

    return sorted(found, key=key)


def forward_neighbourhood(i: Sequence[int]) -> list:
    """The d indices ``i + e_k``."""
    i = tuple(i)
    return [i[:k] + (i[k] + 1,) + i[k + 1:] for k in range(len(i))]


def backward_neighbourhood(i: Sequence[int]) -> list:
    """The indices ``i - e_k`` for every k with ``i_k >= 1``."""
    i = tuple(i)
    return [i[:k] + (i[k] - 1,) + i[k + 1:] for k in range(len(i)) if i[k] > 0]


def is_admissible_index(i: Sequence[int], old) -> bool:
    """True when every backward neighbour of ``i`` lies in ``old``."""
    return all(b in old for b in backward_neighbourhood(i))


def is_downward_closed(indices) -> bool:
    """Check that each index's backward neighbours are in the set as well."""
    s = set(map(tuple, indices))
    return all(is_admissible_index(i, s) for i in s)


def axial_children(p: LatticePoint, dim: int) -> list:
    """Copies of ``p`` with coordinate ``dim`` replaced by each 1D child.

    ``dim`` is zero based.
    """
    if not 0 <= dim < len(p.levels):
        raise LatticeRangeError(f"dimension {dim} out of range for d={len(p.levels)}")
    out = []
    head_l, tail_l = p.levels[:dim], p.levels[dim + 1:]
    head_p, tail_p = p.positions[:dim], p.positions[dim + 1:]
    for ch in children_1d(Coord1D(p.levels[dim], p.positions[dim])):
        out.append(LatticePoint(head_l + (ch.level,) + tail_l, head_p + (ch.pos,) + tail_p))
    return out


def axial_parent(p: LatticePoint, dim: int):
    """``p`` with coordinate ``dim`` replaced by its tree parent, or None."""
    par = parent_1d(Coord1D(p.levels[dim], p.positions[dim]))
    if par is None:
        return None
    lv = p.levels[:dim] + (par.level,) + p.levels[dim + 1:]
    ps = p.positions[:dim] + (par.pos,) + p.positions[dim + 1:]
    return LatticePoint(lv, ps)


def is_admissible_point(p: LatticePoint, created: Callable | set) -> bool:
    """True if at least one axial parent of ``p`` was already created.

    ``created`` is either a container of points or a membership callable.
    The root has no parents and is always admissible.
    """
    contains = created if callable(created) else created.__contains__
    seen_parent = False
    for k, lv in enumerate(p.levels):
        if lv == 0:
            continue
        seen_parent = True
        if contains(axial_parent(p, k)):
            return True
    return not seen_parent


def check_dimension(x, d: int) -> None:
    if len(x) != d:
        raise ShapeError(f"expected a vector of length {d}, got {len(x)}")
