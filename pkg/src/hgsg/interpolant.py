"""Storage, evaluation and integration of a hierarchical sparse grid interpolant.

Points are grouped by the multi-index of their difference space. Within one
multi-index the supports of the basis functions are pairwise disjoint, so at
any ``x`` at most one stored point per multi-index contributes. Evaluation
therefore walks the multi-indices and looks up the single candidate cell in
each, instead of summing over every stored point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import json

import numpy as np

from hgsg.basis import DegreeRule, _as_rule, basis_of_degree, degree_for_level, eval_1d, volume_nd
from hgsg.exceptions import AdmissibilityError, DuplicatePointError, ShapeError, StateError
from hgsg.lattice import Coord1D, LatticePoint, ancestor_at_level, is_admissible_point, is_canonical

FORMAT_VERSION = 1


@dataclass(frozen=True)
class SurplusRecord:
    point: LatticePoint
    f_value: float
    surplus: float
    weight: float
    active: bool

    @property
    def index(self) -> tuple:
        return self.point.levels


@lru_cache(maxsize=1 << 20)
def _basis_at_node(level, pos, degree, node_level, node_pos) -> float:
    # value of the basis at (level, pos) at the lattice coordinate (node_level, node_pos)
    if degree == 0:
        return 1.0
    x = 0.5 if node_level == 0 else node_pos / (1 << node_level)
    return eval_1d(basis_of_degree(level, pos, degree), x)


class _IndexGrid:
    """Points of one multi-index and their active/redundant partition."""

    def __init__(self, index: tuple, seq: int):
        self.index = index
        self.seq = seq
        self.dims = tuple(k for k, lv in enumerate(index) if lv > 0)
        self.levels = tuple(index[k] for k in self.dims)
        self.records = []
        self.lookup = {}
        self.active = []
        self.redundant = []
        self.signed_sum = 0.0
        self._arrays = None

    def add(self, rec: SurplusRecord) -> None:
        key = tuple(rec.point.positions[k] for k in self.dims)
        self.lookup[key] = len(self.records)
        self.records.append(rec)
        (self.active if rec.active else self.redundant).append(rec.point)
        self.signed_sum += rec.surplus * rec.weight
        self._arrays = None

    def arrays(self, p_max: int):
        if self._arrays is None:
            self._arrays = _GridArrays(self, p_max)
        return self._arrays


class _GridArrays:
    """Vectorised view of one index grid for batch evaluation."""

    def __init__(self, grid: _IndexGrid, p_max: int):
        n = len(grid.records)
        self.n = n
        self.surplus = np.array([r.surplus for r in grid.records], dtype=float)
        self.dims = grid.dims
        self.levels = grid.levels
        # mixed radix cell numbering; level 1 has 2 cells, level m >= 2 has 2**(m-1)
        bits = [max(1, m - 1) for m in grid.levels]
        self.shifts = np.cumsum([0] + bits[:-1]).astype(np.int64) if bits else np.zeros(0, np.int64)
        self.use_int_keys = sum(bits) <= 62
        cells = np.array(
            [[r.point.positions[k] >> 1 for k in grid.dims] for r in grid.records], dtype=np.int64
        ).reshape(n, len(grid.dims))
        if self.use_int_keys:
            keys = (cells << self.shifts).sum(axis=1) if grid.dims else np.zeros(n, np.int64)
            self.order = np.argsort(keys, kind="stable")
            self.keys = keys[self.order]
        else:
            self.lookup = {tuple(row): i for i, row in enumerate(cells.tolist())}
        self.factors = []
        for col, (k, m) in enumerate(zip(grid.dims, grid.levels)):
            deg = degree_for_level(m, p_max)
            specs = [basis_of_degree(m, r.point.positions[k], deg) for r in grid.records]
            centers = np.array([s.x for s in specs])
            if deg >= 2:
                nodes = np.array([s.nodes for s in specs]).reshape(n, deg)
                scale = np.array([s.scale for s in specs])
            else:
                nodes = scale = None
            h = 0.5 if m <= 1 else 2.0 ** -m
            self.factors.append((deg, h, centers, nodes, scale))

    def evaluate(self, X: np.ndarray, out: np.ndarray) -> None:
        """Add this grid's contribution at the rows of ``X`` to ``out``."""
        if self.n == 0:
            return
        if not self.dims:
            out += self.surplus[0]
            return
        sub = X[:, self.dims]
        valid = np.ones(len(X), dtype=bool)
        cells = np.empty(sub.shape, dtype=np.int64)
        for col, m in enumerate(self.levels):
            x = sub[:, col]
            if m == 1:
                valid &= x != 0.5
                cells[:, col] = x > 0.5
            else:
                t = x * (1 << (m - 1))
                c = np.floor(t)
                # even multiples of h sit on a support boundary
                valid &= t != c
                cells[:, col] = c
        if self.use_int_keys:
            q = (cells << self.shifts).sum(axis=1)
            loc = np.searchsorted(self.keys, q)
            loc = np.minimum(loc, self.n - 1)
            valid &= self.keys[loc] == q
            hit = np.nonzero(valid)[0]
            if hit.size == 0:
                return
            rows = self.order[loc[hit]]
        else:
            hit, rows = [], []
            for s in np.nonzero(valid)[0]:
                r = self.lookup.get(tuple(cells[s].tolist()))
                if r is not None:
                    hit.append(s)
                    rows.append(r)
            if not hit:
                return
            hit, rows = np.array(hit), np.array(rows)
        val = self.surplus[rows].copy()
        for col, (deg, h, centers, nodes, scale) in enumerate(self.factors):
            x = sub[hit, col]
            if deg == 1:
                val *= 1.0 - np.abs(x - centers[rows]) / h
            else:
                val *= scale[rows] * np.prod(x[:, None] - nodes[rows], axis=1)
        out[hit] += val


class GridState:
    """The evolving sparse grid approximation.

    Parameters
    ----------
    d : int
        Number of input dimensions.
    rule : DegreeRule or int
        Maximum basis degree.
    """

    def __init__(self, d: int, rule=1):
        if int(d) < 1:
            raise ShapeError(f"dimension must be >= 1, got {d}")
        self.d = int(d)
        self.rule = _as_rule(rule)
        self.old = {}
        self.active = {}
        self.discarded = {}
        self.grids = {}
        self.records = {}
        self.index_error = {}

    # -- bookkeeping -------------------------------------------------------
    @property
    def n_evaluations(self) -> int:
        return len(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, point) -> bool:
        return point in self.records

    def grid(self, index) -> _IndexGrid:
        index = tuple(index)
        try:
            return self.grids[index]
        except KeyError:
            raise StateError(f"index {index} has not been created") from None

    def _grid_for(self, index: tuple) -> _IndexGrid:
        g = self.grids.get(index)
        if g is None:
            g = self.grids[index] = _IndexGrid(index, len(self.grids))
        return g

    def active_points(self, index) -> list:
        g = self.grids.get(tuple(index))
        return [] if g is None else list(g.active)

    def redundant_points(self, index) -> list:
        g = self.grids.get(tuple(index))
        return [] if g is None else list(g.redundant)

    def root_record(self):
        return self.records.get(LatticePoint.root(self.d))

    # -- evaluation --------------------------------------------------------
    def _check_x(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ShapeError(f"expected points of dimension {self.d}, got shape {np.shape(X)}")
        return X

    def evaluate_many(self, X) -> np.ndarray:
        """Interpolant values at the rows of ``X`` (shape ``(n, d)``)."""
        X = self._check_x(X)
        out = np.zeros(len(X))
        p_max = self.rule.p_max
        for g in self.grids.values():
            g.arrays(p_max).evaluate(X, out)
        return out

    def evaluate(self, x) -> float:
        """Interpolant value at a single point ``x``."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ShapeError("evaluate takes a single d-vector; use evaluate_many")
        return float(self.evaluate_many(x)[0])

    def _lower_grids(self, index: tuple) -> list:
        """Created grids whose multi-index is componentwise <= ``index``.

        Relies on the created index set being downward closed.
        """
        root = (0,) * self.d
        if root not in self.grids:
            return []
        nz = [k for k, lv in enumerate(index) if lv > 0]
        seen = {root}
        stack = [root]
        while stack:
            j = stack.pop()
            for k in nz:
                if j[k] < index[k]:
                    jj = j[:k] + (j[k] + 1,) + j[k + 1:]
                    if jj not in seen and jj in self.grids:
                        seen.add(jj)
                        stack.append(jj)
        # index order rather than creation order keeps surpluses independent of run history
        return [self.grids[j] for j in sorted(seen)]

    def interpolate_at_point(self, point: LatticePoint, lower=None) -> float:
        """Current interpolant at a lattice point, by exact ancestor lookups.

        Only grids below the point's multi-index can be nonzero there.
        """
        levels, positions = point
        if lower is None:
            lower = self._lower_grids(levels)
        p_max = self.rule.p_max
        chains = {}
        for k, lv in enumerate(levels):
            if lv:
                c = Coord1D(lv, positions[k])
                chains[k] = [ancestor_at_level(c, m).pos for m in range(lv + 1)]
        total = 0.0
        for g in lower:
            key = tuple(chains[k][m] for k, m in zip(g.dims, g.levels))
            row = g.lookup.get(key)
            if row is None:
                continue
            val = g.records[row].surplus
            for k, m, qpos in zip(g.dims, g.levels, key):
                val *= _basis_at_node(m, qpos, degree_for_level(m, p_max), levels[k], positions[k])
                if val == 0.0:
                    break
            total += val
        return total

    def compute_surplus(self, point: LatticePoint, f_value: float, lower=None) -> float:
        """``f_value`` minus the current interpolant at ``point``."""
        if point in self.records:
            raise DuplicatePointError(f"point {point} already stored")
        return float(f_value) - self.interpolate_at_point(point, lower)

    def integrate(self) -> float:
        """Sum of surplus times weight over all stored points."""
        total = 0.0
        for g in self.grids.values():
            for r in g.records:
                total += r.surplus * r.weight
        return total

    # -- mutation ----------------------------------------------------------
    def insert_point(self, point: LatticePoint, f_value: float, active: bool = True,
                     surplus=None) -> SurplusRecord:
        """Evaluate the surplus of a new point and store it.

        ``surplus`` may be passed when it was already computed against the
        current state.
        """
        point = LatticePoint(tuple(point[0]), tuple(point[1]))
        if len(point.levels) != self.d:
            raise ShapeError(f"point has dimension {len(point.levels)}, grid has {self.d}")
        if point in self.records:
            raise DuplicatePointError(f"point {point} already stored")
        if self.records and not is_admissible_point(point, self.records):
            raise AdmissibilityError(f"no axial parent of {point} has been created")
        if not self.records and any(point.levels):
            raise AdmissibilityError("the first point must be the root")
        if surplus is None:
            surplus = self.compute_surplus(point, f_value)
        rec = SurplusRecord(point, float(f_value), float(surplus), volume_nd(point, self.rule), bool(active))
        self.records[point] = rec
        self._grid_for(point.levels).add(rec)
        return rec

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format": "hgsg-grid",
            "version": FORMAT_VERSION,
            "d": self.d,
            "p_max": self.rule.p_max,
            "old": [list(i) for i in self.old],
            "active": [list(i) for i in self.active],
            "discarded": [list(i) for i in self.discarded],
            "index_error": [[list(i), e] for i, e in self.index_error.items()],
            "records": [
                {
                    "levels": list(r.point.levels),
                    "positions": list(r.point.positions),
                    "f_value": r.f_value,
                    "surplus": r.surplus,
                    "weight": r.weight,
                    "active": r.active,
                }
                for g in self.grids.values() for r in g.records
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridState":
        if data.get("format") != "hgsg-grid":
            raise StateError("not a serialized hgsg grid")
        state = cls(data["d"], DegreeRule(data["p_max"]))
        # admission order recreates the grids, empty ones included, in creation order
        for i, _ in data["index_error"]:
            state._grid_for(tuple(i))
        for item in data["records"]:
            levels, positions = tuple(item["levels"]), tuple(item["positions"])
            if len(levels) != state.d or not all(is_canonical(l, p) for l, p in zip(levels, positions)):
                raise StateError(f"bad record {levels}, {positions}")
            pt = LatticePoint(levels, positions)
            rec = SurplusRecord(pt, float(item["f_value"]), float(item["surplus"]),
                                float(item["weight"]), bool(item["active"]))
            state.records[pt] = rec
            state._grid_for(levels).add(rec)
        state.old = {tuple(i): None for i in data["old"]}
        state.active = {tuple(i): None for i in data["active"]}
        state.discarded = {tuple(i): None for i in data["discarded"]}
        state.index_error = {tuple(i): float(e) for i, e in data["index_error"]}
        return state

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "GridState":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
