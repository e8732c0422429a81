"""Greedy dimension-adaptive index selection with local point refinement.

The driver keeps an old and an active set of multi-indices. It repeatedly
moves the active index with the largest error indicator to the old set and
creates every forward neighbour whose backward neighbours are all old. A new
index grid only receives the axial children of the *active* points of its
backward neighbours; a point is active when its own indicator reaches the
tolerance, otherwise it is kept as redundant and never refined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math

import numpy as np

from hgsg.basis import DegreeRule, volume_nd
from hgsg.exceptions import AdmissibilityError, ConfigError, EvaluationError, StateError
from hgsg.interpolant import GridState, SurplusRecord
from hgsg.lattice import LatticePoint, axial_children, is_admissible_index, is_admissible_point

logger = logging.getLogger(__name__)

INDICATOR_MODES = ("absolute", "relative")
TERMINATION_MODES = ("classic", "modified")


@dataclass
class AdaptiveConfig:
    """Settings of one adaptive run.

    ``termination="modified"`` only keeps newly created indices whose error
    reaches ``epsilon`` in the active set; ``"classic"`` keeps all of them.
    """

    epsilon: float = 1e-6
    p_max: int = 1
    indicator: str = "absolute"
    termination: str = "modified"
    max_points: int = 2_000_000
    max_level: int = 30
    seed: int = 0
    vectorized: bool = False

    def __post_init__(self):
        if not (isinstance(self.epsilon, (int, float)) and self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ConfigError("epsilon", f"must be a positive number, got {self.epsilon!r}")
        if int(self.p_max) < 1:
            raise ConfigError("p_max", f"must be >= 1, got {self.p_max!r}")
        if self.indicator not in INDICATOR_MODES:
            raise ConfigError("indicator", f"must be one of {INDICATOR_MODES}, got {self.indicator!r}")
        if self.termination not in TERMINATION_MODES:
            raise ConfigError("termination", f"must be one of {TERMINATION_MODES}, got {self.termination!r}")
        if int(self.max_points) < 1:
            raise ConfigError("max_points", "must be positive")
        if int(self.max_level) < 1:
            raise ConfigError("max_level", "must be positive")

    @property
    def rule(self) -> DegreeRule:
        return DegreeRule(int(self.p_max))


@dataclass
class StepLog:
    index: tuple
    index_error: float
    points_created: int
    n_evaluations: int
    global_error: float


@dataclass
class RefineReport:
    n_evaluations: int = 0
    global_error: float = math.inf
    reason: str = "converged"
    steps: list = field(default_factory=list)
    admitted: list = field(default_factory=list)


@dataclass
class CreatedGrid:
    index: tuple
    records: list

    @property
    def n_points(self) -> int:
        return len(self.records)


def _normalizer(state: GridState, mode: str) -> float:
    if mode == "absolute":
        return 1.0
    root = state.root_record()
    if root is None:
        raise StateError("relative indicators need the root surplus")
    scale = abs(root.surplus * root.weight)
    # a vanishing root term leaves nothing to normalise by
    return scale if scale > 0.0 else 1.0


def point_error(record: SurplusRecord, state: GridState, mode: str = "absolute") -> float:
    """Local indicator ``|v * w|``, optionally relative to the root term."""
    return abs(record.surplus * record.weight) / _normalizer(state, mode)


def index_error(state: GridState, index, mode: str = "absolute") -> float:
    """``|sum of v * w|`` over all stored points of ``index``."""
    g = state.grid(index)
    return abs(g.signed_sum) / _normalizer(state, mode)


def global_error(state: GridState, mode: str = "absolute") -> float:
    """Sum of the index errors over the active set (0 if it is empty)."""
    return math.fsum(index_error(state, i, mode) for i in state.active)


def _evaluate(f, points, vectorized: bool) -> list:
    X = np.array([p.coordinates() for p in points], dtype=float).reshape(len(points), -1)
    if vectorized and len(points):
        try:
            vals = np.asarray(f(X), dtype=float).reshape(-1)
        except Exception as exc:
            raise EvaluationError(points, X[0], exc) from exc
        return vals.tolist()
    out = []
    for p, x in zip(points, X):
        try:
            out.append(float(f(x)))
        except Exception as exc:
            raise EvaluationError(p, x, exc) from exc
    return out


def create_grid(state: GridState, index, f, epsilon: float, mode: str = "absolute",
                vectorized: bool = False) -> CreatedGrid:
    """Create the points of ``index`` by refining its backward neighbours.

    For every dimension ``n`` with ``index[n] >= 1`` the active points of
    ``index - e_n`` spawn their axial children in dimension ``n``. Each new
    point is evaluated once, receives its surplus against the current
    interpolant and is classified active (``gamma >= epsilon``) or redundant.
    The root index receives the single midpoint.
    """
    index = tuple(index)
    if len(index) != state.d:
        raise AdmissibilityError(f"index {index} does not have dimension {state.d}")
    if index in state.grids:
        raise StateError(f"index {index} was already created")
    if not is_admissible_index(index, state.old):
        raise AdmissibilityError(f"backward neighbours of {index} are not all old")

    candidates = {}
    if not any(index):
        candidates[LatticePoint.root(state.d)] = None
    else:
        for n, lv in enumerate(index):
            if lv == 0:
                continue
            src = index[:n] + (lv - 1,) + index[n + 1:]
            for p in state.active_points(src):
                for c in axial_children(p, n):
                    candidates.setdefault(c, None)
    points = [c for c in candidates
              if c not in state.records and is_admissible_point(c, state.records)]
    state._grid_for(index)
    if not points:
        return CreatedGrid(index, [])

    values = _evaluate(f, points, vectorized)
    # same-index supports are disjoint, so all surpluses use one snapshot
    lower = state._lower_grids(index)
    surpluses = [fv - state.interpolate_at_point(p, lower) for p, fv in zip(points, values)]
    norm = 1.0 if mode == "absolute" else None
    records = []
    for p, fv, v in zip(points, values, surpluses):
        if norm is None:
            # the root must exist before anything can be relative to it
            norm = _normalizer(state, mode) if state.records else (abs(v) or 1.0)
        gamma = abs(v * volume_nd(p, state.rule)) / norm
        records.append(state.insert_point(p, fv, active=gamma >= epsilon, surplus=v))
    return CreatedGrid(index, records)


def run(f, d: int, config: AdaptiveConfig | None = None, callback=None):
    """Build an adaptive sparse grid interpolant of ``f`` on ``[0, 1]**d``.

    Parameters
    ----------
    f : callable
        ``f(x)`` for a length ``d`` array, or ``f(X)`` on an ``(n, d)`` array
        when ``config.vectorized`` is set.
    d : int
        Number of dimensions.
    config : AdaptiveConfig, optional
    callback : callable, optional
        Called as ``callback(state, step_log)`` after every refinement step.

    Returns
    -------
    state : GridState
    report : RefineReport
    """
    config = config or AdaptiveConfig()
    eps = float(config.epsilon)
    mode = config.indicator
    state = GridState(d, config.rule)
    report = RefineReport()

    root = (0,) * state.d
    state.active[root] = None
    create_grid(state, root, f, eps, mode, config.vectorized)
    state.index_error[root] = index_error(state, root, mode)
    report.admitted.append(root)
    # exact running sum, so r always equals a fresh fsum over the active set
    r = Fraction(state.index_error[root])

    while float(r) > eps:
        if not state.active:
            r = Fraction(0)
            break
        if state.n_evaluations >= config.max_points:
            report.reason = "capped"
            break
        i = max(state.active, key=state.index_error.__getitem__)
        r_i = state.index_error[i]
        del state.active[i]
        state.old[i] = None
        r -= Fraction(r_i)
        created = 0
        for k in range(state.d):
            j = i[:k] + (i[k] + 1,) + i[k + 1:]
            if not is_admissible_index(j, state.old):
                continue
            if j[k] > config.max_level:
                report.reason = "capped"
                continue
            state.active[j] = None
            created += create_grid(state, j, f, eps, mode, config.vectorized).n_points
            r_j = index_error(state, j, mode)
            state.index_error[j] = r_j
            report.admitted.append(j)
            if config.termination == "modified" and r_j < eps:
                del state.active[j]
                state.discarded[j] = None
            else:
                r += Fraction(r_j)
        step = StepLog(i, r_i, created, state.n_evaluations, float(r))
        report.steps.append(step)
        if callback is not None:
            callback(state, step)
        if report.reason == "capped":
            break

    report.n_evaluations = state.n_evaluations
    report.global_error = float(r)
    logger.debug("adaptive run finished: %d points, r=%g (%s)",
                 report.n_evaluations, report.global_error, report.reason)
    return state, report
