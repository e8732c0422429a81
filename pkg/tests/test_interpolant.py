import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hgsg.adaptive import AdaptiveConfig, run
from hgsg.basis import DegreeRule, eval_nd
from hgsg.exceptions import AdmissibilityError, DuplicatePointError, ShapeError, StateError
from hgsg.functions import make_test_function
from hgsg.interpolant import GridState
from hgsg.lattice import LatticePoint, axial_children


def P(*coords):
    return LatticePoint.from_coords(coords)


ROOT1 = LatticePoint.root(1)


def full_grid(f, d, max_level, p_max):
    """Insert every point with per-dimension level <= max_level, coarse to fine."""
    state = GridState(d, p_max)
    frontier = [LatticePoint.root(d)]
    seen = set()
    while frontier:
        frontier.sort(key=lambda p: (sum(p.levels), p))
        p = frontier.pop(0)
        if p in seen:
            continue
        seen.add(p)
        state.insert_point(p, f(np.array(p.coordinates())))
        for k in range(d):
            if p.levels[k] < max_level:
                frontier += [c for c in axial_children(p, k) if c not in seen]
    return state


def dense_integral(state):
    """Composite Gauss tensor quadrature of the interpolant on its finest dyadic cells."""
    levels = np.array([max(r.point.levels[k] for r in state.records.values()) for k in range(state.d)])
    n = state.rule.p_max + 1
    gx, gw = np.polynomial.legendre.leggauss(n)
    axes = []
    for lv in levels:
        cells = 1 << max(int(lv), 1)
        a = np.arange(cells)[:, None] / cells
        axes.append(((a + (gx + 1) / (2 * cells)).ravel(), np.tile(gw / (2 * cells), cells)))
    X = np.array(list(itertools.product(*[ax[0] for ax in axes])))
    W = np.prod(np.array(list(itertools.product(*[ax[1] for ax in axes]))), axis=1)
    return math.fsum(W * state.evaluate_many(X))


def assert_reproduces(state):
    X = np.array([r.point.coordinates() for r in state.records.values()])
    fv = np.array([r.f_value for r in state.records.values()])
    err = np.abs(state.evaluate_many(X) - fv)
    assert np.all(err <= 1e-10 * (1 + np.abs(fv)))


def test_root_only_is_constant():
    s = GridState(2, 2)
    rec = s.insert_point(LatticePoint.root(2), 3.5)
    assert rec.surplus == 3.5 and rec.weight == 1.0 and rec.active
    X = np.random.default_rng(1).random((20, 2))
    np.testing.assert_array_equal(s.evaluate_many(X), 3.5)
    assert s.integrate() == 3.5


def test_linear_levels_le_1_examples():
    f = lambda x: x[0]
    s = GridState(1, 1)
    for p in (ROOT1, P((1, 0)), P((1, 2))):
        s.insert_point(p, f(p.coordinates()))
    assert s.records[P((1, 0))].surplus == -0.5
    assert s.evaluate([0.25]) == 0.25
    assert s.integrate() == 0.5


def test_first_surpluses():
    f = lambda x: math.sin(3 * x[0]) + 2
    s = GridState(1, 2)
    assert s.compute_surplus(ROOT1, f([0.5])) == f([0.5])
    s.insert_point(ROOT1, f([0.5]))
    assert s.compute_surplus(P((1, 0)), f([0.0])) == pytest.approx(f([0.0]) - f([0.5]), abs=0)


def test_insert_errors():
    s = GridState(1, 1)
    with pytest.raises(AdmissibilityError):
        s.insert_point(P((1, 0)), 0.0)
    s.insert_point(ROOT1, 1.0)
    with pytest.raises(DuplicatePointError):
        s.insert_point(ROOT1, 1.0)
    with pytest.raises(DuplicatePointError):
        s.compute_surplus(ROOT1, 1.0)
    with pytest.raises(AdmissibilityError):
        s.insert_point(P((2, 1)), 0.0)
    with pytest.raises(ShapeError):
        s.insert_point(LatticePoint.root(2), 0.0)
    with pytest.raises(ShapeError):
        s.evaluate([0.1, 0.2])
    with pytest.raises(StateError):
        s.grid((3,))


def test_redundant_points_contribute():
    s = GridState(1, 1)
    s.insert_point(ROOT1, 1.0)
    s.insert_point(P((1, 0)), 0.0, active=False)
    assert s.redundant_points((1,)) == [P((1, 0))]
    assert s.active_points((1,)) == []
    assert s.integrate() == pytest.approx(1.0 - 0.25)


def test_full_level2_grid_reproduces_linear():
    s = full_grid(lambda x: x[0], 1, 2, 1)
    assert len(s) == 5
    for r in s.records.values():
        assert s.evaluate(r.point.coordinates()) == r.f_value


def test_polynomial_exactness_1d():
    s = full_grid(lambda x: x[0] ** 2, 1, 6, 2)
    for r in s.records.values():
        if r.point.levels[0] >= 3:
            assert abs(r.surplus) <= 1e-12
    assert s.integrate() == pytest.approx(1 / 3, abs=1e-15)


def test_polynomial_exactness_2d():
    s = full_grid(lambda x: x[0] ** 2 * x[1] ** 2, 2, 4, 2)
    for r in s.records.values():
        if max(r.point.levels) >= 3:
            assert abs(r.surplus) <= 1e-12
    X = np.random.default_rng(0).random((200, 2))
    np.testing.assert_allclose(s.evaluate_many(X), X[:, 0] ** 2 * X[:, 1] ** 2, atol=1e-12)


def test_evaluate_matches_naive_sum():
    tf = make_test_function("f3", 2, "one_pow2")
    state, _ = run(tf, 2, AdaptiveConfig(epsilon=1e-4, p_max=3, vectorized=True))
    X = np.random.default_rng(3).random((50, 2))
    naive = [sum(r.surplus * eval_nd(r.point, state.rule, x) for r in state.records.values()) for x in X]
    np.testing.assert_allclose(state.evaluate_many(X), naive, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("d, fid, p_max", [(1, "f3", 1), (1, "f2", 4), (2, "f3", 2), (2, "f4", 3),
                                           (3, "f2", 2), (3, "f3", 1)])
def test_quadrature_matches_dense_oracle(d, fid, p_max):
    tf = make_test_function(fid, max(d, 2) if fid == "f4" else d, "ten_pow2")
    cfg = AdaptiveConfig(epsilon=1e-3 if d == 3 else 1e-5, p_max=p_max, vectorized=True, max_level=6)
    state, _ = run(tf, tf.d, cfg)
    assert dense_integral(state) == pytest.approx(state.integrate(), abs=1e-10)


def test_mixed_degree_full_grid_oracle():
    s = full_grid(lambda x: math.exp(x[0] - 2 * x[1]) * math.cos(3 * x[2]), 3, 4, 3)
    assert dense_integral(s) == pytest.approx(s.integrate(), abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.sampled_from(["f2", "f3", "f4"]),
       st.floats(0.1, 0.9), st.sampled_from([1e-2, 1e-3, 1e-4]))
def test_interpolation_reproduction(d, p_max, fid, w, eps):
    if fid == "f4":
        d = max(d, 2)
    tf = make_test_function(fid, d, "ten_pow2", w=w)
    state, _ = run(tf, d, AdaptiveConfig(epsilon=eps, p_max=p_max, vectorized=True, max_level=12))
    assert_reproduces(state)


def test_reproduction_holds_after_every_step():
    tf = make_test_function("f4", 2, "ten_pow2")
    snapshots = []

    def cb(state, step):
        if len(snapshots) < 15:
            assert_reproduces(state)
            snapshots.append(step.n_evaluations)

    run(tf, 2, AdaptiveConfig(epsilon=1e-4, p_max=2, vectorized=True), callback=cb)
    assert len(snapshots) == 15


@pytest.mark.parametrize("d", [1, 2])
def test_dropping_small_terms_bounds_l1_change(d):
    """Dropping records with |v w| < eps moves the L1 error by at most eps per record."""
    tf = make_test_function("f3", d, "ten_pow2", w=0.3)
    eps = 1e-4
    state, _ = run(tf, d, AdaptiveConfig(epsilon=eps, p_max=1, vectorized=True))
    data = state.to_dict()
    small = [r for r in data["records"] if abs(r["surplus"] * r["weight"]) < eps]
    assert small
    data["records"] = [r for r in data["records"] if abs(r["surplus"] * r["weight"]) >= eps]
    reduced = GridState.from_dict(data)

    gx, gw = np.polynomial.legendre.leggauss(4)
    cells = 1 << 9 if d == 1 else 1 << 7
    a = np.arange(cells)[:, None] / cells
    x1 = (a + (gx + 1) / (2 * cells)).ravel()
    w1 = np.tile(gw / (2 * cells), cells)
    X = np.array(list(itertools.product(*[x1] * d)))
    W = np.prod(np.array(list(itertools.product(*[w1] * d))), axis=1)
    truth = tf(X)
    e_full = np.sum(W * np.abs(truth - state.evaluate_many(X)))
    e_red = np.sum(W * np.abs(truth - reduced.evaluate_many(X)))
    assert abs(e_red - e_full) <= eps * len(small)


def test_surplus_independent_of_insertion_order():
    f = lambda x: math.exp(x[0] * x[1]) + x[0]
    pts = [LatticePoint.root(2), P((1, 0), (0, 0)), P((1, 2), (0, 0)), P((0, 0), (1, 0)),
           P((0, 0), (1, 2)), P((1, 0), (1, 2)), P((2, 1), (0, 0)), P((2, 1), (1, 2))]
    a = GridState(2, 2)
    for p in pts:
        a.insert_point(p, f(p.coordinates()))
    b = GridState(2, 2)
    # shuffled, but every multi-index still arrives after the ones below it
    for p in [pts[0], pts[3], pts[4], pts[1], pts[6], pts[5], pts[2], pts[7]]:
        b.insert_point(p, f(p.coordinates()))
    for p in pts:
        assert a.records[p].surplus == pytest.approx(b.records[p].surplus, abs=1e-15)


def test_serialization_round_trip(tmp_path):
    tf = make_test_function("f2", 3, "ten_pow2")
    state, _ = run(tf, 3, AdaptiveConfig(epsilon=1e-4, p_max=4, vectorized=True))
    path = tmp_path / "grid.json"
    state.save(path)
    back = GridState.load(path)
    assert back.to_dict() == state.to_dict()
    assert back.integrate() == state.integrate()
    X = np.random.default_rng(5).random((100, 3))
    np.testing.assert_array_equal(back.evaluate_many(X), state.evaluate_many(X))
    assert list(back.grids) == list(state.grids)


def test_from_dict_rejects_garbage():
    with pytest.raises(StateError):
        GridState.from_dict({"format": "other"})


def test_rule_accepts_int_or_rule():
    assert GridState(2, 3).rule == GridState(2, DegreeRule(3)).rule
