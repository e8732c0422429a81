"""Benchmark integrands, coefficient schedules and error metrics.

Four families on ``[0, 1]**d``:

* ``f1``: ``1 / (|0.3 - x1^2 - x2^2| + 0.1)``, two dimensional, kink on a circle
* ``f2``: Gaussian ``exp(-sum c_i^2 (x_i - w_i)^2)``
* ``f3``: ``exp(-sum c_i |x_i - w_i|)``, continuous with derivative jumps
* ``f4``: ``exp(sum c_i x_i)`` on ``x1 <= w1, x2 <= w2`` and 0 elsewhere
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import erf

from hgsg.exceptions import ConfigError, IntegralUndefinedError, ShapeError

FUNCTION_IDS = ("f1", "f2", "f3", "f4")

# Generated by scripts/f1_reference.py (closed-form inner integral, adaptive
# outer quadrature; agrees with a 20-digit mpmath nested quadrature).
F1_REFERENCE_INTEGRAL = 2.9291723937558944

SCHEDULES = ("ten_pow2", "one_pow2", "exp_decay")
_SCHEDULE_ALIASES = {"A": "ten_pow2", "B": "one_pow2", "C": "exp_decay"}


def coefficient_schedule(kind: str, d: int, lam: float = 1.0) -> np.ndarray:
    """Coefficients ``c_1..c_d``.

    ``ten_pow2`` is ``10 / 2**(i + 2)``, ``one_pow2`` is ``1 / 2**(i + 2)``
    and ``exp_decay`` is ``lam * exp(-35 i / d)``, all with ``i = 1..d``.
    The letters ``A``, ``B`` and ``C`` are accepted as aliases.
    """
    kind = _SCHEDULE_ALIASES.get(kind, kind)
    if int(d) < 1:
        raise ConfigError("d", f"must be >= 1, got {d}")
    i = np.arange(1, int(d) + 1, dtype=float)
    if kind == "ten_pow2":
        return 10.0 / 2.0 ** (i + 2)
    if kind == "one_pow2":
        return 1.0 / 2.0 ** (i + 2)
    if kind == "exp_decay":
        if not lam > 0:
            raise ConfigError("lambda", f"must be positive, got {lam}")
        return lam * np.exp(-35.0 * i / d)
    raise ConfigError("schedule", f"unknown schedule {kind!r}; expected one of {SCHEDULES}")


@dataclass(frozen=True)
class TestFunction:
    """One member of the benchmark families, callable on points or batches."""

    __test__ = False  # not a pytest class

    id: str
    d: int
    c: tuple = ()
    w: tuple = ()

    def __post_init__(self):
        if self.id not in FUNCTION_IDS:
            raise ConfigError("function", f"unknown function {self.id!r}; expected one of {FUNCTION_IDS}")
        if self.id == "f1" and self.d != 2:
            raise ConfigError("d", "f1 is two dimensional")
        if self.id == "f4" and self.d < 2:
            raise ConfigError("d", "f4 needs d >= 2")
        if self.id != "f1":
            if len(self.c) != self.d or len(self.w) != self.d:
                raise ConfigError("c", f"need {self.d} coefficients and shifts")

    def __call__(self, x):
        return eval_test_function(self, x)

    def integral(self) -> float:
        return analytic_integral(self)


def make_test_function(fid: str, d: int, schedule: str | None = None, lam: float = 1.0,
                       w=None, c=None) -> TestFunction:
    """Build a test function from a coefficient schedule or explicit ``c``."""
    d = int(d)
    if fid == "f1":
        return TestFunction("f1", d)
    if c is None:
        if schedule is None:
            raise ConfigError("schedule", f"{fid} needs a coefficient schedule or explicit c")
        c = coefficient_schedule(schedule, d, lam)
    w = np.full(d, 0.5) if w is None else np.broadcast_to(np.asarray(w, dtype=float), (d,))
    return TestFunction(fid, d, tuple(float(v) for v in c), tuple(float(v) for v in w))


def eval_test_function(tf: TestFunction, x):
    """Evaluate at one point (shape ``(d,)``) or a batch (shape ``(n, d)``)."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[-1] != tf.d or X.ndim != 2:
        raise ShapeError(f"{tf.id} takes points of dimension {tf.d}, got shape {np.shape(x)}")
    if tf.id == "f1":
        out = 1.0 / (np.abs(0.3 - X[:, 0] ** 2 - X[:, 1] ** 2) + 0.1)
    else:
        c = np.asarray(tf.c)
        w = np.asarray(tf.w)
        if tf.id == "f2":
            out = np.exp(-np.sum(c ** 2 * (X - w) ** 2, axis=1))
        elif tf.id == "f3":
            out = np.exp(-np.sum(c * np.abs(X - w), axis=1))
        else:
            inside = (X[:, 0] <= w[0]) & (X[:, 1] <= w[1])
            # row sums rather than a matmul keep values independent of batch size
            out = np.where(inside, np.exp(np.sum(X * c, axis=1)), 0.0)
    return float(out[0]) if single else out


def analytic_integral(tf: TestFunction):
    """Exact integral over the unit cube, or None for ``f1``.

    ``f1`` has no closed form here; use :data:`F1_REFERENCE_INTEGRAL`.
    """
    if tf.id == "f1":
        return None
    c = np.asarray(tf.c)
    w = np.asarray(tf.w)
    if tf.id == "f2":
        terms = math.sqrt(math.pi) / (2 * c) * (erf(c * (1 - w)) + erf(c * w))
    elif tf.id == "f3":
        # expm1 form: the schedules reach c ~ 1e-15 where 2 - e^a - e^b cancels
        terms = -(np.expm1(-c * w) + np.expm1(-c * (1 - w))) / c
    else:
        limits = np.ones(tf.d)
        limits[:2] = w[:2]
        terms = np.expm1(c * limits) / c
    return float(np.prod(terms))


def reference_integral(tf: TestFunction) -> float:
    value = analytic_integral(tf)
    return F1_REFERENCE_INTEGRAL if value is None else value


@dataclass(frozen=True)
class ErrorMetrics:
    n_samples: int
    seed: int
    linf: float
    l2: float
    integral: float


def compute_metrics(truth, approx, exact_integral: float, n_samples: int = 1000, seed: int = 0,
                    approx_integral: float | None = None) -> ErrorMetrics:
    """Sample-based interpolation errors plus the signed relative integral error.

    Parameters
    ----------
    truth : callable
        Batch callable ``truth(X) -> values`` on ``(n, d)`` arrays.
    approx : GridState or callable
        Anything with ``evaluate_many`` and ``integrate``, or a batch callable
        (then ``approx_integral`` must be given).
    exact_integral : float
    n_samples, seed : int
        Points are drawn i.i.d. uniform on the unit cube from
        ``numpy.random.default_rng(seed)``.
    """
    if int(n_samples) < 1:
        raise ConfigError("n_samples", "must be >= 1")
    if exact_integral == 0:
        raise IntegralUndefinedError("relative integral error needs a nonzero reference")
    if hasattr(approx, "evaluate_many"):
        d = approx.d
        g = approx.evaluate_many
        i_approx = approx.integrate() if approx_integral is None else approx_integral
    else:
        d = getattr(truth, "d", None)
        g = approx
        i_approx = approx_integral
        if d is None or i_approx is None:
            raise ConfigError("approx", "callable approximations need d and approx_integral")
    rng = np.random.default_rng(seed)
    X = rng.random((int(n_samples), d))
    err = np.abs(np.asarray(truth(X), dtype=float) - np.asarray(g(X), dtype=float))
    return ErrorMetrics(
        n_samples=int(n_samples),
        seed=seed,
        linf=float(err.max()),
        l2=float(np.sqrt(np.mean(err ** 2))),
        integral=(i_approx - exact_integral) / exact_integral,
    )
