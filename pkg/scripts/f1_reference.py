"""Reference integral of f1 = 1 / (|0.3 - x^2 - y^2| + 0.1) over the unit square.

The inner integral over y is done in closed form on either side of the kink
y = sqrt(0.3 - x^2); the outer integral uses adaptive Gauss-Kronrod with
breakpoints where the inner antiderivative changes form. An independent
mpmath nested quadrature provides the cross-check.

    python scripts/f1_reference.py
"""
import math

import mpmath
from scipy import integrate


def _inner(x):
    s = 0.3 - x * x
    a = 0.4 - x * x            # 1 / (a - y^2) below the kink
    y0 = math.sqrt(s) if s > 0 else 0.0
    y0 = min(y0, 1.0)
    total = 0.0
    if y0 > 0:
        ra = math.sqrt(a)
        total += math.atanh(y0 / ra) / ra
    b = x * x - 0.2            # 1 / (y^2 + b) above the kink
    lo, hi = y0, 1.0
    if hi > lo:
        if b > 0:
            rb = math.sqrt(b)
            total += (math.atan(hi / rb) - math.atan(lo / rb)) / rb
        elif b < 0:
            rb = math.sqrt(-b)
            # 1/(y^2 - rb^2) = (1/(2rb)) (1/(y-rb) - 1/(y+rb)); y > rb here
            total += (math.log((hi - rb) / (hi + rb)) - math.log((lo - rb) / (lo + rb))) / (2 * rb)
        else:
            total += 1.0 / lo - 1.0 / hi
    return total


def closed_inner():
    pts = [math.sqrt(0.2), math.sqrt(0.3)]
    val, err = integrate.quad(_inner, 0.0, 1.0, points=pts, epsabs=1e-13, epsrel=1e-13, limit=500)
    return val, err


def mpmath_nested(dps=20):
    mpmath.mp.dps = dps

    def f(x, y):
        return 1 / (abs(mpmath.mpf("0.3") - x * x - y * y) + mpmath.mpf("0.1"))

    def inner(x):
        s = mpmath.mpf("0.3") - x * x
        pts = [0, mpmath.sqrt(s), 1] if 0 < s < 1 else [0, 1]
        return mpmath.quad(lambda y: f(x, y), pts)

    return mpmath.quad(inner, [0, mpmath.sqrt(mpmath.mpf("0.3")), 1])


if __name__ == "__main__":
    val, err = closed_inner()
    print(f"closed-form inner + quad: {val!r} (est. err {err:.1e})")
    print(f"mpmath nested quadrature: {mpmath.nstr(mpmath_nested(), 17)}")
