"""Real-argument special functions needed by the amplitude catalog.

Switchover points:

* ``bessel_k``: trapezoid rule on K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt
  (exponentially convergent for this analytic integrand), all x > 0.
* ``airy_ai`` / ``airy_ai_prime``: Maclaurin series on [-7, 1); the
  K_{1/3}, K_{2/3} representation for u >= 1; the oscillatory asymptotic
  expansion for u < -7.
* ``parabolic_cylinder_dmhalf``: D_{-1/2}(u) = sqrt(u / 2 pi) K_{1/4}(u^2 / 4)
  for u > 0; for u <= 0 the defining ODE D'' = (u^2 / 4) D is integrated
  backwards from u = 1.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

from .core import DomainError

AIRY_SERIES_MIN = -7.0
AIRY_BESSEL_MIN = 1.0
PCF_ODE_START = 1.0

_AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)
_AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)


def _as_array(u):
    arr = np.asarray(u, dtype=float)
    return arr, np.ndim(u) == 0


def _finish(out, scalar):
    return float(out) if scalar else out


# -- modified Bessel K ---------------------------------------------------

_K_STEP = 0.1
_K_TAIL = 50.0


def bessel_k_scaled(nu: float, x) -> np.ndarray:
    """exp(x) * K_nu(x) for x > 0."""
    x, scalar = _as_array(x)
    if np.any(~(x > 0)):
        raise DomainError("bessel_k requires x > 0")
    nu = abs(float(nu))
    flat = x.ravel()
    out = np.empty_like(flat)
    # group by magnitude so small arguments don't force long quadratures on all points
    order = np.argsort(flat)
    for chunk in np.array_split(order, max(1, len(order) // 256)):
        if chunk.size == 0:
            continue
        xs = flat[chunk]
        xmin = xs.min()
        t_max = math.acosh(1.0 + _K_TAIL / xmin)
        # cosh(nu t) growth must also be beaten by the exponential decay
        while xmin * 2.0 * math.sinh(0.5 * t_max) ** 2 - nu * t_max < _K_TAIL:
            t_max += 1.0
        t = np.arange(0.0, t_max + _K_STEP, _K_STEP)
        w = np.full(t.shape, _K_STEP)
        w[0] = 0.5 * _K_STEP
        cm1 = 2.0 * np.sinh(0.5 * t) ** 2
        integrand = np.exp(-np.outer(xs, cm1)) * np.cosh(nu * t)
        out[chunk] = integrand @ w
    return _finish(out.reshape(x.shape), scalar)


def bessel_k(nu: float, x):
    x_arr, scalar = _as_array(x)
    return _finish(np.exp(-x_arr) * bessel_k_scaled(nu, x_arr), scalar)


def bessel_k1(u):
    """Modified Bessel function of the second kind, order one (u > 0)."""
    return bessel_k(1.0, u)


# -- Airy Ai ---------------------------------------------------------------

def _airy_series(u: np.ndarray):
    """Maclaurin series: returns (Ai, Ai')."""
    u3 = u**3
    f = np.ones_like(u)
    g = u.copy()
    fp = np.zeros_like(u)
    gp = np.ones_like(u)
    tf = np.ones_like(u)
    tg = u.copy()
    k = 0
    while True:
        tf = tf * u3 / ((3 * k + 2) * (3 * k + 3))
        tg = tg * u3 / ((3 * k + 3) * (3 * k + 4))
        k += 1
        # derivative terms: d/du u^{3k} = 3k u^{3k-1}
        with np.errstate(divide="ignore", invalid="ignore"):
            dtf = np.where(u != 0, 3 * k * tf / u, 0.0)
            dtg = np.where(u != 0, (3 * k + 1) * tg / u, 0.0)
        f += tf
        g += tg
        fp += dtf
        gp += dtg
        if k > 5 and np.all(np.abs(tf) + np.abs(tg) <= 1e-18 * (np.abs(f) + np.abs(g))):
            break
        if k > 200:  # pragma: no cover
            break
    return _AI0 * f + _AIP0 * g, _AI0 * fp + _AIP0 * gp


def _airy_asym_coeffs(n: int) -> tuple[np.ndarray, np.ndarray]:
    u = [1.0]
    for k in range(1, n):
        num = 1.0
        for j in range(2 * k + 1, 6 * k, 2):
            num *= j
        u.append(num / (216.0**k * math.factorial(k)))
    u = np.array(u)
    v = np.array([1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, n)])
    return u, v


_ASYM_U, _ASYM_V = _airy_asym_coeffs(24)


def _airy_negative_asymptotic(x: np.ndarray):
    """Ai(-x), Ai'(-x) for large positive x."""
    zeta = 2.0 / 3.0 * x**1.5
    phase = zeta - math.pi / 4.0
    c, s = np.cos(phase), np.sin(phase)
    ev_u = np.zeros_like(x)
    od_u = np.zeros_like(x)
    ev_v = np.zeros_like(x)
    od_v = np.zeros_like(x)
    n = len(_ASYM_U)
    prev = np.full_like(x, np.inf)
    done = np.zeros(x.shape, dtype=bool)
    for k in range(n):
        term = zeta ** (-float(k))
        mag = _ASYM_U[k] * term
        # stop each point at its smallest term (optimal truncation)
        done |= mag > prev
        prev = mag
        sign = (-1.0) ** (k // 2)
        use = ~done
        if k % 2 == 0:
            ev_u = ev_u + np.where(use, sign * _ASYM_U[k] * term, 0.0)
            ev_v = ev_v + np.where(use, sign * _ASYM_V[k] * term, 0.0)
        else:
            od_u = od_u + np.where(use, sign * _ASYM_U[k] * term, 0.0)
            od_v = od_v + np.where(use, sign * _ASYM_V[k] * term, 0.0)
    pre = 1.0 / math.sqrt(math.pi)
    ai = pre * x**-0.25 * (c * ev_u + s * od_u)
    aip = pre * x**0.25 * (s * ev_v - c * od_v)
    return ai, aip


def _airy_both(u):
    u, scalar = _as_array(u)
    ai = np.empty_like(u)
    aip = np.empty_like(u)
    pos = u >= AIRY_BESSEL_MIN
    neg = u < AIRY_SERIES_MIN
    mid = ~(pos | neg)
    if np.any(pos):
        up = u[pos]
        zeta = 2.0 / 3.0 * up**1.5
        ai[pos] = np.sqrt(up / 3.0) / math.pi * bessel_k(1.0 / 3.0, zeta)
        aip[pos] = -up / (math.pi * math.sqrt(3.0)) * bessel_k(2.0 / 3.0, zeta)
    if np.any(mid):
        ai[mid], aip[mid] = _airy_series(u[mid])
    if np.any(neg):
        ai[neg], aip[neg] = _airy_negative_asymptotic(-u[neg])
    return ai, aip, scalar


def airy_ai(u):
    """Airy function of the first kind; absolute error below 1e-10 for |u| <= 12.

    For large positive ``u`` the value underflows gracefully to zero.
    """
    ai, _, scalar = _airy_both(u)
    return _finish(ai, scalar)


def airy_ai_prime(u):
    _, aip, scalar = _airy_both(u)
    return _finish(aip, scalar)


# -- parabolic cylinder D_{-1/2} ----------------------------------------------

def _pcf_positive(u: np.ndarray):
    """D_{-1/2}(u) and its derivative for u > 0."""
    x = 0.25 * u**2
    k14 = bessel_k(0.25, x)
    k34 = bessel_k(0.75, x)
    pre = np.sqrt(u / (2.0 * math.pi))
    d = pre * k14
    # K_nu'(x) = -K_{nu-1}(x) - (nu/x) K_nu(x), with K_{-3/4} = K_{3/4}
    dk14 = -k34 - 0.25 / x * k14
    dd = d / (2.0 * u) + pre * 0.5 * u * dk14
    return d, dd


def _pcf_nonpositive(u: np.ndarray, rtol: float = 1e-13):
    start = np.array([PCF_ODE_START])
    d0, dd0 = _pcf_positive(start)
    targets = np.unique(u)[::-1]
    sol = solve_ivp(
        lambda s, y: [y[1], 0.25 * s * s * y[0]],
        (PCF_ODE_START, float(targets[-1])),
        [float(d0[0]), float(dd0[0])],
        method="DOP853",
        rtol=rtol,
        atol=1e-300,
        dense_output=True,
    )
    if not sol.success:  # pragma: no cover
        raise RuntimeError(f"parabolic cylinder ODE failed: {sol.message}")
    vals = sol.sol(u)
    return vals[0], vals[1]


def _pcf_both(u):
    u, scalar = _as_array(u)
    d = np.empty_like(u)
    dd = np.empty_like(u)
    pos = u > 0
    if np.any(pos):
        d[pos], dd[pos] = _pcf_positive(u[pos])
    if np.any(~pos):
        d[~pos], dd[~pos] = _pcf_nonpositive(u[~pos])
    return d, dd, scalar


def parabolic_cylinder_dmhalf(u):
    """Weber parabolic cylinder function D_{-1/2}(u)."""
    d, _, scalar = _pcf_both(u)
    return _finish(d, scalar)


def parabolic_cylinder_dmhalf_prime(u):
    _, dd, scalar = _pcf_both(u)
    return _finish(dd, scalar)
