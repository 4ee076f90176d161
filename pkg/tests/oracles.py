"""Independent reference values used only by the test-suite."""

import mpmath
import numpy as np
from scipy.integrate import quad, solve_ivp

mpmath.mp.dps = 40


def airy_series(u, terms=200):
    """Ai(u) from the Taylor recurrence of y'' = u y, summed in 40-digit arithmetic."""
    u = mpmath.mpf(u)
    a = [mpmath.mpf(3) ** (-mpmath.mpf(2) / 3) / mpmath.gamma(mpmath.mpf(2) / 3),
         -mpmath.mpf(3) ** (-mpmath.mpf(1) / 3) / mpmath.gamma(mpmath.mpf(1) / 3), mpmath.mpf(0)]
    for n in range(terms):
        a.append(a[n] / ((n + 3) * (n + 2)))
    return float(mpmath.fsum(c * u**i for i, c in enumerate(a)))


def k1_quadrature(x):
    """K1(x) = int_0^inf exp(-x cosh t) cosh t dt by adaptive quadrature."""
    # integrand is below exp(-800) beyond x cosh t = 800
    upper = float(np.arccosh(max(800.0 / x, 1.0)))
    val, _ = quad(lambda t: np.exp(-x * np.cosh(t)) * np.cosh(t), 0, upper, epsabs=0, epsrel=1e-13, limit=200)
    return val


def pcf_ode(u_target, start=2.0):
    """D_{-1/2}(u_target) by integrating D'' = (u^2/4) D backwards from ``start``.

    Initial data from the mpmath parabolic cylinder function.
    """
    d0 = float(mpmath.pcfd(-0.5, start))
    dd0 = float(mpmath.diff(lambda s: mpmath.pcfd(-0.5, s), start))
    sol = solve_ivp(lambda s, y: [y[1], 0.25 * s * s * y[0]], (start, u_target), [d0, dd0],
                    method="Radau", rtol=1e-12, atol=1e-14)
    return sol.y[0, -1]
