"""Special functions and quadrature behind the closed-form expectations.

The standard pieces (digamma, Euler Beta, the incomplete gamma tail
``Gamma(0, r)``) are thin wrappers over scipy.special.  The nonstandard
pieces are the integral kernels ``H``, ``h0`` and ``h1`` that drive the
expected branch-length expansion.  Their defining integrands contain the
piecewise weight :func:`f_integrand`, which jumps at u = 1, so every
quadrature here splits the axis there and lets QUADPACK handle the
algebraic tail transform on [1, inf).

Derivatives of ``h1`` are computed by differentiating under the integral
sign rather than by finite differences: the derivative weights
x(x+2u)/(u+x)^2 and 2u^2/(u+x)^3 are explicit, and the analytic route
stays accurate for small x where the expansion needs it most.  Finite
differences survive only as a test oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy import integrate, special

# Euler-Mascheroni constant, 20 digits.
EULER_GAMMA = 0.57721566490153286061


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive quadratures in this package."""

    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


def adaptive_quad(func, a, b, spec: QuadratureSpec = DEFAULT_QUAD, points=None) -> float:
    """QUADPACK quadrature of ``func`` on [a, b] under ``spec``.

    Raises :class:`QuadratureError` when the reported error estimate is an
    order of magnitude beyond the requested tolerance.
    """
    with warnings.catch_warnings():
        # convergence is judged below from the returned error estimate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            func,
            a,
            b,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            points=points,
            full_output=1,
        )
    value, abserr = out[0], out[1]
    if len(out) > 3 and abserr > 10.0 * max(spec.abs_tol, spec.rel_tol * abs(value)):
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {out[3]}")
    if not math.isfinite(value):
        raise QuadratureError(f"quadrature on [{a}, {b}] returned {value}")
    return value


def digamma(x: float) -> float:
    """Digamma Psi(x) = Gamma'(x)/Gamma(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"digamma requires x > 0, got {x}")
    return float(special.psi(x))


def beta_fn(a: float, b: float) -> float:
    """Euler Beta B(a, b) = Gamma(a)Gamma(b)/Gamma(a+b), via log-Gamma."""
    if not (a > 0 and b > 0):
        raise ValueError(f"beta_fn requires positive arguments, got ({a}, {b})")
    return math.exp(special.gammaln(a) + special.gammaln(b) - special.gammaln(a + b))


def gamma_upper_zero(r: float) -> float:
    """Incomplete gamma tail Gamma(0, r) = int_r^inf e^{-v}/v dv, r > 0."""
    if not r > 0:
        raise ValueError(f"gamma_upper_zero requires r > 0, got {r}")
    return float(special.exp1(r))


def f_integrand(u: float) -> float:
    """Piecewise weight f(u): order u^2 near 0, (1-e^{-u})/u^2 beyond 1.

    On (0, 1] the bracket 1 - e^{-u} - u + u^2/2 - u^3/6 equals
    -sum_{k>=4} (-u)^k / k!; the series form is used below u = 0.5 where
    the closed bracket loses all significant digits.  f jumps at u = 1.
    """
    if not u > 0:
        raise ValueError(f"f_integrand requires u > 0, got {u}")
    if u > 1.0:
        return -math.expm1(-u) / (u * u)
    if u >= 0.5:
        return (1.0 - math.exp(-u) - u + u * u / 2.0 - u ** 3 / 6.0) / (u * u)
    total = 0.0
    term = (-u) ** 4 / 24.0  # (-u)^k / k! at k = 4
    k = 4
    while abs(term) > 1e-24:
        total -= term
        k += 1
        term *= -u / k
    return total / (u * u)


def _f_weighted(weight, spec: QuadratureSpec) -> float:
    """Integral of f_integrand(u) * weight(u) over (0, inf), split at the jump."""
    g = lambda u: f_integrand(u) * weight(u)
    return adaptive_quad(g, 0.0, 1.0, spec) + adaptive_quad(g, 1.0, math.inf, spec)


def H_scale(x: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """H(x) = int_0^inf (1-e^{-u})/u * du/(u+x) by adaptive quadrature.

    Strictly decreasing; diverges like -log(x) as x -> 0+, hence x > 0 is
    required.  Callers needing the x -> 0 regime use delta*H(2*theta*delta),
    which tends to 0.
    """
    if not x > 0:
        raise ValueError(f"H_scale requires x > 0 (H diverges at 0), got {x}")
    g = lambda u: -math.expm1(-u) / (u * (u + x))
    return adaptive_quad(g, 0.0, 1.0, spec) + adaptive_quad(g, 1.0, math.inf, spec)


def _exp_scaled_e1(x: float) -> float:
    """e^x * E1(x) without overflow; asymptotic tail beyond x = 600."""
    if x < 600.0:
        return math.exp(x) * float(special.exp1(x))
    total = term = 1.0
    for k in range(1, 9):  # truncation error < 9!/x^9 ~ 1e-20 at x = 600
        term *= -k / x
        total += term
    return total / x


def H_closed(x: float) -> float:
    """Closed evaluation of :func:`H_scale` through the exponential integral.

    Algebraically H(x) = (gamma + log x + e^x E1(x)) / x; used in hot loops
    and cross-checked against the quadrature route in the tests.
    """
    if not x > 0:
        raise ValueError(f"H_closed requires x > 0, got {x}")
    return (EULER_GAMMA + math.log(x) + _exp_scaled_e1(x)) / x


def h0(x: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """h0(x) = (1 + x/2 + x^2/6) log(1+x) - int f(u) x/(u+x) du, x >= 0."""
    if x < 0:
        raise ValueError(f"h0 requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    poly = 1.0 + x / 2.0 + x * x / 6.0
    return poly * math.log1p(x) - _f_weighted(lambda u: x / (u + x), spec)


def h1(x: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """h1(x) = x * h0(x)."""
    if x < 0:
        raise ValueError(f"h1 requires x >= 0, got {x}")
    return x * h0(x, spec)


def h1_deriv(x: float, order: int, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """First or second derivative of h1, by differentiation under the integral.

    With P(x) = x + x^2/2 + x^3/6, h1(x) = P(x) log(1+x) - int f(u) x^2/(u+x) du,
    and the integrand's x-derivatives are the rational weights below.
    """
    if order not in (1, 2):
        raise ValueError(f"h1_deriv supports order 1 or 2, got {order}")
    if x < 0:
        raise ValueError(f"h1_deriv requires x >= 0, got {x}")
    if order == 1:
        if x == 0.0:
            return 0.0
        p = x + x * x / 2.0 + x ** 3 / 6.0
        p1 = 1.0 + x + x * x / 2.0
        integral = _f_weighted(lambda u: x * (x + 2.0 * u) / (u + x) ** 2, spec)
        return p1 * math.log1p(x) + p / (1.0 + x) - integral
    if x == 0.0:
        return 2.0 - _f_weighted(lambda u: 2.0 / u, spec)
    p = x + x * x / 2.0 + x ** 3 / 6.0
    p1 = 1.0 + x + x * x / 2.0
    p2 = 1.0 + x
    integral = _f_weighted(lambda u: 2.0 * u * u / (u + x) ** 3, spec)
    return p2 * math.log1p(x) + 2.0 * p1 / (1.0 + x) - p / (1.0 + x) ** 2 - integral
