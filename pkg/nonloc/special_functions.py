"""MacDonald functions, error functions and the Gaussian-damped A integrals.

A(nu, mu; dbar) = int_0^inf exp(-t^2 dbar^2) t^mu / (1 + t^2)^nu dt appears in
the closed-form variances. Three orders have closed forms; every other order
goes through quadrature.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from nonloc.quadrature import QuadratureSpec, integrate_adaptive
from shared.exceptions import DomainError, UnimplementedOrderError

SQRT_PI = math.sqrt(math.pi)
CLOSED_FORM_ORDERS = frozenset({(0.5, 0), (1.0, 0), (2.0, 0)})
A_INTEGRAL_SPEC = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-12, max_depth=40)

##########################################################
# BESSEL AND ERROR FUNCTIONS
##########################################################

def _positive_argument(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be positive, got {x}")
    return arr


def _scalar_or_array(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def bessel_k(nu, x):
    """Modified Bessel function of the second kind K_nu(x), x > 0.

    Negative orders use K_{-nu} = K_nu; large x underflows to 0.
    """
    arr = _positive_argument(x)
    return _scalar_or_array(special.kv(abs(nu), arr))


def bessel_k_scaled(nu, x):
    """exp(x) K_nu(x), finite where K_nu underflows."""
    arr = _positive_argument(x)
    return _scalar_or_array(special.kve(abs(nu), arr))


def erf(x):
    return _scalar_or_array(special.erf(np.asarray(x, dtype=float)))


def erfcx(x):
    """exp(x^2) (1 - erf(x)) without overflow."""
    return _scalar_or_array(special.erfcx(np.asarray(x, dtype=float)))


def schwinger_closed(power, r):
    """int_0^inf chi^power exp(-chi - r^2 / (4 chi)) dchi = 2 (r/2)^(power+1) K_(power+1)(r)."""
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    return 2.0 * (r / 2.0) ** (power + 1) * bessel_k(power + 1, r)


def schwinger_integral(power, r, spec=None):
    """
    Direct quadrature of int_0^inf chi^power exp(-chi - r^2 / (4 chi)) dchi.

    The substitution chi = exp(s) turns both ends into double-exponential
    decay; the integrand peaks at the positive root of
    chi^2 - (power + 1) chi - r^2 / 4 = 0, passed to QUADPACK as a breakpoint.

    Returns:
    QuadratureResult
    """
    if not r > 0:
        raise DomainError(f"r must be positive, got {r}")
    spec = spec or QuadratureSpec.from_env()
    q = power + 1.0
    quarter_r2 = r * r / 4.0
    peak = math.log((q + math.sqrt(q * q + r * r)) / 2.0)
    lower = math.log(r * r / 3200.0)
    upper = math.log(750.0)

    def integrand(s):
        return math.exp(q * s - math.exp(s) - quarter_r2 * math.exp(-s))

    return integrate_adaptive(integrand, lower, upper, spec, breakpoints=[peak])

##########################################################
# A INTEGRALS
##########################################################

@dataclass(frozen=True)
class AIntegralParams:
    nu: float
    mu: int
    dbar: float

    def __post_init__(self):
        if not self.dbar > 0:
            raise DomainError(f"dbar must be positive, got {self.dbar}")
        if not self.nu > 0:
            raise DomainError(f"nu must be positive, got {self.nu}")
        if int(self.mu) != self.mu or self.mu < 0:
            raise DomainError(f"mu must be a non-negative integer, got {self.mu}")

    @property
    def has_closed_form(self):
        return (float(self.nu), int(self.mu)) in CLOSED_FORM_ORDERS


def a_integral_closed(params):
    """Closed forms for (nu, mu) in {(1/2, 0), (1, 0), (2, 0)}.

    Products exp(dbar^2)(1 - erf(dbar)) go through erfcx and exp(D) K_0(D)
    through the scaled Bessel function, so large dbar does not overflow.
    """
    if not params.has_closed_form:
        raise UnimplementedOrderError(params.nu, params.mu)
    dbar = params.dbar
    if params.nu == 0.5:
        return 0.5 * bessel_k_scaled(0, dbar * dbar / 2.0)
    if params.nu == 1.0:
        return 0.5 * math.pi * erfcx(dbar)
    return 0.25 * math.pi * (1.0 - 2.0 * dbar * dbar) * erfcx(dbar) + 0.5 * SQRT_PI * dbar


def a_integral_quadrature(params, spec=A_INTEGRAL_SPEC):
    """Direct quadrature on [0, max(50, 40/dbar)]; any nu > 0 and integer mu >= 0."""
    nu, mu, dbar = float(params.nu), int(params.mu), params.dbar
    d2 = dbar * dbar
    t_max = max(50.0, 40.0 / dbar)

    def integrand(t):
        return math.exp(-t * t * d2) * t ** mu / (1.0 + t * t) ** nu

    breakpoints = [1.0, 10.0, 1.0 / dbar, 3.0 / dbar, 6.0 / dbar]
    result = integrate_adaptive(integrand, 0.0, t_max, spec, breakpoints=breakpoints)
    logging.debug(f"[special_functions] a_integral_quadrature: nu={nu} mu={mu} dbar={dbar} value={result.value} error={result.error_estimate:.2e}")
    return result.value


def a_integral(params):
    """Closed form where one exists, quadrature otherwise."""
    if params.has_closed_form:
        return a_integral_closed(params)
    return a_integral_quadrature(params)


def _products(dbar, scale):
    return tuple(scale * a_integral_closed(AIntegralParams(nu, 0, dbar)) for nu in (0.5, 1.0, 2.0))


def a_integral_small_dbar_products(dbar):
    """(dbar A_1/2, dbar A_1, dbar A_2); all vanish as dbar -> 0."""
    return _products(dbar, dbar)


def a_integral_large_dbar_products(dbar):
    """(dbar/sqrt(pi)) times (A_1/2, A_1, A_2); all tend to 1/2 as dbar -> inf."""
    return _products(dbar, dbar / SQRT_PI)
