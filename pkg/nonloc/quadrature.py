"""One-dimensional integration engines.

Every engine wraps QUADPACK (scipy.integrate.quad) and reports a
QuadratureResult. A run that QUADPACK flags as abnormal is still accepted
when its error estimate is within max(abs_tol, rel_tol*|value|); otherwise a
QuadratureError carrying the best estimate is raised.
"""

import logging
import math
import os
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from scipy import integrate
from scipy.special import spherical_jn

from shared.exceptions import DomainError, QuadratureError
from shared.util import DIRAC_NL_ABS_TOL, DIRAC_NL_MAX_DEPTH, DIRAC_NL_REL_TOL

# plain adaptivity is used below this number of radians across the interval
PANEL_SWITCH = 20.0
# subintervals QUADPACK may create per unit of max_depth
SUBINTERVALS_PER_DEPTH = 10


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = DIRAC_NL_ABS_TOL
    rel_tol: float = DIRAC_NL_REL_TOL
    max_depth: int = DIRAC_NL_MAX_DEPTH
    tail_cutoff: Optional[float] = None

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError(f"tolerances must be positive (abs_tol={self.abs_tol}, rel_tol={self.rel_tol})")
        if self.max_depth < 1:
            raise DomainError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.tail_cutoff is not None and not self.tail_cutoff > 0:
            raise DomainError(f"tail_cutoff must be positive, got {self.tail_cutoff}")

    @classmethod
    def from_env(cls):
        return cls(
            abs_tol=float(os.environ.get("DIRAC_NL_ABS_TOL") or DIRAC_NL_ABS_TOL),
            rel_tol=float(os.environ.get("DIRAC_NL_REL_TOL") or DIRAC_NL_REL_TOL),
            max_depth=int(os.environ.get("DIRAC_NL_MAX_DEPTH") or DIRAC_NL_MAX_DEPTH),
        )

    @property
    def limit(self):
        return SUBINTERVALS_PER_DEPTH * self.max_depth

    def with_cutoff(self, tail_cutoff):
        return replace(self, tail_cutoff=tail_cutoff)

    def accepts(self, value, error_estimate):
        return error_estimate <= max(self.abs_tol, self.rel_tol * abs(value))


@dataclass(frozen=True)
class QuadratureResult:
    value: Union[float, complex]
    error_estimate: float
    evaluations: int

    def scaled(self, factor):
        return QuadratureResult(self.value * factor, self.error_estimate * abs(factor), self.evaluations)


def combine(results):
    """Sum panel results; real and imaginary parts are added with math.fsum."""
    results = list(results)
    real = math.fsum(complex(r.value).real for r in results)
    imag = math.fsum(complex(r.value).imag for r in results)
    value = complex(real, imag) if imag != 0.0 else real
    return QuadratureResult(
        value=value,
        error_estimate=math.fsum(r.error_estimate for r in results),
        evaluations=sum(r.evaluations for r in results),
    )


def gaussian_cutoff(width, floor=1e-18):
    """Wavenumber where exp(-k^2 width^2 / 2) falls to floor."""
    if not width > 0:
        raise DomainError(f"width must be positive, got {width}")
    return math.sqrt(2.0 * math.log(1.0 / floor)) / width

##########################################################
# ADAPTIVE ENGINE
##########################################################

def _quad_real(f, a, b, spec, points=None, weight=None, wvar=None):
    kwargs = dict(full_output=1, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.limit)
    if points is not None:
        kwargs["points"] = points
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar, limlst=max(50, spec.max_depth * 2))
    output = integrate.quad(f, a, b, **kwargs)
    value, error_estimate, info = output[0], output[1], output[2]
    evaluations = int(info.get("neval", 0)) if isinstance(info, dict) else 0
    if len(output) > 3 and not spec.accepts(value, error_estimate):
        message = output[3] if isinstance(output[3], str) else "abnormal termination"
        logging.error(f"[quadrature] integrate: [{a}, {b}] failed, value={value} error={error_estimate}: {message.strip()}")
        raise QuadratureError(
            f"quadrature on [{a}, {b}] did not reach tolerance: {message.strip()}",
            value=value,
            error_estimate=error_estimate,
        )
    return QuadratureResult(float(value), float(error_estimate), evaluations)


def integrate_adaptive(f, a, b, spec=None, breakpoints=None, complex_valued=False):
    """
    Adaptive Gauss-Kronrod quadrature of f over [a, b].

    Parameters:
    f (callable): scalar integrand, real or complex valued.
    a, b (float): limits with a < b; b may be inf unless spec.tail_cutoff truncates it.
    spec (QuadratureSpec): tolerances and refinement budget.
    breakpoints (sequence): interior points where f changes scale.
    complex_valued (bool): integrate real and imaginary parts separately.

    Returns:
    QuadratureResult
    """
    spec = spec or QuadratureSpec.from_env()
    if math.isinf(b) and spec.tail_cutoff is not None:
        b = a + spec.tail_cutoff
    if not a < b:
        raise DomainError(f"integration limits must satisfy a < b, got [{a}, {b}]")
    points = None
    if breakpoints is not None and math.isfinite(a) and math.isfinite(b):
        points = sorted({float(p) for p in breakpoints if a < p < b}) or None
    if not complex_valued:
        return _quad_real(f, a, b, spec, points=points)
    re = _quad_real(lambda x: complex(f(x)).real, a, b, spec, points=points)
    im = _quad_real(lambda x: complex(f(x)).imag, a, b, spec, points=points)
    return QuadratureResult(
        value=complex(re.value, im.value),
        error_estimate=math.hypot(re.error_estimate, im.error_estimate),
        evaluations=re.evaluations + im.evaluations,
    )

##########################################################
# OSCILLATORY ENGINES
##########################################################

def _resolve_cutoff(spec, k_max):
    k_max = k_max if k_max is not None else spec.tail_cutoff
    if k_max is None or not k_max > 0:
        raise DomainError("oscillatory integration needs a positive cutoff (k_max or spec.tail_cutoff)")
    return k_max


def _panel_integrate(integrand, r, k_max, spec):
    if r * k_max <= PANEL_SWITCH:
        return integrate_adaptive(integrand, 0.0, k_max, spec)
    edges = np.arange(0.0, k_max, math.pi / r)
    edges = np.append(edges, k_max) if edges[-1] < k_max else edges
    panels = [integrate_adaptive(integrand, lo, hi, spec) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
    logging.debug(f"[quadrature] panel sum: r={r} k_max={k_max:.4g} over {len(panels)} half-period panels.")
    return combine(panels)


def integrate_oscillatory_sin(g, r, spec=None, k_max=None, weight="sinc"):
    """
    Radial Fourier integrals of a Gaussian-damped profile g.

    weight="sinc" evaluates int_0^inf sin(kr)/(kr) g(k) k^2 dk (r = 0 uses the
    sinc limit); weight="ksin" evaluates int_0^inf k sin(kr) g(k) dk.
    """
    spec = spec or QuadratureSpec.from_env()
    if r < 0:
        raise DomainError(f"radius must be non-negative, got {r}")
    k_max = _resolve_cutoff(spec, k_max)
    if weight == "sinc":
        if r == 0:
            return integrate_adaptive(lambda k: g(k) * k * k, 0.0, k_max, spec)
        integrand = lambda k: (math.sin(k * r) / r) * k * g(k)
    elif weight == "ksin":
        if r == 0:
            return QuadratureResult(0.0, 0.0, 0)
        integrand = lambda k: k * math.sin(k * r) * g(k)
    else:
        raise DomainError(f"unknown oscillatory weight {weight!r}")
    return _panel_integrate(integrand, r, k_max, spec)


def integrate_oscillatory_j1(g, r, spec=None, k_max=None):
    """int_0^inf j1(kr) g(k) k^3 dk, odd in r."""
    spec = spec or QuadratureSpec.from_env()
    if r == 0:
        return QuadratureResult(0.0, 0.0, 0)
    if r < 0:
        return integrate_oscillatory_j1(g, -r, spec, k_max).scaled(-1.0)
    k_max = _resolve_cutoff(spec, k_max)
    integrand = lambda k: float(spherical_jn(1, k * r)) * k ** 3 * g(k)
    return _panel_integrate(integrand, r, k_max, spec)


def integrate_fourier_sin(h, r, spec=None):
    """int_0^inf h(k) sin(kr) dk for slowly decaying h (QUADPACK Fourier routine)."""
    spec = spec or QuadratureSpec.from_env()
    if not r > 0:
        raise DomainError(f"Fourier sine integral needs r > 0, got {r}")
    return _quad_real(h, 0.0, np.inf, spec, weight="sin", wvar=r)
