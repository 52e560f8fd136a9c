"""Normalized variances of transformed Gaussian packets.

Closed forms are expressed through the A integrals; the oracle rebuilds the
transformed momentum-space spinor on a radial grid and evaluates
<r^2> = <grad_p psi | grad_p psi> with finite differences.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, NamedTuple, Optional

import numpy as np
from scipy import integrate
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from nonloc.quadrature import gaussian_cutoff
from nonloc.special_functions import SQRT_PI, AIntegralParams, a_integral_closed
from nonloc.transform_core import PacketSpec, TransformKind
from shared.exceptions import DomainError, GridResolutionError
from shared.util import DIRAC_NL_ORACLE_POINTS, parallel_map

ENVELOPE_FLOOR = 1e-16
GRID_AGREEMENT = 1e-4
ORACLE_ATTEMPTS = 3
GHOST_POINTS = 2
SWEEP_POINTS = 60
SWEEP_RANGE = (0.05, 20.0)


@dataclass(frozen=True)
class VarianceResult:
    kind: Optional[TransformKind]
    d: float
    value: float
    norm_check: float
    breakdown: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.value > 0:
            raise DomainError(f"variance must be positive, got {self.value} at d={self.d}")

    @property
    def normalized(self):
        """V / d^2: 3.5 for narrow packets, 1.5 for wide ones."""
        return self.value / (self.d * self.d)


def _check_width(d):
    if not (d > 0 and math.isfinite(d)):
        raise DomainError(f"packet width must be positive and finite, got d={d}")

##########################################################
# CLOSED FORMS
##########################################################

def _a_products(d):
    """(dbar/sqrt(pi)) A for nu = 1/2, 1, 2."""
    scale = d / SQRT_PI
    return tuple(scale * a_integral_closed(AIntegralParams(nu, 0, d)) for nu in (0.5, 1.0, 2.0))


def gaussian_variance(d):
    _check_width(d)
    return 1.5 * d * d


def variance_mo_closed(d):
    _check_width(d)
    d2 = d * d
    _, a1, a2 = _a_products(d)
    breakdown = {
        "r0_11": 0.5,
        "r0_22": 0.5,
        "r2_11": 0.75 * d2,
        "r2_22": 2.75 * d2 - 2.0 * d2 * (a1 + a2),
        "r0_12": 0.0,
        "r2_12": 0.0,
    }
    norm = breakdown["r0_11"] + breakdown["r0_22"]
    value = (breakdown["r2_11"] + breakdown["r2_22"]) / norm
    return VarianceResult(TransformKind.MO, d, value, norm, breakdown)


def variance_fw_closed(d):
    _check_width(d)
    d2 = d * d
    a_half, a1, a2 = _a_products(d)
    breakdown = {
        "r0": 1.0,
        "r2_limit": 3.5 * d2,
        "r2_correction": d2 * (a1 - a2 - 4.0 * a_half),
    }
    value = breakdown["r2_limit"] + breakdown["r2_correction"]
    return VarianceResult(TransformKind.FW, d, value, breakdown["r0"], breakdown)


def variance_closed(kind, d):
    if kind is None:
        return VarianceResult(None, d, gaussian_variance(d), 1.0, {})
    kind = TransformKind(kind)
    return variance_mo_closed(d) if kind == TransformKind.MO else variance_fw_closed(d)

##########################################################
# MOMENTUM-SPACE PIECES
##########################################################

class Harmonic(Enum):
    """Angular factors: 1, p_z/p and (p_x + i p_y)/p with their sphere averages."""
    S = (0, 1.0)
    Z = (1, 1.0 / 3.0)
    PLUS = (1, 2.0 / 3.0)

    @property
    def l(self):
        return self.value[0]

    @property
    def weight(self):
        return self.value[1]


class SpinorPiece(NamedTuple):
    component: int
    harmonic: Harmonic
    radial: Callable[[np.ndarray], np.ndarray]

    @property
    def key(self):
        return (self.component, self.harmonic)


def _energy(k):
    return np.sqrt(1.0 + k * k)


def _norm_fw(k):
    e = _energy(k)
    return np.sqrt(2.0 * e * (e + 1.0))


def identity_pieces(packet):
    return [SpinorPiece(0, Harmonic.S, lambda k: packet.momentum_amplitude(k).astype(complex))]


def mo_origin_pieces(packet):
    """Momentum-independent half of the MO spinor, f_p (1, 0, -i, 0) / 2."""
    f = packet.momentum_amplitude
    return [
        SpinorPiece(0, Harmonic.S, lambda k: 0.5 * f(k) + 0j),
        SpinorPiece(2, Harmonic.S, lambda k: -0.5j * f(k)),
    ]


def mo_energy_pieces(packet):
    """f_p w_p / (2E), w_p = (1 + i p_z, i p+, i + p_z, p+)."""
    g = lambda k: packet.momentum_amplitude(k) / (2.0 * _energy(k))
    return [
        SpinorPiece(0, Harmonic.S, lambda k: g(k) + 0j),
        SpinorPiece(0, Harmonic.Z, lambda k: 1j * k * g(k)),
        SpinorPiece(1, Harmonic.PLUS, lambda k: 1j * k * g(k)),
        SpinorPiece(2, Harmonic.S, lambda k: 1j * g(k)),
        SpinorPiece(2, Harmonic.Z, lambda k: k * g(k) + 0j),
        SpinorPiece(3, Harmonic.PLUS, lambda k: k * g(k) + 0j),
    ]


def fw_pieces(packet):
    """f_p (E + 1, 0, -p_z, -p+) / N_p."""
    f = packet.momentum_amplitude
    return [
        SpinorPiece(0, Harmonic.S, lambda k: f(k) * (_energy(k) + 1.0) / _norm_fw(k) + 0j),
        SpinorPiece(2, Harmonic.Z, lambda k: -k * f(k) / _norm_fw(k) + 0j),
        SpinorPiece(3, Harmonic.PLUS, lambda k: -k * f(k) / _norm_fw(k) + 0j),
    ]


def momentum_pieces(kind, d):
    packet = PacketSpec(d)
    if kind is None:
        return identity_pieces(packet)
    if TransformKind(kind) == TransformKind.MO:
        return mo_origin_pieces(packet) + mo_energy_pieces(packet)
    return fw_pieces(packet)

##########################################################
# RADIAL ORACLE
##########################################################

class RadialGrid(NamedTuple):
    """Uniform grid in u with k = sinh(u), padded by ghost points at both ends."""
    u: np.ndarray
    step: float

    @property
    def k(self):
        return np.sinh(self.u)

    @property
    def interior(self):
        return slice(GHOST_POINTS, len(self.u) - GHOST_POINTS)


def radial_grid(d, intervals):
    if intervals < 4 or intervals % 2:
        raise DomainError(f"oracle grid needs an even number of intervals >= 4, got {intervals}")
    u_max = math.asinh(gaussian_cutoff(d, floor=ENVELOPE_FLOOR))
    step = u_max / intervals
    u = np.arange(-GHOST_POINTS, intervals + GHOST_POINTS + 1) * step
    return RadialGrid(u, step)


def _d_du(q, step):
    # fourth-order central difference on interior points
    return (q[:-4] - 8.0 * q[1:-3] + 8.0 * q[3:-1] - q[4:]) / (12.0 * step)


def _grouped(pieces, k):
    radial = {}
    for piece in pieces:
        radial[piece.key] = radial.get(piece.key, 0.0) + np.asarray(piece.radial(k), dtype=complex)
    return radial


def radial_matrix_element(bra, ket, grid, order):
    """
    <bra| r^order |ket> for order 0 or 2 from piece lists on a radial grid.

    Order 2 uses <grad_p a | grad_p b> = (1/2pi^2) sum w int (k^2 a' b' + l(l+1) a b) dk.
    """
    if order not in (0, 2):
        raise DomainError(f"radial moment order must be 0 or 2, got {order}")
    k_ext = grid.k
    inner = grid.interior
    k = k_ext[inner]
    cosh = np.cosh(grid.u[inner])
    bra_radial, ket_radial = _grouped(bra, k_ext), _grouped(ket, k_ext)
    total = 0j
    for key in sorted(set(bra_radial) & set(ket_radial), key=lambda kh: (kh[0], kh[1].name)):
        harmonic = key[1]
        qa, qb = bra_radial[key], ket_radial[key]
        if order == 0:
            integrand = np.conj(qa[inner]) * qb[inner] * k * k * cosh
        else:
            qa_u, qb_u = _d_du(qa, grid.step), _d_du(qb, grid.step)
            integrand = np.conj(qa_u) * qb_u * k * k / cosh
            integrand = integrand + harmonic.l * (harmonic.l + 1) * np.conj(qa[inner]) * qb[inner] * cosh
        real = integrate.simpson(integrand.real, dx=grid.step)
        imag = integrate.simpson(integrand.imag, dx=grid.step)
        total += harmonic.weight * complex(real, imag)
    return total / (2.0 * math.pi ** 2)


def radial_expectation(pieces, grid, order):
    return radial_matrix_element(pieces, pieces, grid, order).real


def _oracle_once(kind, d, intervals):
    pieces = momentum_pieces(kind, d)
    coarse_grid, fine_grid = radial_grid(d, intervals), radial_grid(d, 2 * intervals)
    coarse = radial_expectation(pieces, coarse_grid, 2) / radial_expectation(pieces, coarse_grid, 0)
    norm = radial_expectation(pieces, fine_grid, 0)
    fine = radial_expectation(pieces, fine_grid, 2) / norm
    if abs(fine - coarse) > GRID_AGREEMENT * abs(fine):
        logging.warning(f"[variance] oracle: d={d} refinement {intervals}->{2 * intervals} moved {coarse} to {fine}.")
        raise GridResolutionError(f"oracle grid unresolved at d={d} with {intervals} intervals", coarse=coarse, fine=fine)
    return fine, norm


def variance_oracle_result(kind, d, intervals=None):
    """Oracle variance with its normalization; retries on doubled grids."""
    _check_width(d)
    start_time = time.time()
    base = intervals or DIRAC_NL_ORACLE_POINTS
    retrying = Retrying(
        stop=stop_after_attempt(ORACLE_ATTEMPTS),
        retry=retry_if_exception_type(GridResolutionError),
        before_sleep=before_sleep_log(logging.getLogger(), logging.WARNING),
        reraise=True,
    )
    for attempt in retrying:
        with attempt:
            points = base * 2 ** (attempt.retry_state.attempt_number - 1)
            value, norm = _oracle_once(kind, d, points)
    response_time = round(time.time() - start_time, 2)
    label = TransformKind(kind).value if kind is not None else "identity"
    logging.info(f"[variance] oracle: finished {label} d={d} in {response_time} seconds.")
    return VarianceResult(TransformKind(kind) if kind is not None else None, d, value, norm, {"r0": norm})


def variance_oracle(kind, d, intervals=None):
    return variance_oracle_result(kind, d, intervals).value


def cross_terms_mo(d, intervals=None):
    """Matrix elements between the two halves of the MO spinor for r^0 and r^2."""
    _check_width(d)
    packet = PacketSpec(d)
    grid = radial_grid(d, intervals or DIRAC_NL_ORACLE_POINTS)
    halves = {"1": mo_origin_pieces(packet), "2": mo_energy_pieces(packet)}
    terms = {}
    for order in (0, 2):
        for a in "12":
            for b in "12":
                terms[f"r{order}_{a}{b}"] = radial_matrix_element(halves[a], halves[b], grid, order)
    return terms

##########################################################
# SWEEPS
##########################################################

def default_d_grid(points=SWEEP_POINTS, d_min=SWEEP_RANGE[0], d_max=SWEEP_RANGE[1]):
    return np.geomspace(d_min, d_max, points)


def variance_sweep(kind, d_grid, method="closed"):
    """V(d) over an increasing grid, closed form or oracle per point."""
    grid = np.asarray(d_grid, dtype=float).reshape(-1)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("d grid must be positive and strictly increasing")
    if method == "closed":
        compute = lambda d: variance_closed(kind, float(d))
    elif method == "oracle":
        compute = lambda d: variance_oracle_result(kind, float(d))
    else:
        raise DomainError(f"unknown sweep method {method!r}")
    label = TransformKind(kind).value if kind is not None else "identity"
    return parallel_map(compute, grid, label=f"variance_sweep[{label}]")
