"""Kernel moments and transformed-function profiles.

Fourier convention: psi(r) = int d^3p / (2 pi)^3 exp(i p.r) psi_p, natural
units, lengths in Compton wavelengths. Radial reductions:

    FT[g(k)](r)       = 1 / (2 pi^2) int_0^inf sinc(kr) g(k) k^2 dk
    FT[p_z g(k)](z e) = i / (2 pi^2) int_0^inf j1(kz) g(k) k^3 dk

Delta-function pieces of transformed distributions are never sampled; they
travel with the curves as SingularTerm records.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from nonloc.dirac_algebra import FourSpinor, Matrix4C, dirac_matrices, max_abs_deviation, u_fw, u_mo
from nonloc.quadrature import (
    QuadratureSpec,
    gaussian_cutoff,
    integrate_adaptive,
    integrate_fourier_sin,
    integrate_oscillatory_j1,
    integrate_oscillatory_sin,
)
from nonloc.special_functions import bessel_k, schwinger_integral
from shared.exceptions import DomainError
from shared.util import parallel_map

PI2 = math.pi ** 2
SQRT2 = math.sqrt(2.0)
MOMENT_STEPS = (1e-2, 5e-3)
ETA_MAX = 6.0
C0_DEFAULT = 0.457
C0_RANGE = (0.40, 0.52)
DEFAULT_R_MIN = 0.02
DEFAULT_R_MAX = 6.0
DEFAULT_POINTS = 300


class TransformKind(str, Enum):
    FW = "fw"
    MO = "mo"


class PacketKind(str, Enum):
    GAUSSIAN = "gaussian"
    DELTA = "delta"


class ProfileKind(str, Enum):
    GAUSSIAN = "f"
    T0 = "T0"
    TZ = "Tz"
    S0 = "S0"
    SZ = "Sz"
    S_AUX = "S_aux"
    D0 = "D0"
    B0_REGULAR = "B0_regular"
    DZ_REGULAR = "Dz_regular"


@dataclass(frozen=True)
class PacketSpec:
    d: float = 1.0
    kind: PacketKind = PacketKind.GAUSSIAN

    def __post_init__(self):
        if self.kind == PacketKind.GAUSSIAN and not (self.d > 0 and math.isfinite(self.d)):
            raise DomainError(f"Gaussian packet width must be positive and finite, got d={self.d}")

    def _require_gaussian(self):
        if self.kind != PacketKind.GAUSSIAN:
            raise DomainError("operation needs a Gaussian packet")

    @property
    def prefactor(self):
        """(d sqrt(pi))^(3/2), shared by every Gaussian-input integral."""
        self._require_gaussian()
        return (self.d * math.sqrt(math.pi)) ** 1.5

    @property
    def cutoff(self):
        self._require_gaussian()
        return gaussian_cutoff(self.d)

    def envelope(self, k):
        return math.exp(-0.5 * k * k * self.d * self.d)

    def position_amplitude(self, r):
        """Normalized initial packet f(r)."""
        self._require_gaussian()
        r = np.asarray(r, dtype=float)
        return np.exp(-r * r / (2.0 * self.d ** 2)) / (math.pi ** 0.75 * self.d ** 1.5)

    def momentum_amplitude(self, k):
        self._require_gaussian()
        k = np.asarray(k, dtype=float)
        return (2.0 * self.d * math.sqrt(math.pi)) ** 1.5 * np.exp(-0.5 * k * k * self.d ** 2)


DELTA_PACKET = PacketSpec(d=0.0, kind=PacketKind.DELTA)


@dataclass(frozen=True)
class MomentResult:
    kind: TransformKind
    order: int
    matrix: Matrix4C
    analytic_reference: Matrix4C

    @property
    def max_deviation(self):
        return max_abs_deviation(self.matrix, self.analytic_reference)


@dataclass(frozen=True)
class SingularTerm:
    """Symbolic distribution: coefficient times the named distribution.

    component is the 1-based spinor component the term belongs to, or None
    for a scalar profile.
    """
    distribution: str
    coefficient: complex
    support: str
    component: Optional[int] = None


@dataclass(frozen=True)
class ProfileCurve:
    which: ProfileKind
    abscissa: np.ndarray
    values: np.ndarray
    packet: PacketSpec
    singular_terms: Tuple[SingularTerm, ...] = ()
    reference: Optional[np.ndarray] = None

    def __post_init__(self):
        abscissa = np.array(self.abscissa, dtype=float)
        values = np.array(self.values, dtype=complex)
        if abscissa.shape != values.shape:
            raise DomainError("abscissa and values must have the same length")
        if np.any(np.diff(abscissa) <= 0):
            raise DomainError(f"{self.which.value}: abscissa must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError(f"{self.which.value}: non-finite profile values")
        abscissa.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "abscissa", abscissa)
        object.__setattr__(self, "values", values)

    @property
    def has_singular_part(self):
        return bool(self.singular_terms)


def default_r_grid(r_min=DEFAULT_R_MIN, r_max=DEFAULT_R_MAX, points=DEFAULT_POINTS):
    if points < 2 or not r_max > r_min:
        raise DomainError(f"invalid grid: [{r_min}, {r_max}] with {points} points")
    return np.linspace(r_min, r_max, points)


def _grid(values, allow_zero=True, allow_negative=False):
    grid = np.asarray(values, dtype=float).reshape(-1)
    if grid.size == 0 or not np.all(np.isfinite(grid)):
        raise DomainError("grid must be a non-empty array of finite values")
    if not allow_negative and np.any(grid < 0):
        raise DomainError("grid must be non-negative")
    if not allow_zero and np.any(grid == 0):
        raise DomainError("grid must exclude 0 (singular point)")
    return grid


def _sample(func, grid, label):
    start_time = time.time()
    values = parallel_map(func, grid, label=label)
    response_time = round(time.time() - start_time, 2)
    logging.info(f"[transform_core] {label}: finished {len(grid)} points in {response_time} seconds.")
    return np.array(values, dtype=complex)

##########################################################
# KERNEL MOMENTS
##########################################################

def _unitary(kind):
    return u_fw if TransformKind(kind) == TransformKind.FW else u_mo


def _analytic_moment(kind, order):
    m = dirac_matrices()
    if kind == TransformKind.FW:
        return np.eye(4, dtype=complex) if order == 0 else 0.75 * np.eye(4, dtype=complex)
    if order == 0:
        return (m.beta + m.delta) / SQRT2
    return (3.0 / SQRT2) * m.delta


def _negative_laplacian(unitary, h):
    centre = unitary((0.0, 0.0, 0.0))
    total = np.zeros((4, 4), dtype=complex)
    for axis in range(3):
        step = [0.0, 0.0, 0.0]
        step[axis] = h
        forward = unitary(tuple(step))
        step[axis] = -h
        backward = unitary(tuple(step))
        total += (forward - 2.0 * centre + backward) / (h * h)
    return -total


def moment(kind, order):
    """
    Zeroth or second kernel moment of a momentum-space unitary.

    Order 0 is U(p=0); order 2 is -laplacian_p U(p) at p = 0 from central
    differences at two steps combined by Richardson extrapolation.
    """
    kind = TransformKind(kind)
    if order not in (0, 2):
        raise DomainError(f"moment order must be 0 or 2, got {order}")
    unitary = _unitary(kind)
    if order == 0:
        matrix = np.array(unitary((0.0, 0.0, 0.0)), dtype=complex)
    else:
        coarse, fine = (_negative_laplacian(unitary, h) for h in MOMENT_STEPS)
        ratio = (MOMENT_STEPS[0] / MOMENT_STEPS[1]) ** 2
        matrix = (ratio * fine - coarse) / (ratio - 1.0)
    result = MomentResult(kind, order, matrix, _analytic_moment(kind, order))
    logging.debug(f"[transform_core] moment: kind={kind.value} order={order} max deviation {result.max_deviation:.3e}")
    return result

##########################################################
# DELTA INPUT: MO
##########################################################

def d0_closed(r):
    """K1(r) / (4 pi^2 r): transform of 1/(2E)."""
    if not r > 0:
        raise DomainError(f"D0 is singular at r={r}; use r > 0")
    return bessel_k(1, r) / (4.0 * PI2 * r)


def d0_quadrature(r, spec=None):
    """Proper-time representation int chi^-2 exp(-chi - r^2/4chi) dchi / (16 pi^2)."""
    if not r > 0:
        raise DomainError(f"D0 is singular at r={r}; use r > 0")
    return schwinger_integral(-2, r, spec).value / (16.0 * PI2)


def dz_regular(z, spec=None):
    """Convergent on-axis part of the p_z/(2E) transform, i z K2(|z|) / (4 pi^2 z^2).

    Computed by proper-time quadrature; odd in z.
    """
    if z == 0:
        raise DomainError("Dz regular part is evaluated off the origin only")
    value = schwinger_integral(-3, abs(z), spec).value
    return 1j * z * value / (32.0 * PI2)


def dz_regular_closed(z):
    if z == 0:
        raise DomainError("Dz regular part is evaluated off the origin only")
    return 1j * z * bessel_k(2, abs(z)) / (4.0 * PI2 * z * z)


def d_regular(point, spec=None):
    """(Dx, Dy, Dz) regular parts at a 3D point, Dj = (x_j / r) Dz(r e_z)."""
    point = np.asarray(point, dtype=float).reshape(3)
    r = float(np.linalg.norm(point))
    axial = dz_regular(r, spec)
    return tuple(complex(axial * x / r) for x in point)


AXIAL_COEFFICIENT = 1j / (2.0 * math.pi)


def axial_singular_term(axis, factor=1.0, component=None):
    """Line distribution of D_axis: delta2 across the axis over the signed coordinate."""
    return SingularTerm(f"delta2(rho_{axis})/{axis}", factor * AXIAL_COEFFICIENT, f"{axis}-axis", component)


AXIAL_SINGULAR_TERM = axial_singular_term("z")

# (component, axis, factor) of each D_j inside the MO spinor
MO_DELTA_AXIAL_WEIGHTS = (
    (1, "z", 1j),
    (2, "x", 1j),
    (2, "y", -1.0),
    (3, "z", 1.0),
    (4, "x", 1.0),
    (4, "y", 1j),
)
ORIGIN_DELTA_MO = (0.5, 0.0, -0.5j, 0.0)


def d0_profile(r_grid, spec=None):
    grid = _grid(r_grid, allow_zero=False)
    values = np.array([d0_closed(r) for r in grid], dtype=complex)
    reference = _sample(lambda r: d0_quadrature(r, spec), grid, "d0_profile")
    return ProfileCurve(ProfileKind.D0, grid, values, DELTA_PACKET, reference=reference.real)


def dz_regular_profile(z_grid, spec=None):
    grid = _grid(z_grid, allow_zero=False, allow_negative=True)
    values = _sample(lambda z: dz_regular(z, spec), grid, "dz_regular_profile")
    reference = np.array([dz_regular_closed(z) for z in grid], dtype=complex)
    return ProfileCurve(
        ProfileKind.DZ_REGULAR, grid, values, DELTA_PACKET,
        singular_terms=(AXIAL_SINGULAR_TERM,), reference=reference,
    )


def mo_delta_singular_terms():
    """Point and line distributions of the MO-transformed delta, per spinor component."""
    origin = tuple(
        SingularTerm("delta3(r)", c, "origin", i + 1) for i, c in enumerate(ORIGIN_DELTA_MO) if c != 0
    )
    axial = tuple(axial_singular_term(axis, factor, component) for component, axis, factor in MO_DELTA_AXIAL_WEIGHTS)
    return origin + axial


@dataclass(frozen=True)
class TransformedDelta:
    """MO transform of a delta function placed in the first spinor component."""
    delta_coefficients: FourSpinor = FourSpinor(*ORIGIN_DELTA_MO)
    singular_terms: Tuple[SingularTerm, ...] = field(default_factory=mo_delta_singular_terms)
    spec: Optional[QuadratureSpec] = None

    def regular_part(self, point):
        point = np.asarray(point, dtype=float).reshape(3)
        r = float(np.linalg.norm(point))
        d0 = d0_closed(r)
        dx, dy, dz = d_regular(point, self.spec)
        return FourSpinor(d0 + 1j * dz, 1j * dx - dy, 1j * d0 + dz, dx + 1j * dy)

    def __call__(self, point):
        return self.regular_part(point)


def transformed_delta_mo(spec=None):
    return TransformedDelta(spec=spec)

##########################################################
# DELTA INPUT: FW
##########################################################

def b0_g(k):
    """G(k) = 1 / (1 + sqrt(1 + 1/E_k)); G(0) = 1/(sqrt 2 + 1), G(inf) = 1/2."""
    x = 1.0 / math.sqrt(1.0 + k * k)
    return 1.0 / (1.0 + math.sqrt(1.0 + x))


def _b0_remainder(k):
    # G/E minus its first two terms in 1/E, O(E^-3)
    x = 1.0 / math.sqrt(1.0 + k * k)
    s = math.sqrt(1.0 + x)
    return x ** 3 * (s + 3.0) / (8.0 * (1.0 + s) ** 3)


def b0_regular(r, spec=None):
    """
    Exact regular part of the FW-transformed delta function.

    B0 = delta(r)/sqrt2 + FT[G/E]/sqrt2, and G/E = 1/(2E) - 1/(8E^2) + R(k)
    with R = O(E^-3); the first two terms transform in closed form and R goes
    through the Fourier sine routine.
    """
    if not r > 0:
        raise DomainError(f"B0 regular part needs r > 0, got {r}")
    spec = spec or QuadratureSpec.from_env()
    remainder = integrate_fourier_sin(lambda k: k * _b0_remainder(k), r, spec).value
    transformed = (
        bessel_k(1, r) / (4.0 * PI2 * r)
        - math.exp(-r) / (32.0 * math.pi * r)
        + remainder / (2.0 * PI2 * r)
    )
    return transformed / SQRT2


def b0_regular_c0(r, c0=C0_DEFAULT):
    """Constant-G approximation C0 K1(r) / (2 sqrt2 pi^2 r)."""
    if not r > 0:
        raise DomainError(f"B0 regular part needs r > 0, got {r}")
    return c0 * bessel_k(1, r) / (2.0 * SQRT2 * PI2 * r)


def b0_profile(r_grid, c0=C0_DEFAULT, spec=None):
    if not C0_RANGE[0] <= c0 <= C0_RANGE[1]:
        raise DomainError(f"c0={c0} outside accepted range [{C0_RANGE[0]}, {C0_RANGE[1]}]")
    grid = _grid(r_grid, allow_zero=False)
    values = _sample(lambda r: b0_regular(r, spec), grid, "b0_profile")
    reference = np.array([b0_regular_c0(r, c0) for r in grid])
    return ProfileCurve(
        ProfileKind.B0_REGULAR, grid, values, DELTA_PACKET,
        singular_terms=(SingularTerm("delta3(r)", 1.0 / SQRT2, "origin"),), reference=reference,
    )

##########################################################
# GAUSSIAN INPUT
##########################################################

def _energy(k):
    return math.sqrt(1.0 + k * k)


def _norm_fw(k):
    e = _energy(k)
    return math.sqrt(2.0 * e * (e + 1.0))


def _spec_for(packet, spec):
    spec = spec or QuadratureSpec.from_env()
    return spec if spec.tail_cutoff is not None else spec.with_cutoff(packet.cutoff)


def _t0_eta(packet, r, spec):
    d2 = packet.d ** 2
    r2 = r * r

    def integrand(eta):
        a = 0.5 * d2 + eta * eta
        return math.exp(-eta * eta - r2 / (4.0 * a)) / (4.0 * a ** 1.5)

    return 2.0 * integrate_adaptive(integrand, 0.0, ETA_MAX, spec).value


def t0_value(packet, r, spec=None, representation="sinc"):
    """
    T0 at distance r: transform of f_p / (2E).

    representation="sinc" integrates the radial Fourier form; "eta" uses
    1/E = (2/sqrt(pi)) int exp(-eta^2 E^2) d eta and integrates over eta.
    """
    r = abs(float(r))
    scale = packet.prefactor / (SQRT2 * PI2)
    if representation == "eta":
        return scale * _t0_eta(packet, r, spec or QuadratureSpec.from_env())
    if representation != "sinc":
        raise DomainError(f"unknown T0 representation {representation!r}")
    spec = _spec_for(packet, spec)
    g = lambda k: packet.envelope(k) / _energy(k)
    return scale * integrate_oscillatory_sin(g, r, spec).value


def tz_value(packet, z, spec=None):
    """T_z on the z-axis: transform of p_z f_p / (2E), purely imaginary, odd in z."""
    spec = _spec_for(packet, spec)
    scale = packet.prefactor / (SQRT2 * PI2)
    g = lambda k: packet.envelope(k) / _energy(k)
    return 1j * scale * integrate_oscillatory_j1(g, float(z), spec).value


def s0_value(packet, r, spec=None):
    """S0: transform of f_p (E+1)/N_p, first FW component."""
    spec = _spec_for(packet, spec)
    scale = packet.prefactor / PI2
    g = lambda k: packet.envelope(k) * math.sqrt(1.0 + 1.0 / _energy(k))
    return scale * integrate_oscillatory_sin(g, abs(float(r)), spec).value


def s_aux_value(packet, r, spec=None):
    """Transform of f_p / N_p with N_p = sqrt(2E(E+1))."""
    spec = _spec_for(packet, spec)
    scale = SQRT2 * packet.prefactor / PI2
    g = lambda k: packet.envelope(k) / _norm_fw(k)
    return scale * integrate_oscillatory_sin(g, abs(float(r)), spec).value


def sz_value(packet, z, spec=None):
    """S_z on the z-axis: transform of p_z f_p / N_p, equal to -i dS_aux/dz."""
    spec = _spec_for(packet, spec)
    scale = SQRT2 * packet.prefactor / PI2
    g = lambda k: packet.envelope(k) / _norm_fw(k)
    return 1j * scale * integrate_oscillatory_j1(g, float(z), spec).value


def _vector(axial_value, packet, point, spec):
    point = np.asarray(point, dtype=float).reshape(3)
    r = float(np.linalg.norm(point))
    if r == 0:
        return (0j, 0j, 0j)
    axial = axial_value(packet, r, spec)
    return tuple(complex(axial * x / r) for x in point)


def t_vector(packet, point, spec=None):
    """(Tx, Ty, Tz) at a 3D point from the axial profile."""
    return _vector(tz_value, packet, point, spec)


def s_vector(packet, point, spec=None):
    return _vector(sz_value, packet, point, spec)


def gaussian_profile(packet, r_grid):
    grid = _grid(r_grid)
    return ProfileCurve(ProfileKind.GAUSSIAN, grid, packet.position_amplitude(grid), packet)


def t0_profile(packet, r_grid, spec=None, representation="sinc"):
    grid = _grid(r_grid)
    values = _sample(lambda r: t0_value(packet, r, spec, representation), grid, "t0_profile")
    return ProfileCurve(ProfileKind.T0, grid, values, packet, reference=0.5 * packet.position_amplitude(grid))


def tz_profile(packet, z_grid, spec=None):
    grid = _grid(z_grid, allow_negative=True)
    values = _sample(lambda z: tz_value(packet, z, spec), grid, "tz_profile")
    return ProfileCurve(ProfileKind.TZ, grid, values, packet)


def s0_profile(packet, r_grid, spec=None):
    grid = _grid(r_grid)
    values = _sample(lambda r: s0_value(packet, r, spec), grid, "s0_profile")
    return ProfileCurve(ProfileKind.S0, grid, values, packet, reference=packet.position_amplitude(grid))


def s_aux_profile(packet, r_grid, spec=None):
    grid = _grid(r_grid)
    values = _sample(lambda r: s_aux_value(packet, r, spec), grid, "s_aux_profile")
    return ProfileCurve(ProfileKind.S_AUX, grid, values, packet, reference=0.5 * packet.position_amplitude(grid))


def sz_profile(packet, z_grid, spec=None):
    grid = _grid(z_grid, allow_negative=True)
    values = _sample(lambda z: sz_value(packet, z, spec), grid, "sz_profile")
    return ProfileCurve(ProfileKind.SZ, grid, values, packet)


@dataclass(frozen=True)
class TransformedGaussian:
    """Position-space transformed Gaussian spinor, evaluated pointwise.

    The packet starts in the first spinor component. MO acts on the
    V-rotated spinor.
    """
    kind: TransformKind
    packet: PacketSpec
    spec: Optional[QuadratureSpec] = None

    def __call__(self, point):
        point = np.asarray(point, dtype=float).reshape(3)
        r = float(np.linalg.norm(point))
        if self.kind == TransformKind.FW:
            s0 = s0_value(self.packet, r, self.spec)
            sx, sy, sz = s_vector(self.packet, point, self.spec)
            return FourSpinor(s0, 0j, -sz, -sx - 1j * sy)
        f = float(self.packet.position_amplitude(r))
        t0 = t0_value(self.packet, r, self.spec)
        tx, ty, tz = t_vector(self.packet, point, self.spec)
        return FourSpinor(
            0.5 * f + t0 + 1j * tz,
            1j * tx - ty,
            -0.5j * f + 1j * t0 + tz,
            tx + 1j * ty,
        )


def transformed_gaussian_mo(packet, spec=None):
    return TransformedGaussian(TransformKind.MO, packet, spec)


def transformed_gaussian_fw(packet, spec=None):
    return TransformedGaussian(TransformKind.FW, packet, spec)
