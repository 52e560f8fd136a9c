"""Dirac matrices, free Hamiltonians and the momentum-space unitaries.

Natural units throughout: hbar = m = c = 1, so momenta are in units of mc,
energies in units of mc^2 and lengths in units of the Compton wavelength.
Matrices are dense 4x4 complex numpy arrays in the standard (Dirac)
representation; the module-level constants are read-only.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from shared.exceptions import DomainError

Matrix4C = np.ndarray

UNITARITY_TOL = 1e-12
HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class Momentum3:
    px: float
    py: float
    pz: float

    def __post_init__(self):
        for name in ("px", "py", "pz"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"momentum component {name}={value} is not finite")

    @classmethod
    def coerce(cls, p):
        if isinstance(p, cls):
            return p
        px, py, pz = (float(c) for c in p)
        return cls(px, py, pz)

    def as_array(self):
        return np.array([self.px, self.py, self.pz], dtype=float)

    @property
    def magnitude_squared(self):
        return self.px * self.px + self.py * self.py + self.pz * self.pz


class FourSpinor(NamedTuple):
    c1: complex
    c2: complex
    c3: complex
    c4: complex

    @classmethod
    def from_array(cls, values):
        return cls(*(complex(v) for v in np.asarray(values).reshape(4)))

    def as_array(self):
        return np.array(self, dtype=complex)

    @property
    def norm_squared(self):
        return float(sum(abs(c) ** 2 for c in self))


class DiracMatrices(NamedTuple):
    alpha_x: Matrix4C
    alpha_y: Matrix4C
    alpha_z: Matrix4C
    beta: Matrix4C
    delta: Matrix4C


def _frozen(m):
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


def _build_matrices():
    identity2 = np.eye(2, dtype=complex)
    zero2 = np.zeros((2, 2), dtype=complex)
    sigma = (
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    )
    alphas = [np.block([[zero2, s], [s, zero2]]) for s in sigma]
    beta = np.block([[identity2, zero2], [zero2, -identity2]])
    delta = alphas[0] @ alphas[1] @ alphas[2] @ beta
    return DiracMatrices(*(_frozen(m) for m in (*alphas, beta, delta)))


_MATRICES = _build_matrices()
IDENTITY4 = _frozen(np.eye(4))
_V = _frozen((IDENTITY4 + _MATRICES.delta @ _MATRICES.beta) / math.sqrt(2.0))


def dirac_matrices():
    """Return (alpha_x, alpha_y, alpha_z, beta, delta), delta = alpha_x alpha_y alpha_z beta."""
    return _MATRICES


def energy(p):
    """E_p = sqrt(1 + p^2)."""
    return math.sqrt(1.0 + Momentum3.coerce(p).magnitude_squared)


def _alpha_dot(p):
    m = _MATRICES
    return p.px * m.alpha_x + p.py * m.alpha_y + p.pz * m.alpha_z


def hamiltonian(p):
    """Free Dirac Hamiltonian alpha.p + beta."""
    p = Momentum3.coerce(p)
    return _alpha_dot(p) + _MATRICES.beta


def hamiltonian_prime(p):
    """alpha.p + delta: the Hamiltonian after the constant rotation V, zero diagonal."""
    p = Momentum3.coerce(p)
    return _alpha_dot(p) + _MATRICES.delta


def u_fw(p):
    """Foldy-Wouthuysen unitary (E + beta H) / sqrt(2E(E+1)).

    Args:
        p: Momentum3 or any 3-sequence of finite floats.

    Returns:
        Matrix4C with U H U^dagger = diag(E, E, -E, -E).
    """
    p = Momentum3.coerce(p)
    e = energy(p)
    numerator = e * IDENTITY4 + _MATRICES.beta @ hamiltonian(p)
    return numerator / math.sqrt(2.0 * e * (e + 1.0))


def v_op():
    """Constant unitary delta (delta + beta) / sqrt(2); maps beta onto delta."""
    return _V


def u_mo(p):
    """Momentum-dependent second step (beta + H'/E) / sqrt(2), acting on V-rotated spinors."""
    p = Momentum3.coerce(p)
    return (_MATRICES.beta + hamiltonian_prime(p) / energy(p)) / math.sqrt(2.0)


def u_mo_composed(p):
    """Full two-step map U_MO(p) V applied to spinors in the original representation."""
    return u_mo(p) @ _V

##########################################################
# MATRIX CHECKS
##########################################################

def dagger(m):
    return np.conj(np.asarray(m)).T


def anticommutator(a, b):
    return a @ b + b @ a


def max_abs_deviation(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def is_unitary(m, tol=UNITARITY_TOL):
    return max_abs_deviation(m @ dagger(m), IDENTITY4) <= tol


def is_hermitian(m, tol=HERMITICITY_TOL):
    return max_abs_deviation(m, dagger(m)) <= tol
