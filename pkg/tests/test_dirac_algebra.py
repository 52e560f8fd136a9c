import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonloc.dirac_algebra import (
    IDENTITY4,
    FourSpinor,
    Momentum3,
    anticommutator,
    dagger,
    dirac_matrices,
    energy,
    hamiltonian,
    hamiltonian_prime,
    is_hermitian,
    is_unitary,
    max_abs_deviation,
    u_fw,
    u_mo,
    u_mo_composed,
    v_op,
)
from shared.exceptions import DomainError

component = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False, allow_infinity=False)
momenta = st.tuples(component, component, component)


class TestDiracMatrices:

    def setup_method(self):
        self.m = dirac_matrices()

    def test_delta_entry(self):
        assert self.m.delta[0, 2] == pytest.approx(-1j)
        assert self.m.delta[2, 0] == pytest.approx(1j)

    def test_delta_is_product_of_alphas_and_beta(self):
        m = self.m
        np.testing.assert_allclose(m.delta, m.alpha_x @ m.alpha_y @ m.alpha_z @ m.beta, atol=1e-15)

    def test_anticommutation(self):
        alphas = [self.m.alpha_x, self.m.alpha_y, self.m.alpha_z]
        for i, a in enumerate(alphas):
            for j, b in enumerate(alphas):
                expected = 2.0 * IDENTITY4 if i == j else np.zeros((4, 4))
                assert max_abs_deviation(anticommutator(a, b), expected) <= 1e-15
            assert max_abs_deviation(anticommutator(a, self.m.beta), np.zeros((4, 4))) <= 1e-15
            assert max_abs_deviation(anticommutator(a, self.m.delta), np.zeros((4, 4))) <= 1e-15
        assert max_abs_deviation(self.m.beta @ self.m.beta, IDENTITY4) <= 1e-15

    def test_delta_squares_to_identity_and_is_hermitian(self):
        assert max_abs_deviation(self.m.delta @ self.m.delta, IDENTITY4) <= 1e-15
        assert is_hermitian(self.m.delta)

    def test_matrices_are_read_only(self):
        with pytest.raises(ValueError):
            self.m.beta[0, 0] = 2.0


class TestHamiltonians:

    def test_zero_momentum_is_beta(self):
        np.testing.assert_allclose(hamiltonian((0, 0, 0)), dirac_matrices().beta)
        np.testing.assert_allclose(hamiltonian_prime((0, 0, 0)), dirac_matrices().delta)

    def test_eigenvalues_on_axis(self):
        eig = np.sort(np.linalg.eigvalsh(hamiltonian((0, 0, 1))))
        np.testing.assert_allclose(eig, [-math.sqrt(2)] * 2 + [math.sqrt(2)] * 2, atol=1e-12)

    def test_square_is_energy_squared(self):
        p = (0.3, 0.4, 0.0)
        h = hamiltonian(p)
        assert max_abs_deviation(h @ h, energy(p) ** 2 * IDENTITY4) <= 1e-12

    def test_prime_has_zero_diagonal(self):
        np.testing.assert_allclose(np.diag(hamiltonian_prime((0.7, -1.2, 2.5))), np.zeros(4), atol=0)

    def test_prime_is_rotated_hamiltonian(self):
        p = (0.5, 0.0, 0.0)
        v = v_op()
        assert max_abs_deviation(v @ hamiltonian(p) @ dagger(v), hamiltonian_prime(p)) <= 1e-12

    def test_non_finite_momentum_rejected(self):
        with pytest.raises(DomainError):
            hamiltonian((math.nan, 0.0, 0.0))
        with pytest.raises(DomainError):
            Momentum3(0.0, math.inf, 0.0)


class TestUnitaries:

    def test_fw_identity_at_rest(self):
        assert max_abs_deviation(u_fw((0, 0, 0)), IDENTITY4) <= 1e-15

    def test_fw_diagonalizes(self):
        p = (0.7, 0.0, 0.0)
        u = u_fw(p)
        e = math.sqrt(1.49)
        assert max_abs_deviation(u @ hamiltonian(p) @ dagger(u), np.diag([e, e, -e, -e])) <= 1e-12

    def test_v_properties(self):
        m = dirac_matrices()
        v = v_op()
        assert is_unitary(v)
        assert max_abs_deviation(v @ m.beta @ dagger(v), m.delta) <= 1e-15
        magnitudes = np.abs(v).ravel()
        assert all(math.isclose(x, 0.0, abs_tol=1e-15) or math.isclose(x, 1 / math.sqrt(2)) for x in magnitudes)

    def test_mo_at_rest(self):
        m = dirac_matrices()
        u = u_mo((0, 0, 0))
        assert max_abs_deviation(u, (m.beta + m.delta) / math.sqrt(2)) <= 1e-15
        # row 3, column 1 in 1-based indexing
        assert u[2, 0] == pytest.approx(1j / math.sqrt(2))
        assert u[0, 2] == pytest.approx(-1j / math.sqrt(2))

    def test_mo_unitary_on_axis(self):
        assert is_unitary(u_mo((0, 0, 2)))

    def test_mo_separates_energy_signs(self):
        p = (0.3, -0.8, 1.1)
        u = u_mo(p)
        rotated = u @ hamiltonian_prime(p) @ dagger(u)
        e = energy(p)
        assert max_abs_deviation(rotated, e * dirac_matrices().beta) <= 1e-12

    def test_composed_acts_on_original_representation(self):
        p = Momentum3(0.2, 0.1, -0.4)
        u = u_mo_composed(p)
        assert is_unitary(u)
        rotated = u @ hamiltonian(p) @ dagger(u)
        assert max_abs_deviation(rotated, energy(p) * dirac_matrices().beta) <= 1e-12

    def test_mo_column_of_first_basis_vector(self):
        p = (0.6, 0.2, -0.9)
        e = energy(p)
        p_plus = p[0] + 1j * p[1]
        w = np.array([1 + 1j * p[2], 1j * p_plus, 1j + p[2], p_plus])
        expected = 0.5 * np.array([1, 0, -1j, 0]) + w / (2 * e)
        np.testing.assert_allclose(u_mo_composed(p)[:, 0], expected, atol=1e-14)
        assert FourSpinor.from_array(expected).norm_squared == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(momenta)
def test_unitarity_at_random_momenta(p):
    for u in (u_fw(p), v_op(), u_mo(p), u_mo_composed(p)):
        assert max_abs_deviation(u @ dagger(u), IDENTITY4) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(momenta)
def test_rotation_relation_at_random_momenta(p):
    v = v_op()
    assert max_abs_deviation(v @ hamiltonian(p) @ dagger(v), hamiltonian_prime(p)) <= 1e-12
    assert is_hermitian(hamiltonian(p)) and is_hermitian(hamiltonian_prime(p))


@settings(max_examples=100, deadline=None)
@given(momenta)
def test_fw_spectrum_at_random_momenta(p):
    u = u_fw(p)
    e = energy(p)
    eig = np.sort(np.linalg.eigvalsh(u @ hamiltonian(p) @ dagger(u)))
    np.testing.assert_allclose(eig, [-e, -e, e, e], atol=1e-10 * max(1.0, e))
