import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modulaire.errors import DimensionError, DomainError, PreconditionError
from modulaire.linalg import (
    Tolerances,
    eig_hermitian,
    hs_inner,
    kron,
    matrix_function,
    matrix_to_vector,
    operator_norm,
    partial_trace,
    partial_transpose_to_matrix,
    random_hermitian,
    random_matrix,
    random_unit_vector,
    safe_log,
)

from conftest import e

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def test_hs_inner_examples():
    assert hs_inner(np.eye(2), np.eye(2)) == 2
    i2p = np.eye(2) / np.sqrt(2)
    assert hs_inner(i2p, i2p) == pytest.approx(1.0, abs=1e-15)
    assert hs_inner(e(2, 1, 2), e(2, 2, 1)) == 0


def test_hs_inner_shape_mismatch():
    with pytest.raises(DimensionError):
        hs_inner(np.eye(2), np.eye(3))


def test_operator_norm_examples():
    for n in (1, 3, 7):
        assert operator_norm(np.eye(n)) == pytest.approx(1.0)
    assert operator_norm(np.zeros((3, 3))) == 0
    # singular values of diag(3, -4) are |3| and |-4|
    assert operator_norm(np.diag([3.0, -4.0])) == pytest.approx(max(abs(3.0), abs(-4.0)))


def test_eig_hermitian_examples(tol):
    assert np.allclose(eig_hermitian(np.diag([1.0, 1.0, 0.0]), tol).eigenvalues, [0, 1, 1])
    assert np.allclose(eig_hermitian(np.ones((3, 3)) / 3, tol).eigenvalues, [0, 0, 1], atol=1e-14)
    # characteristic polynomial of sigma_x: t^2 - 1
    roots = sorted(np.roots([1, 0, -1]).real)
    assert np.allclose(eig_hermitian(SX, tol).eigenvalues, roots)


def test_eig_hermitian_rejects_non_hermitian(tol):
    with pytest.raises(PreconditionError, match="a - a\\^dagger"):
        eig_hermitian(e(2, 1, 2), tol)


@pytest.mark.parametrize("n", [1, 2, 5, 16, 64])
def test_eig_reconstruction_and_unitarity(n, rng, tol):
    a = random_hermitian(n, rng)
    es = eig_hermitian(a, tol)
    scale = np.linalg.norm(a, 2)
    assert np.linalg.norm(a - es.reconstruct(), 2) < tol.eig * scale
    u = es.eigenvectors
    assert np.linalg.norm(u.conj().T @ u - np.eye(n), 2) < tol.eig
    assert np.all(np.diff(es.eigenvalues) >= 0)


def test_eig_degenerate_cluster_gives_orthonormal_basis(rng, tol):
    u = np.linalg.qr(random_matrix(4, rng))[0]
    a = u @ np.diag([2.0, 2.0, 2.0, -1.0]) @ u.conj().T
    es = eig_hermitian(a, tol)
    block = es.eigenvectors[:, 1:]
    assert np.allclose(block.conj().T @ block, np.eye(3), atol=1e-12)
    assert np.allclose(a @ block, 2 * block, atol=1e-12)


def test_matrix_function_examples(tol):
    p = np.ones((3, 3)) / 3
    assert np.allclose(matrix_function(p, np.square, tol), p, atol=1e-14)
    assert np.allclose(matrix_function(np.diag([1.0, 4.0]), np.sqrt, tol), np.diag([1.0, 2.0]))
    got = matrix_function(np.diag([math.e, math.e**2]), np.log, tol)
    assert np.allclose(got, np.diag([math.log(math.e), math.log(math.e**2)]), atol=1e-14)


def test_matrix_function_identity_is_idempotent(rng, tol):
    a = random_hermitian(5, rng)
    once = matrix_function(a, lambda x: x, tol)
    assert np.allclose(once, a, atol=1e-12)
    assert np.allclose(matrix_function(once, lambda x: x, tol), once, atol=1e-12)


def test_matrix_function_domain_errors(tol):
    with pytest.raises(DomainError, match="-1"):
        matrix_function(np.diag([-1.0, 2.0]), np.log, tol, domain=lambda x: x > 0)
    with pytest.raises(DomainError):
        matrix_function(np.diag([0.0, 2.0]), np.log, tol)
    # with the 0 log 0 convention declared, zero eigenvalues map to 0
    assert np.allclose(safe_log(np.diag([0.0, 1.0]), tol), 0)


def test_kron_examples():
    d = np.diag([1.0, 0.0])
    assert np.array_equal(kron(d, d), np.diag([1.0, 0, 0, 0]))
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    got = kron(e(2, 1, 2), e(2, 2, 1))
    expected = np.zeros((4, 4))
    # (i*2 + k, j*2 + l) with (i, j) = (0, 1) and (k, l) = (1, 0)
    expected[0 * 2 + 1, 1 * 2 + 0] = 1
    assert np.array_equal(got, expected)


def test_partial_trace_examples(rng):
    p1, p2 = 0.3, 0.7
    c1, c2 = np.sqrt(p1), np.sqrt(p2) * np.exp(0.4j)
    psi = np.array([c1, 0, 0, c2])
    rho = np.outer(psi, psi.conj())
    assert np.allclose(partial_trace(rho, (2, 2), keep=0), np.diag([p1, p2]))
    ra = random_hermitian(3, rng)
    rb = random_hermitian(2, rng) + 3 * np.eye(2)
    rb = rb / np.trace(rb)
    assert np.allclose(partial_trace(kron(ra, rb), (3, 2), keep=0), ra)
    for keep in (0, 1):
        assert np.allclose(partial_trace(np.eye(4) / 4, (2, 2), keep=keep), np.eye(2) / 2)


def test_partial_trace_of_product_scales_by_other_trace(rng):
    a, b = random_matrix(3, rng), random_matrix(4, rng)
    assert np.allclose(partial_trace(kron(a, b), (3, 4), keep=0), a * np.trace(b))
    assert np.allclose(partial_trace(kron(a, b), (3, 4), keep=1), b * np.trace(a))


def test_partial_trace_preserves_trace(rng):
    rho = random_matrix(6, rng)
    for keep in (0, 1):
        assert np.trace(partial_trace(rho, (2, 3), keep)) == pytest.approx(np.trace(rho))


def test_partial_trace_bad_dims():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(6), (2, 2))


def test_tilde_examples(rng):
    c = np.array([0.6, 0.8j, 0.0])
    psi = sum(c[k] * np.kron(np.eye(3)[k], np.eye(3)[k]) for k in range(3))
    assert np.allclose(partial_transpose_to_matrix(psi, (3, 3)), np.diag(c))
    prod = np.kron([1, 0], [0, 1])
    assert np.array_equal(partial_transpose_to_matrix(prod, (2, 2)), e(2, 1, 2))


def test_tilde_reduced_densities(rng):
    n = 4
    psi = random_unit_vector(n * n, rng)
    t = partial_transpose_to_matrix(psi, (n, n))
    rho = np.outer(psi, psi.conj())
    rho1 = partial_trace(rho, (n, n), 0)
    rho2 = partial_trace(rho, (n, n), 1)
    assert np.abs(t @ t.conj().T - rho1).max() < 1e-12
    # the second reduction appears transposed in the tilde picture
    assert np.abs(t.conj().T @ t - rho2.T).max() < 1e-12


def test_tilde_round_trip_and_isometry(rng):
    psi = random_matrix(9, rng, 1).reshape(-1)
    t = partial_transpose_to_matrix(psi, (3, 3))
    assert np.array_equal(matrix_to_vector(t), psi)
    assert abs(np.linalg.norm(t) - np.linalg.norm(psi)) < 1e-12
    phi = random_matrix(9, rng, 1).reshape(-1)
    assert hs_inner(t, partial_transpose_to_matrix(phi, (3, 3))) == pytest.approx(np.vdot(psi, phi))


def test_tilde_rejects_non_square():
    with pytest.raises(DimensionError):
        partial_transpose_to_matrix(np.ones(6), (2, 3))


def test_tolerances_must_be_positive():
    with pytest.raises(ValueError):
        Tolerances(eig=0.0)
    with pytest.raises(ValueError):
        Tolerances(rank=-1e-9)


def test_tolerances_env_override(monkeypatch):
    monkeypatch.setenv("MODULAIRE_TOL", "1e-7")
    assert Tolerances.from_env().eig == 1e-7


complex_entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def matrices(n):
    return st.lists(complex_entries, min_size=n * n, max_size=n * n).map(
        lambda xs: np.array(xs, dtype=complex).reshape(n, n)
    )


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(matrices(n), matrices(n))))
def test_cauchy_schwarz(pair):
    a, b = pair
    lhs = abs(hs_inner(a, b)) ** 2
    rhs = hs_inner(a, a).real * hs_inner(b, b).real
    assert lhs <= rhs * (1 + 1e-12) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(matrices(n), matrices(n))))
def test_cstar_identity_and_submultiplicativity(pair):
    a, b = pair
    na = operator_norm(a)
    assert abs(operator_norm(a.conj().T @ a) - na**2) <= 1e-9 * max(1.0, na**2)
    assert operator_norm(a @ b) <= na * operator_norm(b) * (1 + 1e-12) + 1e-12
