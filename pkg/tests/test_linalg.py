import numpy as np
import pytest

from skewharm.linalg import (BandedLU, SingularFactorError, SolverSettings,
                             Tridiagonal, all_eigenvalues,
                             shift_invert_refine, smallest_singular_value,
                             sturm_min_eigenvalue)
from skewharm.operators import Grid, assemble_H
from skewharm.potentials import Constant

from oracles import (eig_tridiag_charpoly, laplacian_dirichlet_eigs,
                     singular_values_jacobi, solve_dense_ge)


def random_tridiag(rng, n, scale=1.0):
    c = lambda m: scale * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    return Tridiagonal(c(n - 1), c(n), c(n - 1))


def test_matvec_matches_dense():
    rng = np.random.default_rng(3)
    A = random_tridiag(rng, 9)
    D = A.to_dense()
    v = rng.standard_normal(9) + 1j * rng.standard_normal(9)
    assert np.allclose(A.matvec(v), D @ v, atol=1e-13)
    # batched right-hand sides broadcast over the second axis
    V = rng.standard_normal((9, 4)) + 1j * rng.standard_normal((9, 4))
    assert np.allclose(A.matvec(V), D @ V, atol=1e-13)


def test_shifted_and_norm_inf():
    rng = np.random.default_rng(4)
    A = random_tridiag(rng, 7)
    z = 0.3 - 2.0j
    assert np.allclose(A.shifted(z).to_dense(), A.to_dense() - z * np.eye(7))
    D = A.to_dense()
    assert abs(A.norm_inf() - np.abs(D).sum(axis=1).max()) < 1e-12


def test_banded_solve_against_hand_rolled_ge():
    rng = np.random.default_rng(5)
    st = SolverSettings()
    for n in (2, 3, 8, 21, 40):
        A = random_tridiag(rng, n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lu = BandedLU(A, st)
        got = lu.solve(b)
        want = solve_dense_ge(A.to_dense(), b)
        assert np.linalg.norm(got - want) < 1e-9 * np.linalg.norm(want)


def test_banded_solve_conjugate_transpose():
    rng = np.random.default_rng(6)
    st = SolverSettings()
    for n in (3, 12, 33):
        A = random_tridiag(rng, n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        got = BandedLU(A, st).solve(b, conj_transpose=True)
        want = solve_dense_ge(A.to_dense().conj().T, b)
        assert np.linalg.norm(got - want) < 1e-9 * np.linalg.norm(want)


def test_singular_factor_raises_on_solve():
    A = Tridiagonal(np.zeros(2, complex), np.zeros(3, complex),
                    np.zeros(2, complex))
    lu = BandedLU(A, SolverSettings())
    assert lu.singular
    with pytest.raises(SingularFactorError):
        lu.solve(np.ones(3, complex))


def test_sigma_min_against_jacobi_oracle():
    rng = np.random.default_rng(7)
    st = SolverSettings()
    for n in (2, 5, 16, 48):
        A = random_tridiag(rng, n)
        got = smallest_singular_value(A, st)
        want = singular_values_jacobi(A.to_dense())[0]
        assert got.converged
        assert abs(got.value - want) <= 1e-8 * max(want, 1e-30)


def test_sigma_min_handles_degenerate_clusters():
    # all singular values equal: inverse iteration cannot separate them and
    # must rely on stagnation acceptance
    n = 24
    A = Tridiagonal(np.zeros(n - 1, complex),
                    np.full(n, 2.0 - 1.5j), np.zeros(n - 1, complex))
    got = smallest_singular_value(A, SolverSettings())
    assert got.converged
    assert abs(got.value - abs(2.0 - 1.5j)) < 1e-8


def test_all_eigenvalues_against_charpoly_oracle():
    rng = np.random.default_rng(8)
    st = SolverSettings()
    for n in (2, 6, 17, 32):
        A = random_tridiag(rng, n)
        got = all_eigenvalues(A, st)
        want = eig_tridiag_charpoly(A.dl, A.d, A.du)
        assert len(got) == n
        # same multiset in the library's deterministic order
        for a, b in zip(got, want):
            assert abs(a - b) <= 1e-8 * max(1.0, abs(b))


def test_eigenvalue_order_is_deterministic():
    rng = np.random.default_rng(9)
    A = random_tridiag(rng, 12)
    e1 = all_eigenvalues(A, SolverSettings())
    e2 = all_eigenvalues(A, SolverSettings())
    assert np.array_equal(e1, e2)
    key = sorted(range(12), key=lambda i: (e1[i].real, e1[i].imag))
    assert key == list(range(12))


def test_sturm_against_closed_form():
    n, length = 41, 2.0
    h = length / (n + 1)
    diag = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    want = laplacian_dirichlet_eigs(n, length)[0]
    assert abs(sturm_min_eigenvalue(diag, off) - want) < 1e-6


def test_shift_invert_refines_to_true_eigenvalue():
    p = Constant(0.0)
    g = Grid(8.0, 400)
    A = assemble_H(p, 1.0, g)
    st = SolverSettings()
    pair = shift_invert_refine(A, 0.9 + 0.05j, st)
    assert pair.converged
    assert abs(pair.value.imag) < 1e-8
    assert abs(pair.value.real - 1.0) < 1e-3
    # residual is a genuine backward-error certificate
    v = pair.vector
    r = A.matvec(v) - pair.value * v
    assert np.linalg.norm(r) <= 1e-8 * A.norm_inf() * np.linalg.norm(v)
