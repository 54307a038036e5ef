"""Tensor algebra unit tests: matricization, mode products, Tucker assembly,
truncated SVD, and HOSVD truncation."""

import numpy as np
import pytest

from tensorcine import (
    TuckerTensor,
    dematricize,
    hosvd_truncate,
    kron_chain,
    matricize,
    mode_product,
    multilinear_rank,
    tucker_assemble,
    truncated_svd,
    validate_rank,
)


def crandn(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ---------------------------------------------------------------------------
# matricize / dematricize


def test_matricize_worked_example():
    # first-index-fastest storage of 1..8 in a 2x2x2 tensor
    x = np.reshape(np.arange(1.0, 9.0), (2, 2, 2), order="F")
    expected = np.array([[1.0, 3.0, 5.0, 7.0], [2.0, 4.0, 6.0, 8.0]])
    np.testing.assert_array_equal(matricize(x, 0), expected)


def test_matricize_index_map_brute_force():
    # enumerate the documented index map entry by entry
    rng = np.random.default_rng(0)
    shape = (3, 4, 2)
    x = crandn(rng, shape)
    for mode in range(3):
        m = matricize(x, mode)
        others = [k for k in range(3) if k != mode]
        for idx in np.ndindex(shape):
            col = 0
            stride = 1
            for k in others:
                col += idx[k] * stride
                stride *= shape[k]
            assert m[idx[mode], col] == x[idx]


def test_matricize_dematricize_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(100):
        ndim = int(rng.integers(1, 5))
        shape = tuple(int(n) for n in rng.integers(1, 6, size=ndim))
        x = crandn(rng, shape)
        for mode in range(ndim):
            back = dematricize(matricize(x, mode), mode, shape)
            np.testing.assert_array_equal(back, x)


def test_matricize_rank_one_tensor():
    rng = np.random.default_rng(2)
    a, b, c = crandn(rng, 4), crandn(rng, 5), crandn(rng, 3)
    x = np.einsum("i,j,k->ijk", a, b, c)
    for mode in range(3):
        assert np.linalg.matrix_rank(matricize(x, mode)) == 1


def test_matricize_mode_out_of_range():
    x = np.zeros((2, 2))
    with pytest.raises(ValueError):
        matricize(x, 2)
    with pytest.raises(ValueError):
        matricize(x, -1)


def test_dematricize_trivial_and_zero():
    one = np.array([[2.0 + 1j]])
    np.testing.assert_array_equal(dematricize(one, 0, (1, 1, 1)), one.reshape(1, 1, 1))
    z = dematricize(np.zeros((3, 8)), 1, (4, 3, 2))
    assert z.shape == (4, 3, 2)
    assert not z.any()


def test_dematricize_shape_mismatch():
    with pytest.raises(ValueError):
        dematricize(np.zeros((3, 7)), 1, (4, 3, 2))


# ---------------------------------------------------------------------------
# mode products


def test_mode_product_identity_and_zero():
    rng = np.random.default_rng(3)
    x = crandn(rng, (3, 4, 2))
    np.testing.assert_array_equal(mode_product(x, np.eye(4), 1), x)
    out = mode_product(x, np.zeros((6, 3)), 0)
    assert out.shape == (6, 4, 2)
    assert not out.any()


def test_mode_product_defining_identity():
    # oracle: the matricized multiply computed independently of mode_product
    rng = np.random.default_rng(4)
    x = crandn(rng, (3, 4, 2))
    m = crandn(rng, (5, 3))
    y = mode_product(x, m, 0)
    np.testing.assert_allclose(matricize(y, 0), m @ matricize(x, 0), atol=1e-13)
    # and entrywise via an explicit contraction
    direct = np.einsum("ai,ijk->ajk", m, x)
    np.testing.assert_allclose(y, direct, atol=1e-13)


def test_mode_product_shape_mismatch():
    with pytest.raises(ValueError):
        mode_product(np.zeros((3, 4, 2)), np.zeros((5, 4)), 0)


def test_mode_product_associativity_across_modes():
    rng = np.random.default_rng(5)
    x = crandn(rng, (4, 3, 5))
    a = crandn(rng, (2, 4))
    b = crandn(rng, (6, 3))
    lhs = mode_product(mode_product(x, a, 0), b, 1)
    rhs = mode_product(mode_product(x, b, 1), a, 0)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


# ---------------------------------------------------------------------------
# Tucker assembly


def test_tucker_assemble_rank_one():
    rng = np.random.default_rng(6)
    u = [crandn(rng, (n, 1)) for n in (4, 3, 5)]
    u = [m / np.linalg.norm(m) for m in u]
    c = 2.5 - 0.5j
    t = TuckerTensor(np.full((1, 1, 1), c), u)
    expected = c * np.einsum("i,j,k->ijk", u[0][:, 0], u[1][:, 0], u[2][:, 0])
    np.testing.assert_allclose(tucker_assemble(t), expected, atol=1e-14)


def test_tucker_assemble_identity_factors():
    rng = np.random.default_rng(7)
    x = crandn(rng, (3, 4, 2))
    t = TuckerTensor(x, [np.eye(3), np.eye(4), np.eye(2)])
    np.testing.assert_array_equal(tucker_assemble(t), x)


def test_tucker_assemble_kronecker_expansion():
    # matricization identity X_(i) = U_i C_(i) (U_d (x) ... (x) U_1, skip i)^T
    rng = np.random.default_rng(8)
    shape, rank = (4, 4, 4), (2, 2, 2)
    factors = [np.linalg.qr(crandn(rng, (n, r)))[0] for n, r in zip(shape, rank)]
    core = crandn(rng, rank)
    x = tucker_assemble(TuckerTensor(core, factors))
    for i in range(3):
        others = [factors[j] for j in range(3) if j != i]
        expected = factors[i] @ matricize(core, i) @ kron_chain(others).T
        np.testing.assert_allclose(matricize(x, i), expected, atol=1e-12)


def test_validate_rank_rejects_infeasible():
    with pytest.raises(ValueError):
        validate_rank((4, 4, 4), (5, 2, 2))
    with pytest.raises(ValueError):
        validate_rank((4, 4, 4), (4, 1, 1))  # r_0 > r_1 * r_2
    with pytest.raises(ValueError):
        validate_rank((4, 4, 4), (2, 2))
    assert validate_rank((4, 4, 4), (2, 2, 2)) == (2, 2, 2)


def test_tucker_tensor_requires_orthonormal_factors():
    rng = np.random.default_rng(9)
    core = crandn(rng, (2, 2, 2))
    bad = [2.0 * np.linalg.qr(crandn(rng, (4, 2)))[0] for _ in range(3)]
    with pytest.raises(ValueError):
        TuckerTensor(core, bad)


# ---------------------------------------------------------------------------
# truncated SVD


def test_truncated_svd_diagonal():
    u, s, v = truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
    np.testing.assert_allclose(s, [3.0, 2.0])
    assert u.shape == (3, 2) and v.shape == (3, 2)


def test_truncated_svd_rank_one():
    rng = np.random.default_rng(10)
    a = crandn(rng, 5)
    b = crandn(rng, 7)
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    m = np.outer(a, b.conj())
    u, s, v = truncated_svd(m, 1)
    np.testing.assert_allclose(s, [1.0], atol=1e-12)
    recon = u @ np.diag(s) @ v.conj().T
    np.testing.assert_allclose(recon, m, atol=1e-12)


def test_truncated_svd_tail_sum_oracle():
    # Frobenius error of the rank-k truncation equals the discarded tail
    rng = np.random.default_rng(11)
    for _ in range(25):
        m = crandn(rng, (8, 6))
        sigma = np.linalg.svd(m, compute_uv=False)
        u, s, v = truncated_svd(m, 3)
        err = np.linalg.norm(m - u @ np.diag(s) @ v.conj().T) ** 2
        tail = float(np.sum(sigma[3:] ** 2))
        assert abs(err - tail) <= 1e-8 * max(tail, 1e-30)
        np.testing.assert_allclose(s, sigma[:3], rtol=1e-12)


def test_truncated_svd_orthonormal_columns():
    rng = np.random.default_rng(12)
    m = crandn(rng, (9, 5))
    u, s, v = truncated_svd(m, 4)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(4), atol=1e-12)
    assert np.all(np.diff(s) <= 1e-12) and np.all(s >= 0)


def test_truncated_svd_phase_convention():
    # largest-magnitude entry of each left singular vector is real positive,
    # which makes repeated factorizations bit-identical
    rng = np.random.default_rng(13)
    m = crandn(rng, (8, 8))
    u, s, v = truncated_svd(m, 5)
    for j in range(5):
        peak = u[np.argmax(np.abs(u[:, j])), j]
        assert abs(peak.imag) <= 1e-12 * abs(peak)
        assert peak.real > 0
    u2, s2, v2 = truncated_svd(m.copy(), 5)
    np.testing.assert_array_equal(u, u2)
    np.testing.assert_array_equal(s, s2)
    np.testing.assert_array_equal(v, v2)


def test_truncated_svd_k_out_of_range():
    with pytest.raises(ValueError):
        truncated_svd(np.zeros((4, 3)), 4)
    with pytest.raises(ValueError):
        truncated_svd(np.zeros((4, 3)), 0)


# ---------------------------------------------------------------------------
# HOSVD truncation


def test_hosvd_exact_rank_recovery():
    rng = np.random.default_rng(14)
    shape, rank = (8, 7, 5), (3, 2, 2)
    factors = [np.linalg.qr(crandn(rng, (n, r)))[0] for n, r in zip(shape, rank)]
    x = tucker_assemble(TuckerTensor(crandn(rng, rank), factors))
    t = hosvd_truncate(x, rank)
    err = np.linalg.norm(t.full() - x) / np.linalg.norm(x)
    assert err <= 1e-10


def test_hosvd_zero_tensor():
    t = hosvd_truncate(np.zeros((4, 4, 3), dtype=complex), (2, 2, 1))
    assert not t.core.any()
    assert not t.full().any()


def test_hosvd_quasi_optimality():
    # truncation error bounded by the sum of discarded singular values squared
    rng = np.random.default_rng(15)
    rank = (3, 3, 2)
    for _ in range(20):
        x = crandn(rng, (10, 10, 5))
        t = hosvd_truncate(x, rank)
        err = np.linalg.norm(x - t.full()) ** 2
        bound = 0.0
        for i, r in enumerate(rank):
            sigma = np.linalg.svd(matricize(x, i), compute_uv=False)
            bound += float(np.sum(sigma[r:] ** 2))
        assert err <= bound * (1 + 1e-12)


def test_hosvd_output_structure():
    rng = np.random.default_rng(16)
    x = crandn(rng, (9, 8, 6))
    rank = (4, 3, 2)
    t = hosvd_truncate(x, rank)
    assert t.rank == rank
    for u, r in zip(t.factors, rank):
        np.testing.assert_allclose(u.conj().T @ u, np.eye(r), atol=1e-10)
    assert all(a <= b for a, b in zip(multilinear_rank(t.full()), rank))


def test_hosvd_infeasible_rank():
    with pytest.raises(ValueError):
        hosvd_truncate(np.zeros((4, 4, 4)), (5, 2, 2))


def test_multilinear_rank_of_assembled_tucker():
    rng = np.random.default_rng(17)
    shape, rank = (6, 6, 4), (3, 2, 2)
    factors = [np.linalg.qr(crandn(rng, (n, r)))[0] for n, r in zip(shape, rank)]
    x = tucker_assemble(TuckerTensor(crandn(rng, rank), factors))
    assert multilinear_rank(x) == rank
