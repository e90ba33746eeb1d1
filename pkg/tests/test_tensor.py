from __future__ import annotations

import numpy as np
import pytest

from eigenevent.tensor import (
    EigenSummary,
    hosvd_rank1,
    leading_singular_triplet,
    matrix_summary,
    mode_fold,
    mode_unfold,
    sign_normalize,
)


def oracle_leading_eigpair(gram: np.ndarray) -> tuple[float, np.ndarray]:
    # Dense symmetric eigensolver used as the independent reference.
    vals, vecs = np.linalg.eigh(gram)
    return float(vals[-1]), vecs[:, -1]


def oracle_triplet(m: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    eig_u, u = oracle_leading_eigpair(m @ m.T)
    _, v = oracle_leading_eigpair(m.T @ m)
    return float(np.sqrt(max(eig_u, 0.0))), sign_normalize(u), sign_normalize(v)


def test_diagonal_matrix_triplet():
    sigma, u, v = leading_singular_triplet(np.diag([2.0, 1.0]))
    assert sigma == pytest.approx(2.0, abs=1e-10)
    assert np.allclose(u, [1.0, 0.0], atol=1e-8)
    assert np.allclose(v, [1.0, 0.0], atol=1e-8)


def test_rank_one_matrix_recovers_factors():
    left = np.array([0.6, 0.8])
    right = np.array([1.0, 0.0, 0.0])
    sigma, u, v = leading_singular_triplet(3.0 * np.outer(left, right))
    assert sigma == pytest.approx(3.0, abs=1e-10)
    assert np.allclose(u, left, atol=1e-9)
    assert np.allclose(v, right, atol=1e-9)
    assert np.allclose(sigma * np.outer(u, v), 3.0 * np.outer(left, right), atol=1e-8)


def test_zero_matrix_has_defined_result():
    sigma, u, v = leading_singular_triplet(np.zeros((3, 4)))
    assert sigma == 0.0
    assert np.array_equal(u, [1.0, 0.0, 0.0])
    assert np.array_equal(v, [1.0, 0.0, 0.0, 0.0])


def test_triplet_matches_dense_eigensolver_oracle():
    rng = np.random.default_rng(42)
    m = rng.standard_normal((5, 7))
    want_sigma, want_u, want_v = oracle_triplet(m)
    sigma, u, v = leading_singular_triplet(m)
    assert sigma == pytest.approx(want_sigma, abs=1e-8)
    assert np.allclose(u, want_u, atol=1e-6)
    assert np.allclose(v, want_v, atol=1e-6)


def test_sigma_dominates_random_directions():
    rng = np.random.default_rng(7)
    m = rng.standard_normal((6, 9))
    sigma, _, _ = leading_singular_triplet(m)
    for _ in range(200):
        x = rng.standard_normal(9)
        x /= np.linalg.norm(x)
        assert sigma + 1e-9 >= np.linalg.norm(m @ x)


def test_triplet_is_bitwise_deterministic():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((8, 5))
    first = leading_singular_triplet(m)
    second = leading_singular_triplet(m)
    assert first.sigma == second.sigma
    assert np.array_equal(first.u, second.u)
    assert np.array_equal(first.v, second.v)


def test_sign_normalize_is_idempotent():
    rng = np.random.default_rng(11)
    for _ in range(50):
        vec = rng.standard_normal(6)
        vec /= np.linalg.norm(vec)
        once = sign_normalize(vec)
        assert np.array_equal(sign_normalize(once), once)
        assert once.sum() >= 0.0 or once[np.argmax(np.abs(once))] > 0.0


def test_rejects_nonfinite_input():
    with pytest.raises(ValueError):
        leading_singular_triplet(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        hosvd_rank1(np.full((2, 2, 2), np.inf))


def test_unfold_definition_on_small_tensor():
    # Entries 1..8 laid out space-fastest: t[i, j, k] = 1 + i + 2j + 4k.
    t = np.array([1 + i + 2 * j + 4 * k for k in range(2) for j in range(2) for i in range(2)])
    t = t.reshape(2, 2, 2, order="F").astype(float)
    unfolded = mode_unfold(t, "space")
    assert unfolded.shape == (2, 4)
    assert np.array_equal(unfolded[0], [1.0, 3.0, 5.0, 7.0])
    assert np.array_equal(unfolded[1], [2.0, 4.0, 6.0, 8.0])


def test_unfold_preserves_entry_multiset_and_frobenius_norm():
    rng = np.random.default_rng(5)
    t = rng.standard_normal((3, 4, 5))
    frob = np.sqrt((t**2).sum())
    for mode in ("space", "feature", "time"):
        unfolded = mode_unfold(t, mode)
        assert sorted(unfolded.ravel()) == sorted(t.ravel())
        assert np.sqrt((unfolded**2).sum()) == pytest.approx(frob, abs=1e-12)


def test_unfold_fold_roundtrip():
    rng = np.random.default_rng(9)
    t = rng.standard_normal((4, 2, 6))
    for mode in range(3):
        assert np.array_equal(mode_fold(mode_unfold(t, mode), mode, t.shape), t)


def test_hosvd_recovers_rank_one_tensor():
    a = sign_normalize(np.array([0.5, 0.5, 0.5, 0.5]))
    b = sign_normalize(np.array([3.0, 4.0]) / 5.0)
    c = sign_normalize(np.array([1.0, 2.0, 2.0]) / 3.0)
    t = 5.0 * np.einsum("i,j,k->ijk", a, b, c)
    summary = hosvd_rank1(t)
    assert summary.eigenvalue == pytest.approx(5.0, abs=1e-9)
    assert np.allclose(summary.space_vector, a, atol=1e-9)
    assert np.allclose(summary.feature_vector, b, atol=1e-9)
    assert np.allclose(summary.time_vector, c, atol=1e-9)
    assert not summary.degenerate


def test_hosvd_single_slice_equals_matrix_triplet():
    rng = np.random.default_rng(21)
    slab = rng.poisson(4.0, size=(5, 7)).astype(float)
    summary = hosvd_rank1(slab[:, :, None])
    sigma, u, v = leading_singular_triplet(slab)
    assert summary.eigenvalue == pytest.approx(sigma, abs=1e-8)
    assert np.allclose(summary.space_vector, u, atol=1e-8)
    assert np.allclose(summary.feature_vector, v, atol=1e-8)
    assert np.array_equal(summary.time_vector, [1.0])


def test_hosvd_matches_per_mode_oracle():
    rng = np.random.default_rng(17)
    t = rng.standard_normal((4, 5, 6))
    summary = hosvd_rank1(t)
    got = [summary.space_vector, summary.feature_vector, summary.time_vector]
    for mode in range(3):
        unfolding = mode_unfold(t, mode)
        _, want = oracle_leading_eigpair(unfolding @ unfolding.T)
        assert np.allclose(got[mode], sign_normalize(want), atol=1e-8)
    want_core = abs(float(np.einsum("ijk,i,j,k->", t, *got)))
    assert summary.eigenvalue == pytest.approx(want_core, abs=1e-10)


def test_hosvd_zero_tensor():
    summary = hosvd_rank1(np.zeros((2, 3, 4)))
    assert summary.eigenvalue == 0.0
    assert np.array_equal(summary.space_vector, [1.0, 0.0])
    assert np.array_equal(summary.time_vector, [1.0, 0.0, 0.0, 0.0])


def test_hosvd_eigenvalue_invariant_under_mode_permutation():
    rng = np.random.default_rng(23)
    t = rng.standard_normal((3, 4, 5))
    base = hosvd_rank1(t)
    for perm in ((1, 0, 2), (2, 1, 0), (1, 2, 0)):
        permuted = hosvd_rank1(np.transpose(t, perm))
        assert permuted.eigenvalue == pytest.approx(base.eigenvalue, abs=1e-9)
        base_vecs = [base.space_vector, base.feature_vector, base.time_vector]
        perm_vecs = [permuted.space_vector, permuted.feature_vector, permuted.time_vector]
        for out_mode, in_mode in enumerate(perm):
            assert np.allclose(perm_vecs[out_mode], base_vecs[in_mode], atol=1e-9)


def test_scaling_scales_eigenvalue_only():
    rng = np.random.default_rng(29)
    t = rng.poisson(3.0, size=(4, 4, 4)).astype(float)
    base = hosvd_rank1(t)
    scaled = hosvd_rank1(2.5 * t)
    assert scaled.eigenvalue == pytest.approx(2.5 * base.eigenvalue, rel=1e-9)
    assert np.allclose(scaled.space_vector, base.space_vector, atol=1e-9)
    assert np.allclose(scaled.feature_vector, base.feature_vector, atol=1e-9)
    assert np.allclose(scaled.time_vector, base.time_vector, atol=1e-9)


def test_matrix_summary_shape():
    summary = matrix_summary(np.eye(3))
    assert isinstance(summary, EigenSummary)
    assert summary.time_vector is None
