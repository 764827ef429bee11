import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from upbkit.constructions import make_pyramid, make_tiles, pyramid_vectors
from upbkit.bound_entanglement import complementary_state
from upbkit.linalg import (
    eigh,
    orthonormal_complement,
    partial_trace,
    partial_transpose,
    projector,
    rank_with_tol,
    tensor_product,
    von_neumann_entropy,
)

from conftest import random_density, random_hermitian, random_vector

seeds = st.integers(0, 2**32 - 1)
small_dims = st.lists(st.integers(1, 3), min_size=2, max_size=3)


def test_tensor_product_basis():
    assert np.allclose(tensor_product([[1, 0], [0, 1]]), [0, 1, 0, 0])


def test_tensor_product_empty():
    with pytest.raises(ValueError):
        tensor_product([])


def test_tensor_product_pyramid_first_state():
    v = pyramid_vectors()
    assert np.array_equal(tensor_product([v[0], v[0]]), make_pyramid().states[0].vector)


@given(seeds)
def test_tensor_product_norm_and_associativity(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.standard_normal(d) + 1j * rng.standard_normal(d) for d in (2, 3, 2))
    assert np.linalg.norm(tensor_product([a, b])) == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), rel=1e-12)
    left = tensor_product([tensor_product([a, b]), c])
    right = tensor_product([a, tensor_product([b, c])])
    assert np.max(np.abs(left - right)) <= 1e-14 * max(1, np.max(np.abs(left)))


@given(seeds, small_dims)
def test_partial_transpose_involution_trace_hermiticity(seed, dims):
    rng = np.random.default_rng(seed)
    D = int(np.prod(dims))
    H = random_hermitian(rng, D)
    parties = {0}
    pt = partial_transpose(H, dims, parties)
    assert np.allclose(partial_transpose(pt, dims, parties), H, atol=0)
    assert np.trace(pt) == pytest.approx(np.trace(H), abs=1e-12)
    assert np.max(np.abs(pt - pt.conj().T)) <= 1e-12


def test_partial_transpose_product_projector(rng):
    a, b = random_vector(rng, 3), random_vector(rng, 2)
    rho = projector(np.kron(a, b))
    expected = projector(np.kron(a, b.conj()))
    assert np.allclose(partial_transpose(rho, (3, 2), {1}), expected, atol=1e-14)


def test_partial_transpose_spectrum_complement(rng):
    # transposing T or its complement differs by a global transpose
    dims = (2, 3, 2)
    H = random_hermitian(rng, 12)
    w1 = np.linalg.eigvalsh(partial_transpose(H, dims, {1}))
    w2 = np.linalg.eigvalsh(partial_transpose(H, dims, {0, 2}))
    assert np.allclose(w1, w2, atol=1e-12)


def test_partial_transpose_full_is_transpose(rng):
    H = random_hermitian(rng, 6)
    assert np.allclose(partial_transpose(H, (2, 3), {0, 1}), H.T)


def test_partial_transpose_errors():
    with pytest.raises(ValueError):
        partial_transpose(np.eye(5), (2, 3), {0})
    with pytest.raises(ValueError):
        partial_transpose(np.eye(6), (2, 3), {2})


def test_partial_trace_product(rng):
    a, b = random_vector(rng, 3), random_vector(rng, 2)
    rho = projector(np.kron(a, b))
    assert np.allclose(partial_trace(rho, (3, 2), {0}), projector(a))
    assert np.allclose(partial_trace(rho, (3, 2), {1}), projector(b))


def test_partial_trace_bell():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace(projector(bell), (2, 2), {0}), np.eye(2) / 2)


@given(seeds, small_dims)
def test_partial_trace_preserves_trace_and_psd(seed, dims):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, int(np.prod(dims)))
    red = partial_trace(rho, dims, {len(dims) - 1})
    assert np.trace(red).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(red).min() >= -1e-12


def test_partial_trace_against_explicit_sum(rng):
    # independent route: sum over basis vectors of the traced party
    rho = random_density(rng, 12)
    dims = (2, 3, 2)
    expected = np.zeros((4, 4), dtype=complex)
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1
        op = np.kron(np.kron(np.eye(2), e[None, :]), np.eye(2))
        expected += op @ rho @ op.T
    assert np.allclose(partial_trace(rho, dims, {0, 2}), expected)


def test_rank_examples():
    v = pyramid_vectors()
    assert rank_with_tol(v[:3]) == 3
    assert rank_with_tol([v[0], v[0]]) == 1
    assert rank_with_tol([]) == 0


@given(seeds, st.integers(1, 4))
def test_rank_permutation_and_scale_invariant(seed, k):
    rng = np.random.default_rng(seed)
    vecs = [random_vector(rng, 4) for _ in range(k)]
    vecs.append(vecs[0] + vecs[-1])
    r = rank_with_tol(vecs)
    scaled = [v * (rng.uniform(0.1, 10) * np.exp(1j * rng.uniform(0, 6))) for v in vecs]
    assert rank_with_tol(scaled) == r
    assert rank_with_tol(vecs[::-1]) == r
    assert r == min(k, 4)


def test_complement_examples():
    comp = orthonormal_complement([[1, 0, 0]], 3)
    assert len(comp) == 2
    assert np.allclose(np.abs(np.array(comp)), [[0, 1, 0], [0, 0, 1]])
    assert orthonormal_complement(pyramid_vectors(), 3) == []
    assert len(orthonormal_complement(list(make_pyramid().matrix()), 9)) == 4


def test_complement_of_empty_is_computational_basis():
    assert np.allclose(np.array(orthonormal_complement([], 3)), np.eye(3))


@given(seeds, st.integers(0, 3))
def test_complement_orthonormal_and_orthogonal(seed, k):
    rng = np.random.default_rng(seed)
    vecs = [random_vector(rng, 5) for _ in range(k)]
    comp = np.array(orthonormal_complement(vecs, 5))
    assert comp.shape[0] == 5 - k
    assert np.max(np.abs(comp.conj() @ comp.T - np.eye(5 - k))) <= 1e-10
    if k:
        assert np.max(np.abs(comp.conj() @ np.array(vecs).T)) <= 1e-10


def test_complement_dimension_mismatch():
    with pytest.raises(ValueError):
        orthonormal_complement([[1, 0]], 3)


def test_eigh_examples():
    w, _ = eigh(np.eye(3))
    assert np.allclose(w, 1)
    psi = make_pyramid().states[0].vector
    w, _ = eigh(projector(psi))
    assert np.allclose(w, [0] * 8 + [1], atol=1e-14)
    w, _ = eigh(complementary_state(make_tiles()).mat)
    assert np.allclose(w, [0] * 5 + [0.25] * 4, atol=1e-14)


@given(seeds, st.integers(1, 6))
def test_eigh_residuals_and_reconstruction(seed, d):
    rng = np.random.default_rng(seed)
    H = random_hermitian(rng, d)
    w, x = eigh(H)
    assert np.all(np.diff(w) >= 0)
    nrm = np.linalg.norm(H, 2)
    for lam, v in zip(w, x):
        assert np.linalg.norm(H @ v - lam * v) <= 1e-10 * max(nrm, 1)
    X = np.array(x).T
    assert np.allclose(X.conj().T @ X, np.eye(d), atol=1e-12)
    recon = sum(lam * projector(v) for lam, v in zip(w, x))
    assert np.linalg.norm(H - recon) <= 1e-9 * max(np.linalg.norm(H), 1)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eigh(np.array([[0, 1], [0, 0]]))


def test_entropy_examples():
    assert von_neumann_entropy(projector([1, 0])) == pytest.approx(0, abs=1e-14)
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0)
    assert von_neumann_entropy(np.eye(3) / 3) == pytest.approx(np.log2(3))
    assert round(np.log2(3), 3) == 1.585


def test_entropy_errors():
    with pytest.raises(ValueError):
        von_neumann_entropy(np.eye(2))
    with pytest.raises(ValueError):
        von_neumann_entropy(np.diag([1.5, -0.5]))
