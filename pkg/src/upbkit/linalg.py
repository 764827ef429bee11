"""Dense complex linear algebra on multipartite tensor-product spaces.

Vectors are 1-d complex numpy arrays and operators are square 2-d complex
arrays. Subsystem dimensions are plain sequences of ints, parties are
indexed from 0.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

TOL_ORTH = 1e-10
TOL_RANK = 1e-9
TOL_PSD = 1e-9
TOL_HERM = 1e-12
ENTROPY_CUTOFF = 1e-14


def as_cvec(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a nonempty 1-d vector, got shape {arr.shape}")
    return arr


def total_dim(dims: Sequence[int]) -> int:
    return int(np.prod(dims, dtype=np.int64)) if len(dims) else 1


def _check_dims(rho: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"dimensions must be positive, got {dims}")
    D = total_dim(dims)
    if rho.ndim != 2 or rho.shape != (D, D):
        raise ValueError(f"matrix of shape {rho.shape} does not match dims {dims} (D={D})")
    return dims


def _check_parties(parties: Iterable[int], m: int) -> list[int]:
    parties = sorted(set(int(p) for p in parties))
    for p in parties:
        if not 0 <= p < m:
            raise ValueError(f"party index {p} out of range for {m} parties")
    return parties


def tensor_product(factors: Sequence) -> np.ndarray:
    """Kronecker product of vectors, in party order."""
    if len(factors) == 0:
        raise ValueError("tensor_product needs at least one factor")
    return reduce(np.kron, [as_cvec(f) for f in factors])


def partial_transpose(rho, dims: Sequence[int], transposed_parties: Iterable[int]) -> np.ndarray:
    """Transpose the tensor indices of the listed parties."""
    rho = np.asarray(rho, dtype=complex)
    dims = _check_dims(rho, dims)
    m = len(dims)
    parties = _check_parties(transposed_parties, m)
    t = rho.reshape(dims + dims)
    perm = list(range(2 * m))
    for p in parties:
        perm[p], perm[m + p] = m + p, p
    return t.transpose(perm).reshape(rho.shape)


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Reduced operator on the kept parties (kept in ascending party order)."""
    rho = np.asarray(rho, dtype=complex)
    dims = _check_dims(rho, dims)
    m = len(dims)
    keep = _check_parties(keep, m)
    traced = [p for p in range(m) if p not in keep]
    t = rho.reshape(dims + dims)
    # move kept row indices, then kept column indices, to the front
    order = keep + [m + p for p in keep] + traced + [m + p for p in traced]
    t = t.transpose(order)
    dk = total_dim([dims[p] for p in keep])
    dt = total_dim([dims[p] for p in traced])
    t = t.reshape(dk, dk, dt, dt)
    return np.einsum("abjj->ab", t)


def rank_with_tol(vectors: Sequence, tol: float = TOL_RANK) -> int:
    """Numerical rank of a set of vectors, relative to the largest singular value.

    The empty set has rank 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if len(vectors) == 0:
        return 0
    mat = np.array([as_cvec(v) for v in vectors])
    s = np.linalg.svd(mat, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def fix_phase(v: np.ndarray, tol: float = TOL_ORTH) -> np.ndarray:
    """Rotate the global phase so the first non-negligible entry is real positive."""
    v = np.asarray(v, dtype=complex)
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size == 0:
        return v
    z = v[idx[0]]
    return v * (abs(z) / z)


def orthonormal_complement(vectors: Sequence, ambient_dim: int, tol: float = TOL_RANK) -> list[np.ndarray]:
    """Orthonormal basis of the orthogonal complement of span(vectors).

    The basis is built by pivoted QR of the complement projector, so the
    empty input yields the computational basis in order. Each vector is
    phase-normalized with :func:`fix_phase`.
    """
    vecs = [as_cvec(v) for v in vectors]
    for v in vecs:
        if v.size != ambient_dim:
            raise ValueError(f"vector of dimension {v.size} does not live in dimension {ambient_dim}")
    r = rank_with_tol(vecs, tol) if vecs else 0
    k = ambient_dim - r
    if k == 0:
        return []
    proj = np.eye(ambient_dim, dtype=complex)
    if r:
        _, _, vh = np.linalg.svd(np.array(vecs))
        span = vh[:r].T
        proj = proj - span @ span.conj().T
    q, _, _ = scipy.linalg.qr(proj, pivoting=True)
    return [fix_phase(q[:, i]) for i in range(k)]


def is_hermitian(H, tol: float = TOL_HERM) -> bool:
    H = np.asarray(H)
    return H.ndim == 2 and H.shape[0] == H.shape[1] and bool(np.max(np.abs(H - H.conj().T), initial=0.0) <= tol)


def eigh(H, tol: float = TOL_HERM) -> tuple[np.ndarray, list[np.ndarray]]:
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.

    ``tol`` is the elementwise Hermiticity tolerance, scaled by max(1, ‖H‖_max).
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"eigh needs a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H), initial=0.0)))
    if not is_hermitian(H, tol * scale):
        raise ValueError("eigh input is not Hermitian")
    w, x = np.linalg.eigh((H + H.conj().T) / 2)
    return w, [x[:, i] for i in range(x.shape[1])]


def von_neumann_entropy(rho, cutoff: float = ENTROPY_CUTOFF) -> float:
    """Entropy in bits of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    tr = np.trace(rho).real
    if abs(tr - 1) > 1e-9:
        raise ValueError(f"density matrix trace {tr} differs from 1")
    w, _ = eigh(rho, tol=1e-9)
    if w[0] < -TOL_PSD:
        raise ValueError(f"density matrix has negative eigenvalue {w[0]}")
    w = w[w > cutoff]
    return float(-np.sum(w * np.log2(w)))


def projector(v) -> np.ndarray:
    v = as_cvec(v)
    return np.outer(v, v.conj())


def embed_operator(op, dims: Sequence[int], party: int) -> np.ndarray:
    """Lift a single-party operator to the full space (identity elsewhere)."""
    dims = tuple(dims)
    _check_parties([party], len(dims))
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[party], dims[party]):
        raise ValueError(f"operator shape {op.shape} does not match party {party} dimension {dims[party]}")
    left = np.eye(total_dim(dims[:party]))
    right = np.eye(total_dim(dims[party + 1:]))
    return np.kron(np.kron(left, op), right)


def permute_parties(vec, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a vector: output party k is input party order[k]."""
    vec = as_cvec(vec)
    return vec.reshape(tuple(dims)).transpose(tuple(order)).reshape(-1)
