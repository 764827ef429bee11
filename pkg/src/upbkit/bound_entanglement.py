"""The uniform state on the complement of a product basis and its entanglement.

Covers positivity of the partial transpose across every bipartite cut,
certification that the range holds no product state, explicit separable
decompositions across a cut, and upper bounds on the entanglement of
formation from optimized pure-state decompositions.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constructions import ProductBasis, ProductState
from .extendibility import OracleResult, overlap_min
from .linalg import (
    TOL_HERM,
    TOL_PSD,
    TOL_RANK,
    eigh,
    is_hermitian,
    partial_transpose,
    permute_parties,
    projector,
    total_dim,
)

log = logging.getLogger(__name__)

EOF_MAX_ITER = 5000
EOF_TOL = 1e-10
_ARMIJO = 1e-4


@dataclass(frozen=True)
class DensityMatrix:
    mat: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        D = total_dim(dims)
        if mat.shape != (D, D):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
        if not is_hermitian(mat, TOL_HERM):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1) > 1e-9:
            raise ValueError(f"density matrix trace {np.trace(mat).real} differs from 1")
        if np.linalg.eigvalsh(mat).min() < -TOL_PSD:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)

    @property
    def D(self) -> int:
        return self.mat.shape[0]

    def rank(self, tol: float = TOL_RANK) -> int:
        w = np.linalg.eigvalsh(self.mat)
        return int(np.sum(w > tol * w.max()))


@dataclass(frozen=True)
class BipartiteCut:
    side_a: frozenset[int]
    m: int

    def __post_init__(self):
        side = frozenset(int(p) for p in self.side_a)
        if not side or len(side) >= self.m or any(not 0 <= p < self.m for p in side):
            raise ValueError(f"{sorted(side)} is not a nonempty proper subset of {self.m} parties")
        object.__setattr__(self, "side_a", side)

    @property
    def side_b(self) -> frozenset[int]:
        return frozenset(range(self.m)) - self.side_a

    @property
    def order(self) -> tuple[int, ...]:
        """Party order placing side A first."""
        return tuple(sorted(self.side_a)) + tuple(sorted(self.side_b))

    def label(self) -> str:
        names = "ABCDEFGHIJKLMNOP"
        return "".join(names[p] for p in sorted(self.side_a)) + "|" + "".join(names[p] for p in sorted(self.side_b))


def all_cuts(m: int) -> list[BipartiteCut]:
    """The 2^(m-1) - 1 distinct bipartitions, each listed once (smaller side as A)."""
    cuts = []
    for size in range(1, m):
        for side in itertools.combinations(range(m), size):
            rest = tuple(p for p in range(m) if p not in side)
            if (len(side), side) < (len(rest), rest):
                cuts.append(BipartiteCut(frozenset(side), m))
    return cuts


def _as_cut(cut, m: int) -> BipartiteCut:
    if isinstance(cut, BipartiteCut):
        return cut
    if isinstance(cut, int):
        return BipartiteCut(frozenset([cut]), m)
    return BipartiteCut(frozenset(cut), m)


def complementary_state(basis: ProductBasis) -> DensityMatrix:
    """Normalized projector onto the orthogonal complement of the basis span."""
    n, D = len(basis), basis.D
    if n >= D:
        raise ValueError("basis spans the whole space; the complement is empty")
    M = basis.matrix()
    P = np.eye(D, dtype=complex) - M.T @ M.conj()
    return DensityMatrix((P + P.conj().T) / (2 * (D - n)), basis.dims)


def ppt_min_eigenvalue(rho: DensityMatrix, cut) -> float:
    cut = _as_cut(cut, len(rho.dims))
    pt = partial_transpose(rho.mat, rho.dims, cut.side_a)
    return float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])


@dataclass
class CutCheck:
    cut: BipartiteCut
    min_eigenvalue: float
    passed: bool


def all_cuts_ppt(rho: DensityMatrix, tol: float = TOL_PSD) -> list[CutCheck]:
    out = []
    for cut in all_cuts(len(rho.dims)):
        lam = ppt_min_eigenvalue(rho, cut)
        out.append(CutCheck(cut, lam, lam >= -tol))
    return out


def range_has_product_state(rho: DensityMatrix, restarts: int = 1000, seed: int = 0) -> OracleResult:
    """Least weight a product state can place outside the range of ``rho``.

    ``min_value`` is 1 - max <phi|P_range|phi> over product phi, obtained by
    minimizing the overlap with an orthonormal basis of the kernel. A value
    above the no-product threshold certifies entanglement.
    """
    w, x = eigh(rho.mat, tol=1e-9)
    kernel = [v for lam, v in zip(w, x) if lam <= TOL_RANK * w[-1]]
    vectors = np.array(kernel) if kernel else np.zeros((0, rho.D), dtype=complex)
    return overlap_min(vectors, rho.dims, restarts, seed)


def cut_vector(state: ProductState, dims: Sequence[int], cut) -> np.ndarray:
    """Full-space vector of a member given either on ``dims`` or across the cut.

    A member across the cut has two factors: side A (its parties ascending)
    and side B likewise.
    """
    dims = tuple(dims)
    if state.dims == dims:
        return state.vector
    cut = _as_cut(cut, len(dims))
    order = cut.order
    expect = (total_dim([dims[p] for p in sorted(cut.side_a)]), total_dim([dims[p] for p in sorted(cut.side_b)]))
    if state.dims != expect:
        raise ValueError(f"member dims {state.dims} match neither {dims} nor cut layout {expect}")
    inverse = tuple(int(i) for i in np.argsort(order))
    return permute_parties(state.vector, [dims[p] for p in order], inverse)


def decomposition_error(rho: DensityMatrix, members: Sequence[ProductState], weights: Sequence[float], cut) -> float:
    """Frobenius distance between rho and the weighted mixture of members."""
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(members):
        raise ValueError("one weight per member required")
    if abs(weights.sum() - 1) > 1e-10:
        raise ValueError(f"weights sum to {weights.sum()}, not 1")
    mix = np.zeros_like(rho.mat)
    for w, s in zip(weights, members):
        mix += w * projector(cut_vector(s, rho.dims, cut))
    return float(np.linalg.norm(mix - rho.mat))


def verify_product_decomposition(
    rho: DensityMatrix, members: Sequence[ProductState], weights: Sequence[float], cut, tol: float = 1e-10
) -> bool:
    return decomposition_error(rho, members, weights, cut) <= tol


# -- entanglement of formation -----------------------------------------------

@dataclass
class EofEstimate:
    value: float
    decomposition_size: int
    weights: np.ndarray
    members: list[np.ndarray]
    seed: int
    dims: tuple[int, int] = (0, 0)
    best_by_size: dict[int, float] = field(default_factory=dict)

    def reconstruct(self) -> np.ndarray:
        return sum(p * projector(v) for p, v in zip(self.weights, self.members))

    def recompute_value(self) -> float:
        dA, dB = self.dims
        total = 0.0
        for p, v in zip(self.weights, self.members):
            M = v.reshape(dA, dB)
            lam = np.linalg.eigvalsh(M @ M.conj().T)
            lam = lam[lam > 1e-14]
            total += p * float(-np.sum(lam * np.log2(lam)))
        return total


class _EntropyObjective:
    """Average reduced entropy (bits) of the ensemble generated by V, with Euclidean gradient.

    Row k of W = V @ B is the unnormalized member vector; for a member M
    (dA x dB) with sigma = M M^H and p = tr sigma, the nats contribution is
    -tr sigma ln sigma + p ln p, whose derivative in sigma is ln p - ln sigma.
    """

    def __init__(self, B: np.ndarray, dA: int, dB: int):
        self.B = B
        self.Bh = B.conj().T
        self.dA, self.dB = dA, dB

    def __call__(self, V: np.ndarray) -> tuple[float, np.ndarray]:
        K = V.shape[0]
        M = (V @ self.B).reshape(K, self.dA, self.dB)
        S = M @ M.conj().transpose(0, 2, 1)
        ev, U = np.linalg.eigh(S)
        ev = np.clip(ev, 1e-300, None)
        p = ev.sum(axis=1)
        f = -np.sum(ev * np.log(ev)) + np.sum(p * np.log(p))
        G = (U * (np.log(p)[:, None] - np.log(ev))[:, None, :]) @ U.conj().transpose(0, 2, 1)
        grad = (G @ M).reshape(K, -1) @ self.Bh
        return f / np.log(2), grad / np.log(2)


def _stiefel_descent(obj: _EntropyObjective, V: np.ndarray, max_iter: int = EOF_MAX_ITER, tol: float = EOF_TOL):
    """Riemannian gradient descent on matrices with orthonormal columns.

    QR retraction, Armijo backtracking, step doubled after each accepted move.
    Stops once an accepted step lowers the objective by at most ``tol``.
    """
    f, g = obj(V)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        A = V.conj().T @ g
        rg = g - V @ ((A + A.conj().T) / 2)
        n2 = float(np.vdot(rg, rg).real)
        if n2 < 1e-24:
            break
        while True:
            Vn, _ = np.linalg.qr(V - step * rg)
            fn, gn = obj(Vn)
            if fn <= f - _ARMIJO * step * n2 or step < 1e-14:
                break
            step *= 0.5
        decrease = f - fn
        if decrease < 0:
            break
        V, f, g = Vn, fn, gn
        step *= 2
        if decrease <= tol:
            break
    return f, V, it


def _reorder_to_cut(rho: DensityMatrix, cut: BipartiteCut) -> tuple[np.ndarray, int, int]:
    dims = rho.dims
    order = cut.order
    m = len(dims)
    t = rho.mat.reshape(dims + dims).transpose(order + tuple(m + p for p in order))
    dA = total_dim([dims[p] for p in sorted(cut.side_a)])
    dB = total_dim([dims[p] for p in sorted(cut.side_b)])
    return t.reshape(dA * dB, dA * dB), dA, dB


def eof_upper_bound(
    rho: DensityMatrix, cut=0, k_max: int = 16, restarts: int = 200, seed: int = 0
) -> EofEstimate:
    """Upper bound on the entanglement of formation across ``cut``, in ebits.

    Decompositions of size K are parameterized by K x r matrices V with
    orthonormal columns acting on the square-root spectral ensemble of rho.
    For every K from the rank r up to ``k_max``, ``restarts`` random starts
    (generator keyed by (seed, K, restart)) are descended and the overall
    best ensemble is returned.
    """
    cut = _as_cut(cut, len(rho.dims))
    mat, dA, dB = _reorder_to_cut(rho, cut)
    w, x = np.linalg.eigh((mat + mat.conj().T) / 2)
    keep = w > TOL_RANK * w[-1]
    lam, E = w[keep], x[:, keep]
    r = lam.size
    if k_max < r:
        raise ValueError(f"k_max={k_max} is below the rank {r} of the state")
    B = (np.sqrt(lam)[:, None] * E.T).astype(complex)
    obj = _EntropyObjective(B, dA, dB)

    best_f, best_V, best_K = np.inf, None, r
    by_size = {}
    for K in range(r, k_max + 1):
        best_here = np.inf
        for k in range(restarts):
            rng = np.random.default_rng([seed, K, k])
            A = rng.standard_normal((K, r)) + 1j * rng.standard_normal((K, r))
            V0, _ = np.linalg.qr(A)
            f, V, _ = _stiefel_descent(obj, V0)
            best_here = min(best_here, f)
            if f < best_f:
                best_f, best_V, best_K = f, V, K
        by_size[K] = float(best_here)
        log.debug("eof K=%d best %.8f", K, best_here)

    W = best_V @ B
    p = np.sum(np.abs(W) ** 2, axis=1)
    nz = p > 1e-300
    members = [W[k] / np.sqrt(p[k]) for k in np.flatnonzero(nz)]
    weights = p[nz] / p[nz].sum()
    est = EofEstimate(0.0, best_K, weights, members, seed, (dA, dB), by_size)
    est.value = est.recompute_value()
    return est


def eof_reconstruction_error(rho: DensityMatrix, est: EofEstimate, cut=0) -> float:
    cut = _as_cut(cut, len(rho.dims))
    mat, _, _ = _reorder_to_cut(rho, cut)
    return float(np.linalg.norm(est.reconstruct() - mat))
