"""Product states, product bases and the named families built from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    TOL_ORTH,
    TOL_PSD,
    as_cvec,
    fix_phase,
    orthonormal_complement,
    permute_parties,
    projector,
    tensor_product,
    total_dim,
)

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class ProductState:
    """One unit vector per party."""

    locals: tuple[np.ndarray, ...]
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self):
        locs = tuple(as_cvec(v) for v in self.locals)
        dims = tuple(int(d) for d in self.dims) if self.dims else tuple(v.size for v in locs)
        if len(locs) != len(dims):
            raise ValueError(f"{len(locs)} local vectors for {len(dims)} parties")
        for i, (v, d) in enumerate(zip(locs, dims)):
            if v.size != d:
                raise ValueError(f"party {i}: vector of dimension {v.size}, expected {d}")
            if abs(np.linalg.norm(v) - 1) > UNIT_TOL:
                raise ValueError(f"party {i}: local vector is not unit (norm {np.linalg.norm(v)!r})")
        object.__setattr__(self, "locals", locs)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def normalized(cls, locals: Sequence, dims: Sequence[int] = ()) -> "ProductState":
        return cls(tuple(as_cvec(v) / np.linalg.norm(v) for v in locals), tuple(dims))

    @property
    def vector(self) -> np.ndarray:
        return tensor_product(self.locals)

    @property
    def m(self) -> int:
        return len(self.dims)


@dataclass(frozen=True)
class ProductBasis:
    """Ordered set of product states on common dimensions.

    Orthogonality is not enforced on construction so that malformed input can
    be inspected; call :meth:`assert_orthogonal` before relying on it.
    """

    states: tuple[ProductState, ...]
    dims: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        states = tuple(self.states)
        dims = tuple(int(d) for d in self.dims)
        for j, s in enumerate(states):
            if s.dims != dims:
                raise ValueError(f"state {j} has dims {s.dims}, basis has {dims}")
        if len(states) > total_dim(dims):
            raise ValueError(f"{len(states)} states exceed total dimension {total_dim(dims)}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "dims", dims)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def D(self) -> int:
        return total_dim(self.dims)

    @property
    def m(self) -> int:
        return len(self.dims)

    def matrix(self) -> np.ndarray:
        """States as rows, shape (n, D)."""
        if not self.states:
            return np.zeros((0, self.D), dtype=complex)
        return np.array([s.vector for s in self.states])

    def gram(self) -> np.ndarray:
        M = self.matrix()
        return M.conj() @ M.T

    def orthogonality_violations(self, tol: float = TOL_ORTH) -> list[tuple[int, int, float]]:
        G = np.abs(self.gram())
        n = len(self)
        return [(i, j, float(G[i, j])) for i in range(n) for j in range(i + 1, n) if G[i, j] > tol]

    def assert_orthogonal(self, tol: float = TOL_ORTH) -> "ProductBasis":
        bad = self.orthogonality_violations(tol)
        if bad:
            pairs = ", ".join(f"({i},{j}): {v:.3g}" for i, j, v in bad)
            raise ValueError(f"states are not mutually orthogonal: {pairs}")
        return self

    def without(self, index: int) -> "ProductBasis":
        states = self.states[:index] + self.states[index + 1:]
        return ProductBasis(states, self.dims, f"{self.label}-minus-{index}")

    def with_state(self, state: ProductState) -> "ProductBasis":
        return ProductBasis(self.states + (state,), self.dims, self.label)

    def permuted(self, state_order: Sequence[int] | None = None, party_order: Sequence[int] | None = None) -> "ProductBasis":
        states = [self.states[j] for j in state_order] if state_order is not None else list(self.states)
        dims = self.dims
        if party_order is not None:
            dims = tuple(self.dims[p] for p in party_order)
            states = [ProductState(tuple(s.locals[p] for p in party_order), dims) for s in states]
        return ProductBasis(tuple(states), dims, self.label)


@dataclass(frozen=True)
class Povm:
    effects: tuple[np.ndarray, ...]
    dim: int
    scale: float = 1.0

    def __post_init__(self):
        effects = tuple(np.asarray(E, dtype=complex) for E in self.effects)
        for k, E in enumerate(effects):
            if E.shape != (self.dim, self.dim):
                raise ValueError(f"effect {k} has shape {E.shape}, expected ({self.dim}, {self.dim})")
        object.__setattr__(self, "effects", effects)

    def __len__(self) -> int:
        return len(self.effects)

    def completeness_error(self) -> float:
        return float(np.max(np.abs(sum(self.effects) - np.eye(self.dim))))

    def min_eigenvalue(self) -> float:
        return float(min(np.linalg.eigvalsh(E).min() for E in self.effects))

    def is_valid(self, tol: float = TOL_ORTH) -> bool:
        return self.min_eigenvalue() >= -TOL_PSD and self.completeness_error() <= tol


def ket(d: int, *amps) -> np.ndarray:
    """Normalized vector from (possibly unnormalized) amplitudes."""
    v = np.array(amps, dtype=complex)
    if v.size != d:
        raise ValueError(f"{v.size} amplitudes for dimension {d}")
    return v / np.linalg.norm(v)


PLUS = ket(2, 1, 1)
MINUS = ket(2, 1, -1)


# -- Pyramid ----------------------------------------------------------------

PYRAMID_H = 0.5 * np.sqrt(1 + np.sqrt(5))
PYRAMID_N = 2 / np.sqrt(5 + np.sqrt(5))


def pyramid_vectors() -> list[np.ndarray]:
    """Apex vectors of the regular pentagonal pyramid; non-adjacent ones are orthogonal."""
    return [
        PYRAMID_N * np.array([np.cos(2 * np.pi * j / 5), np.sin(2 * np.pi * j / 5), PYRAMID_H], dtype=complex)
        for j in range(5)
    ]


def make_pyramid() -> ProductBasis:
    v = pyramid_vectors()
    states = tuple(ProductState((v[j], v[(2 * j) % 5]), (3, 3)) for j in range(5))
    return ProductBasis(states, (3, 3), "pyramid")


def make_tiles() -> ProductBasis:
    e0, e1, e2 = np.eye(3, dtype=complex)
    r2 = np.sqrt(2)
    third = np.ones(3, dtype=complex) / np.sqrt(3)
    locals_ = [
        (e0, (e0 - e1) / r2),
        ((e0 - e1) / r2, e2),
        (e2, (e1 - e2) / r2),
        ((e1 - e2) / r2, e0),
        (third, third),
    ]
    return ProductBasis(tuple(ProductState(l, (3, 3)) for l in locals_), (3, 3), "tiles")


def make_shifts() -> ProductBasis:
    e0, e1 = np.eye(2, dtype=complex)
    locals_ = [
        (e0, e1, PLUS),
        (e1, PLUS, e0),
        (PLUS, e0, e1),
        (MINUS, MINUS, MINUS),
    ]
    return ProductBasis(tuple(ProductState(l, (2, 2, 2)) for l in locals_), (2, 2, 2), "shifts")


# -- 3x4 set measurable by a POVM ---------------------------------------------

W_N = np.sqrt(2 / np.sqrt(5))
U_N = 1 / np.sqrt(2)
BOB_POVM_SCALE = 4 / 5


def w_vectors() -> list[np.ndarray]:
    c1 = np.sqrt(np.cos(np.pi / 5))
    c2 = np.sqrt(np.cos(2 * np.pi / 5))
    out = []
    for j in range(5):
        a, b = 2 * j * np.pi / 5, 4 * j * np.pi / 5
        out.append(W_N * np.array([c1 * np.cos(a), c1 * np.sin(a), c2 * np.cos(b), c2 * np.sin(b)], dtype=complex))
    return out


def u_vectors() -> list[np.ndarray]:
    out = []
    for j in range(5):
        a, b = 2 * j * np.pi / 5, 4 * j * np.pi / 5
        out.append(U_N * np.array([-np.sin(a), np.cos(a), -np.sin(b), np.cos(b)], dtype=complex))
    return out


def make_pyramid_3x4() -> ProductBasis:
    v, w = pyramid_vectors(), w_vectors()
    states = tuple(ProductState((v[j], w[j]), (3, 4)) for j in range(5))
    return ProductBasis(states, (3, 4), "pyramid34")


def make_bob_povm() -> Povm:
    # five rank-one effects on a 4-dim space: each |u><u| must be scaled by 4/5
    effects = tuple(BOB_POVM_SCALE * projector(u) for u in u_vectors())
    return Povm(effects, 4, BOB_POVM_SCALE)


def x_vectors_unnormalized() -> list[np.ndarray]:
    tail = np.zeros(5, dtype=complex)
    tail[4] = 0.5
    return [np.concatenate([u, [0]]) + tail for u in u_vectors()]


def make_x_basis() -> list[np.ndarray]:
    """Orthonormal basis of C^5 realizing Bob's POVM as a projective measurement."""
    return [x / np.linalg.norm(x) for x in x_vectors_unnormalized()]


def embed(v, dim: int) -> np.ndarray:
    """Zero-pad a vector into a larger local space."""
    v = as_cvec(v)
    out = np.zeros(dim, dtype=complex)
    out[: v.size] = v
    return out


def _unique_complement(vectors: Sequence, dim: int, what: str) -> np.ndarray:
    comp = orthonormal_complement(vectors, dim)
    if len(comp) != 1:
        raise RuntimeError(f"complement of {what} has dimension {len(comp)}, expected 1")
    return comp[0]


def _orthogonal_in_span(target, span: Sequence, what: str) -> np.ndarray:
    """Unit vector in span(span) orthogonal to target, unique up to phase."""
    span = [as_cvec(s) for s in span]
    Q, _ = np.linalg.qr(np.array(span).T)
    # coordinates in the span basis, then the complement of the target's projection
    coeffs = _unique_complement([Q.conj().T @ as_cvec(target)], Q.shape[1], what)
    return fix_phase(Q @ coeffs)


def make_completion_3x5() -> list[ProductState]:
    """Ten product states completing the embedded 3x4 set to a basis of 3x5."""
    v, w, x = pyramid_vectors(), w_vectors(), make_x_basis()
    dims = (3, 5)
    first, second = [], []
    for i in range(5):
        a, b = (i + 1) % 5, (i + 4) % 5
        vperp = _unique_complement([v[a], v[b]], 3, f"(v_{a}, v_{b})")
        first.append(ProductState((vperp, x[i]), dims))
    for j in range(5):
        span = [x[(j + 4) % 5], x[(j + 1) % 5]]
        wperp = _orthogonal_in_span(embed(w[j], 5), span, f"w_{j} within span(x)")
        second.append(ProductState((v[j], wperp), dims))
    # interleave to follow the printed row order
    out = []
    for i in range(5):
        out += [first[i], second[i]]
    return out


def embedded_pyramid_3x5() -> list[ProductState]:
    v, w = pyramid_vectors(), w_vectors()
    return [ProductState((v[j], embed(w[j], 5)), (3, 5)) for j in range(5)]


# -- two-way separability of the Shifts complement ----------------------------

def cut_split(basis: ProductBasis, cut_party: int) -> tuple[list[np.ndarray], list[np.ndarray], tuple[int, ...]]:
    """Split each state into (cut party local, joint vector on the rest).

    Returns the cut-side vectors, the rest vectors and the party order
    (cut party first, remaining parties ascending).
    """
    if not 0 <= cut_party < basis.m:
        raise ValueError(f"cut party {cut_party} out of range for {basis.m} parties")
    rest = [p for p in range(basis.m) if p != cut_party]
    side = [s.locals[cut_party] for s in basis.states]
    others = [tensor_product([s.locals[p] for p in rest]) for s in basis.states]
    return side, others, (cut_party, *rest)


def cut_decomposition(basis: ProductBasis, cut_party: int, tol: float = TOL_ORTH) -> list[ProductState]:
    """Product states across ``cut_party | rest`` spanning the complement of ``basis``.

    The rest-parts must split into two orthogonal pairs; inside each pair every
    state gets the vector of the pair's span orthogonal to its own rest-part.
    Returned states have dims (d_cut, D_rest) with the rest in ascending party
    order.
    """
    side, others, order = cut_split(basis, cut_party)
    n = len(others)
    if n != 4:
        raise ValueError(f"cut decomposition needs four states, got {n}")
    G = np.abs(np.array(others).conj() @ np.array(others).T)
    pairing = None
    for partner in (1, 2, 3):
        a = (0, partner)
        b = tuple(k for k in range(4) if k not in a)
        if all(G[i, j] <= tol for i in a for j in b):
            pairing = (a, b)
            break
    if pairing is None:
        raise ValueError(f"rest-parts across cut {cut_party} do not split into orthogonal pairs")
    d_rest = others[0].size
    dims = (basis.dims[cut_party], d_rest)
    members = [None] * 4
    for pair in pairing:
        for k in pair:
            partner = pair[1] if k == pair[0] else pair[0]
            perp = _orthogonal_in_span(others[k], [others[k], others[partner]], f"rest-part {k}")
            members[k] = ProductState((side[k], perp), dims)
    return members


def shifts_cut_decomposition(cut_party: int) -> list[ProductState]:
    return cut_decomposition(make_shifts(), cut_party)


def cut_state_vector(state: ProductState, full_dims: Sequence[int], cut_party: int) -> np.ndarray:
    """Full-space vector of a state given across ``cut_party | rest``."""
    full_dims = tuple(full_dims)
    rest = [p for p in range(len(full_dims)) if p != cut_party]
    order = (cut_party, *rest)
    v = state.vector
    # v is laid out in `order`; invert the permutation to natural order
    inverse = tuple(int(i) for i in np.argsort(order))
    return permute_parties(v, [full_dims[p] for p in order], inverse)


CONSTRUCTIONS = {
    "pyramid": make_pyramid,
    "tiles": make_tiles,
    "shifts": make_shifts,
    "pyramid34": make_pyramid_3x4,
}
