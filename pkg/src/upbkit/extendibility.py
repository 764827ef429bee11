"""Deciding whether a product basis can be extended by a further product state.

Two independent routes are provided: an exact combinatorial test over
partitions of the basis among the parties, and a numerical search for the
product state of least total overlap with the basis.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constructions import ProductBasis, ProductState
from .linalg import TOL_ORTH, TOL_RANK, fix_phase, orthonormal_complement, rank_with_tol

log = logging.getLogger(__name__)

ENUMERATION_BUDGET = 10**8
NO_PRODUCT_THRESHOLD = 1e-6
PRODUCT_THRESHOLD = 1e-10
MAX_SWEEPS = 500
SWEEP_TOL = 1e-14
_KEEP_FAILURES = 4096


@dataclass
class ExtendibilityVerdict:
    extendible: bool
    witness_partition: tuple[int, ...] | None = None
    witness_state: ProductState | None = None
    # for each failing partition: per-party local ranks of its cells
    ranks_by_partition: list[tuple[tuple[int, ...], tuple[int, ...]]] = field(default_factory=list)
    partitions_checked: int = 0


@dataclass
class OracleResult:
    min_value: float
    argmin: ProductState
    restarts_used: int
    seed: int
    sweeps: int = 0

    @property
    def verdict(self) -> str:
        return classify_overlap(self.min_value)


def classify_overlap(value: float) -> str:
    if value > NO_PRODUCT_THRESHOLD:
        return "no-product-state"
    if value < PRODUCT_THRESHOLD:
        return "product-state-exists"
    return "inconclusive"


def min_upb_size(dims: Sequence[int]) -> int:
    """Smallest number of states a UPB on these local dimensions can have."""
    return sum(int(d) - 1 for d in dims) + 1


def _cell_ranks(basis: ProductBasis, tol: float):
    cache: dict[tuple[int, int], int] = {}

    def rank(party: int, members: tuple[int, ...]) -> int:
        key = (party, sum(1 << j for j in members))
        if key not in cache:
            cache[key] = rank_with_tol([basis.states[j].locals[party] for j in members], tol)
        return cache[key]

    return rank


def _cells(assign: Sequence[int], m: int) -> list[tuple[int, ...]]:
    cells: list[list[int]] = [[] for _ in range(m)]
    for j, p in enumerate(assign):
        cells[p].append(j)
    return [tuple(c) for c in cells]


def check_extendible(basis: ProductBasis, tol: float = TOL_RANK, budget: int = ENUMERATION_BUDGET) -> ExtendibilityVerdict:
    """Search all assignments of states to parties for one leaving every cell locally deficient.

    Assignments are enumerated in mixed-radix order with the last state as the
    fastest digit; the first deficient assignment is returned as witness.
    """
    m, n = basis.m, len(basis)
    total = m**n
    if total > budget:
        raise ValueError(
            f"{total} partitions exceed the enumeration budget {budget}; use product_overlap_min instead"
        )
    rank = _cell_ranks(basis, tol)
    failures = []
    checked = 0
    for assign in itertools.product(range(m), repeat=n):
        checked += 1
        cells = _cells(assign, m)
        ranks = tuple(rank(p, cells[p]) for p in range(m))
        if all(r < d for r, d in zip(ranks, basis.dims)):
            witness = find_extension(basis, assign, tol)
            return ExtendibilityVerdict(True, tuple(assign), witness, failures, checked)
        if len(failures) < _KEEP_FAILURES:
            failures.append((tuple(assign), ranks))
    return ExtendibilityVerdict(False, None, None, failures, checked)


def find_extension(basis: ProductBasis, partition: Sequence[int], tol: float = TOL_RANK) -> ProductState:
    """Product state orthogonal to the basis, party ``i`` covering the states assigned to it.

    Each party takes the first vector of the orthonormal complement of its
    cell; an empty cell therefore contributes ``|0>``.
    """
    if len(partition) != len(basis):
        raise ValueError(f"partition has {len(partition)} entries for {len(basis)} states")
    cells = _cells(partition, basis.m)
    locals_ = []
    for p, d in enumerate(basis.dims):
        comp = orthonormal_complement([basis.states[j].locals[p] for j in cells[p]], d, tol)
        if not comp:
            raise ValueError(f"cell {cells[p]} has full local rank {d} for party {p}")
        locals_.append(comp[0])
    return ProductState(tuple(locals_), basis.dims)


def _draw_starts(dims: Sequence[int], restarts: int, seed: int) -> list[np.ndarray]:
    """Haar-random unit local vectors, restart k drawn from its own generator seeded seed + k."""
    starts = [np.empty((restarts, d), dtype=complex) for d in dims]
    for k in range(restarts):
        rng = np.random.default_rng(seed + k)
        for p, d in enumerate(dims):
            z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            starts[p][k] = z / np.linalg.norm(z)
    return starts


def _contract_except(T: np.ndarray, phis: list[np.ndarray], party: int) -> np.ndarray:
    """Contract conj-targets (n, d_1..d_m) with all local vectors but one -> (R, n, d_party)."""
    m = len(phis)
    letters = "abcdefghijklmnopq"[:m]
    operands = [T]
    subs = ["z" + letters]
    for p in range(m):
        if p != party:
            operands.append(phis[p])
            subs.append("r" + letters[p])
    spec = ",".join(subs) + "->rz" + letters[party]
    return np.einsum(spec, *operands, optimize=True)


def overlap_min(
    vectors: np.ndarray,
    dims: Sequence[int],
    restarts: int = 1000,
    seed: int = 0,
    max_sweeps: int = MAX_SWEEPS,
) -> OracleResult:
    """Minimize sum_j |<t_j|phi_1 x ... x phi_m>|^2 over unit local vectors.

    ``vectors`` holds the targets as rows (shape (n, D)); they need not be
    product states. With all parties but one fixed the objective is a
    Hermitian quadratic form in the free local vector, which is set to its
    lowest eigenvector. All restarts run as one batch; a restart stops being
    updated once a sweep lowers it by at most ``SWEEP_TOL``.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    dims = tuple(int(d) for d in dims)
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    n = vectors.shape[0]
    phis = _draw_starts(dims, restarts, seed)
    if n == 0 or vectors.size == 0:
        best = ProductState(tuple(fix_phase(p[0]) for p in phis), dims)
        return OracleResult(0.0, best, restarts, seed, 0)
    T = vectors.conj().reshape((n, *dims))

    def objective(phis):
        full = phis[0]
        for p in phis[1:]:
            full = np.einsum("ri,rj->rij", full, p).reshape(full.shape[0], -1)
        return np.sum(np.abs(full @ vectors.conj().T) ** 2, axis=1)

    f = objective(phis)
    active = np.ones(restarts, dtype=bool)
    sweeps = 0
    while sweeps < max_sweeps and active.any():
        sweeps += 1
        idx = np.flatnonzero(active)
        sub = [p[idx] for p in phis]
        for party in range(len(dims)):
            C = _contract_except(T, sub, party)
            Q = np.einsum("rnj,rnk->rjk", C.conj(), C)
            _, x = np.linalg.eigh(Q)
            sub[party] = x[:, :, 0]
        fnew = objective(sub)
        for p in range(len(dims)):
            phis[p][idx] = sub[p]
        done = f[idx] - fnew <= SWEEP_TOL
        f[idx] = fnew
        active[idx[done]] = False
    k = int(np.argmin(f))
    best = ProductState(tuple(fix_phase(p[k]) for p in phis), dims)
    value = float(np.sum(np.abs(vectors.conj() @ best.vector) ** 2))
    log.debug("overlap_min: %d restarts, %d sweeps, min %.3e", restarts, sweeps, value)
    return OracleResult(value, best, restarts, seed, sweeps)


def product_overlap_min(basis: ProductBasis, restarts: int = 1000, seed: int = 0) -> OracleResult:
    """Least total overlap of any product state with the basis (0 iff extendible)."""
    return overlap_min(basis.matrix(), basis.dims, restarts, seed)


def greedy_maximal_extension(basis: ProductBasis, max_rounds: int = 100, tol: float = TOL_RANK) -> ProductBasis:
    """Append rank-partition extensions one at a time until none exists."""
    current = basis
    for _ in range(max_rounds):
        if len(current) >= current.D:
            break
        verdict = check_extendible(current, tol)
        if not verdict.extendible:
            break
        current = current.with_state(verdict.witness_state)
    return ProductBasis(current.states, current.dims, f"{basis.label}-extended" if basis.label else "")


def is_orthogonal_extension(basis: ProductBasis, state: ProductState, tol: float = TOL_ORTH) -> bool:
    overlaps = np.abs(basis.matrix().conj() @ state.vector)
    return bool(np.all(overlaps <= tol))
