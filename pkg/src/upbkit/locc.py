"""Local measurement protocols for telling product states apart.

Protocols are simulated exactly: every outcome path with nonzero Born
probability is followed, so reports carry exact success probabilities rather
than sampled frequencies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constructions import (
    ProductBasis,
    ProductState,
    Povm,
    make_bob_povm,
    make_pyramid_3x4,
    make_x_basis,
    pyramid_vectors,
)
from .linalg import (
    TOL_ORTH,
    TOL_PSD,
    TOL_RANK,
    as_cvec,
    embed_operator,
    orthonormal_complement,
    projector,
    rank_with_tol,
    total_dim,
)

ZERO_PROB = 1e-12
IDENTICAL = 1 - 1e-10


@dataclass
class Measurement:
    probabilities: np.ndarray
    post_states: list[np.ndarray | None]
    sampled: int | None = None


def _lift(effects, dims, party):
    if party is None:
        return effects
    return [embed_operator(E, dims, party) for E in effects]


def _is_projector(E: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(E @ E - E)) <= tol)


def _sqrt_psd(E: np.ndarray) -> np.ndarray:
    w, x = np.linalg.eigh((E + E.conj().T) / 2)
    return (x * np.sqrt(np.clip(w, 0, None))) @ x.conj().T


def simulate_measurement(
    state,
    effects,
    dims: Sequence[int] | None = None,
    party: int | None = None,
    seed: int | None = None,
) -> Measurement:
    """Born-rule outcome distribution and post-measurement states.

    ``effects`` is a :class:`Povm` or a list of PSD operators. With ``party``
    set they act on that party's factor only. Projector effects update by
    projection, other effects by their square root.
    """
    psi = as_cvec(state)
    if isinstance(effects, Povm):
        effects = list(effects.effects)
    effects = [np.asarray(E, dtype=complex) for E in effects]
    if party is not None and dims is None:
        raise ValueError("dims are required to act on a single party")
    full = _lift(effects, dims, party)
    probs = np.array([np.vdot(psi, E @ psi).real for E in full])
    if abs(probs.sum() - 1) > 1e-9:
        raise ValueError(f"outcome probabilities sum to {probs.sum()}, not 1")
    probs = np.clip(probs, 0, None)
    posts: list[np.ndarray | None] = []
    for E, p in zip(full, probs):
        if p <= ZERO_PROB:
            posts.append(None)
            continue
        K = E if _is_projector(E) else _sqrt_psd(E)
        v = K @ psi
        posts.append(v / np.linalg.norm(v))
    sampled = None
    if seed is not None:
        sampled = int(np.random.default_rng(seed).choice(len(probs), p=probs / probs.sum()))
    return Measurement(probs, posts, sampled)


@dataclass
class Round:
    party: int
    description: str
    outcome: int
    probability: float


@dataclass
class Transcript:
    rounds: list[Round] = field(default_factory=list)
    identified_index: int | None = None

    @property
    def probability(self) -> float:
        return float(np.prod([r.probability for r in self.rounds])) if self.rounds else 1.0


@dataclass
class DiscriminationReport:
    per_input: dict[int, list[Transcript]]
    notes: list[str] = field(default_factory=list)

    def success(self, index: int) -> float:
        return sum(t.probability for t in self.per_input[index] if t.identified_index == index)

    @property
    def success_probability(self) -> float:
        return float(np.mean([self.success(j) for j in self.per_input]))


# -- 3x4 protocol: Bob's POVM, then Alice's orthogonal pair -------------------

def run_pyramid34_protocol(input_index: int | None = None) -> DiscriminationReport:
    """Identify v_j (x) w_j; with ``input_index`` None all five inputs are run."""
    basis = make_pyramid_3x4()
    povm = make_bob_povm()
    v = pyramid_vectors()
    inputs = range(5) if input_index is None else [int(input_index)]
    per_input = {}
    for j in inputs:
        if not 0 <= j < 5:
            raise ValueError(f"input index {j} out of range 0..4")
        paths = []
        bob = simulate_measurement(basis.states[j].vector, povm, basis.dims, party=1)
        for i, (pb, post) in enumerate(zip(bob.probabilities, bob.post_states)):
            if post is None:
                continue
            cand = [(i + 1) % 5, (i + 4) % 5]
            a, b = projector(v[cand[0]]), projector(v[cand[1]])
            alice_effects = [a, b, np.eye(3) - a - b]
            alice = simulate_measurement(post, alice_effects, basis.dims, party=0)
            for k, pa in enumerate(alice.probabilities):
                if pa <= ZERO_PROB:
                    continue
                t = Transcript(
                    [
                        Round(1, "bob povm u", i, float(pb)),
                        Round(0, f"alice projective v{cand[0]}/v{cand[1]}", k, float(pa)),
                    ],
                    cand[k] if k < 2 else None,
                )
                paths.append(t)
        per_input[j] = paths
    return DiscriminationReport(per_input)


# -- 2 x n protocol ----------------------------------------------------------

@dataclass
class TwoByNClass:
    alice_ray: np.ndarray
    members: list[int]
    bob_span: list[np.ndarray]


def group_2xn(basis: ProductBasis, tol: float = TOL_ORTH) -> list[TwoByNClass]:
    """Group states by Alice's ray pair {alpha, alpha_perp}.

    Raises if Bob's spans of distinct classes are not mutually orthogonal.
    """
    if basis.m != 2 or basis.dims[0] != 2:
        raise ValueError(f"expected a 2 x n basis, got dims {basis.dims}")
    classes: list[TwoByNClass] = []
    for j, s in enumerate(basis.states):
        alpha = s.locals[0]
        for c in classes:
            ov = abs(np.vdot(c.alice_ray, alpha))
            if ov > IDENTICAL or ov < tol:
                c.members.append(j)
                break
        else:
            classes.append(TwoByNClass(alpha, [j], []))
    for c in classes:
        betas = [basis.states[j].locals[1] for j in c.members]
        r = rank_with_tol(betas, TOL_RANK)
        # rows of vh span the row space, i.e. the betas themselves
        _, _, vh = np.linalg.svd(np.array(betas))
        c.bob_span = [vh[k] for k in range(r)]
    for c1, c2 in itertools.combinations(range(len(classes)), 2):
        for i in classes[c1].members:
            for j in classes[c2].members:
                ov = abs(np.vdot(basis.states[i].locals[1], basis.states[j].locals[1]))
                if ov > tol:
                    raise ValueError(
                        f"classes {c1} and {c2} overlap on Bob's side (states {i}, {j}: {ov:.3g}); "
                        "input is not an orthogonal product set"
                    )
    return classes


def distinguish_2xn(basis: ProductBasis, tol: float = TOL_ORTH) -> DiscriminationReport:
    """Three rounds: Bob picks the class, Alice picks alpha or alpha_perp, Bob finishes."""
    classes = group_2xn(basis, tol)
    dims = basis.dims
    dB = dims[1]
    bob_round1 = [sum((projector(b) for b in c.bob_span), np.zeros((dB, dB), dtype=complex)) for c in classes]
    rest = np.eye(dB) - sum(bob_round1)
    if np.max(np.abs(rest)) > tol:
        bob_round1.append(rest)
    notes = []
    round3: dict[tuple[int, int], tuple[list[int], list[np.ndarray]]] = {}
    for ci, c in enumerate(classes):
        for side in (0, 1):
            cand = []
            for j in c.members:
                ov = abs(np.vdot(c.alice_ray, basis.states[j].locals[0]))
                if (ov > IDENTICAL) == (side == 0):
                    cand.append(j)
            betas = [basis.states[j].locals[1] for j in cand]
            for a, b in itertools.combinations(range(len(cand)), 2):
                if abs(np.vdot(betas[a], betas[b])) > tol:
                    raise ValueError(f"repeated Alice ray with non-orthogonal Bob parts: states {cand[a]}, {cand[b]}")
            effects = [projector(b) for b in betas]
            leftover = np.eye(dB) - sum(effects, np.zeros((dB, dB), dtype=complex))
            if len(cand) > 1 and np.max(np.abs(leftover)) > tol:
                effects.append(leftover)
                if len(cand) < len(c.bob_span):
                    notes.append(f"class {ci} side {side}: round-3 basis fixed only up to the unused complement")
            round3[(ci, side)] = (cand, effects)

    per_input = {}
    for j, s in enumerate(basis.states):
        paths = []
        r1 = simulate_measurement(s.vector, bob_round1, dims, party=1)
        for ci, (p1, post1) in enumerate(zip(r1.probabilities, r1.post_states)):
            if post1 is None:
                continue
            if ci >= len(classes):
                paths.append(Transcript([Round(1, "bob class projector", ci, float(p1))], None))
                continue
            alpha = classes[ci].alice_ray
            alpha_perp = orthonormal_complement([alpha], 2)[0]
            r2 = simulate_measurement(post1, [projector(alpha), projector(alpha_perp)], dims, party=0)
            for side, (p2, post2) in enumerate(zip(r2.probabilities, r2.post_states)):
                if post2 is None:
                    continue
                cand, effects = round3[(ci, side)]
                head = [Round(1, "bob class projector", ci, float(p1)), Round(0, "alice alpha/alpha_perp", side, float(p2))]
                if len(cand) <= 1:
                    paths.append(Transcript(head, cand[0] if cand else None))
                    continue
                r3 = simulate_measurement(post2, effects, dims, party=1)
                for k, p3 in enumerate(r3.probabilities):
                    if p3 <= ZERO_PROB:
                        continue
                    ident = cand[k] if k < len(cand) else None
                    paths.append(Transcript(head + [Round(1, "bob repeaters", k, float(p3))], ident))
        per_input[j] = paths
    return DiscriminationReport(per_input, notes)


def demo_2x2() -> ProductBasis:
    e0, e1 = np.eye(2, dtype=complex)
    plus, minus = (e0 + e1) / np.sqrt(2), (e0 - e1) / np.sqrt(2)
    pairs = [(e0, e0), (e1, e0), (plus, e1), (minus, e1)]
    return ProductBasis(tuple(ProductState(p, (2, 2)) for p in pairs), (2, 2), "2x2-demo")


def _random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_2xn_basis(n: int, seed: int = 0) -> ProductBasis:
    """Complete orthogonal product basis of 2 x n built from random classes.

    Bob's space is split into orthogonal blocks; each block carries one
    random Alice ray alpha paired with a Bob basis of the block, and alpha_perp
    paired with an independently rotated basis of the same block.
    """
    rng = np.random.default_rng(seed)
    bob = _random_unitary(n, rng)
    cuts = sorted(rng.choice(np.arange(1, n), size=rng.integers(0, n), replace=False)) if n > 1 else []
    blocks = np.split(np.arange(n), cuts)
    states = []
    for block in blocks:
        cols = bob[:, block]
        alpha = _random_unitary(2, rng)[:, 0]
        alpha_perp = orthonormal_complement([alpha], 2)[0]
        rotated = cols @ _random_unitary(len(block), rng)
        states += [ProductState((alpha, cols[:, k]), (2, n)) for k in range(len(block))]
        states += [ProductState((alpha_perp, rotated[:, k]), (2, n)) for k in range(len(block))]
    return ProductBasis(tuple(states), (2, n), f"2x{n}-random-{seed}")


# -- completions and POVMs ---------------------------------------------------

def verify_completion_orthobasis(states: Sequence[ProductState], dims: Sequence[int], tol: float = TOL_ORTH) -> bool:
    dims = tuple(dims)
    if len(states) != total_dim(dims) or any(s.dims != dims for s in states):
        return False
    M = np.array([s.vector for s in states])
    return bool(np.max(np.abs(M.conj() @ M.T - np.eye(len(states)))) <= tol)


def neumark_restriction_error(povm: Povm, extension: Sequence) -> float:
    """Distance between the effects and the extended projectors cut back to the POVM space."""
    if len(extension) != len(povm):
        raise ValueError("one extension vector per effect required")
    d = povm.dim
    errs = []
    for E, x in zip(povm.effects, extension):
        P = projector(x)[:d, :d]
        errs.append(np.max(np.abs(P - E)))
    return float(max(errs))


def verify_povm(povm: Povm, extension: Sequence | None = None, tol: float = TOL_ORTH) -> bool:
    """PSD effects summing to the identity; optionally check a projective extension."""
    if povm.min_eigenvalue() < -TOL_PSD or povm.completeness_error() > tol:
        return False
    if extension is not None:
        X = np.array([as_cvec(x) for x in extension])
        if np.max(np.abs(X.conj() @ X.T - np.eye(len(X)))) > tol:
            return False
        return neumark_restriction_error(povm, extension) <= tol
    return True


def verify_bob_povm(tol: float = TOL_ORTH) -> bool:
    return verify_povm(make_bob_povm(), make_x_basis(), tol)


# -- first-round obstruction scan --------------------------------------------

@dataclass
class Obstruction:
    party: int
    blocks: list[np.ndarray]
    witness: tuple[int, int, int, float] | None
    # (block, state i, state j, |overlap|) of a pair left non-orthogonal, None if the split preserves orthogonality


def _candidate_splits(vectors: Sequence[np.ndarray], d: int) -> list[list[np.ndarray]]:
    """Orthogonal decompositions of C^d built from spans of the given local vectors.

    Blocks are returned as orthonormal bases (d x k arrays).
    """
    subspaces = []
    for size in range(1, d):
        for subset in itertools.combinations(range(len(vectors)), size):
            vs = [vectors[k] for k in subset]
            r = rank_with_tol(vs)
            if r >= d:
                continue
            comp = orthonormal_complement(vs, d)
            span = orthonormal_complement(comp, d)
            subspaces.append(np.array(span).T)
            subspaces.append(np.array(comp).T)
    splits, seen = [], set()

    def key(blocks):
        return tuple(sorted(tuple(np.round(np.abs(b @ b.conj().T), 8).ravel()) for b in blocks))

    for S in subspaces:
        comp = np.array(orthonormal_complement(list(S.T), d)).T
        blocks = [S, comp]
        k = key(blocks)
        if k not in seen:
            seen.add(k)
            splits.append(blocks)
    lines = [S for S in subspaces if S.shape[1] == 1]
    for combo in itertools.combinations(range(len(lines)), d):
        L = np.hstack([lines[c] for c in combo])
        if np.max(np.abs(L.conj().T @ L - np.eye(d))) <= TOL_ORTH:
            blocks = [lines[c] for c in combo]
            k = key(blocks)
            if k not in seen:
                seen.add(k)
                splits.append(blocks)
    return splits


def first_round_obstructions(basis: ProductBasis, tol: float = TOL_ORTH) -> list[Obstruction]:
    """For every candidate local projective split, find a pair it leaves non-orthogonal.

    A split can start a perfect discrimination only if, within each block,
    the surviving projected states stay mutually orthogonal.
    """
    out = []
    vecs = basis.matrix()
    for party, d in enumerate(basis.dims):
        local = [s.locals[party] for s in basis.states]
        for blocks in _candidate_splits(local, d):
            witness = None
            for b, S in enumerate(blocks):
                P = embed_operator(S @ S.conj().T, basis.dims, party)
                proj = vecs @ P.T
                alive = [j for j in range(len(basis)) if np.linalg.norm(proj[j]) > tol]
                for i, j in itertools.combinations(alive, 2):
                    ov = abs(np.vdot(proj[i], proj[j]))
                    if ov > tol:
                        witness = (b, i, j, float(ov))
                        break
                if witness:
                    break
            out.append(Obstruction(party, blocks, witness))
    return out


def has_orthogonality_preserving_split(basis: ProductBasis) -> bool:
    return any(o.witness is None for o in first_round_obstructions(basis))
