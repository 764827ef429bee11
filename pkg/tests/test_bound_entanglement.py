import numpy as np
import pytest

from upbkit.bound_entanglement import (
    BipartiteCut,
    DensityMatrix,
    all_cuts,
    all_cuts_ppt,
    complementary_state,
    decomposition_error,
    eof_reconstruction_error,
    eof_upper_bound,
    ppt_min_eigenvalue,
    range_has_product_state,
    verify_product_decomposition,
)
from upbkit.constructions import (
    ProductBasis,
    ProductState,
    make_pyramid,
    make_shifts,
    make_tiles,
    shifts_cut_decomposition,
)
from upbkit.linalg import partial_trace, projector, von_neumann_entropy

from conftest import random_vector

# 1 - max <phi|P_range|phi> over product phi, seed 0, 1000 restarts
PINNED_RANGE_RESIDUAL = {"pyramid": 0.03791181408477759, "shifts": 0.08144134645630823}


def separable_control():
    e = np.eye(3)
    pairs = [(e[0], e[0]), (e[1], e[1]), (e[2], e[0]), (e[0], e[2])]
    return DensityMatrix(sum(projector(np.kron(a, b)) for a, b in pairs) / 4, (3, 3))


def test_complementary_state_spectrum():
    for build, D in ((make_tiles, 9), (make_pyramid, 9), (make_shifts, 8)):
        b = build()
        rho = complementary_state(b)
        w = np.linalg.eigvalsh(rho.mat)
        assert rho.rank() == 4
        assert np.allclose(w, [0] * (D - 4) + [0.25] * 4, atol=1e-14)
        for s in b.states:
            assert abs(np.vdot(s.vector, rho.mat @ s.vector)) < 1e-15


def test_complementary_state_needs_proper_subspace():
    e = np.eye(2)
    full = ProductBasis(tuple(ProductState((a, b)) for a in e for b in e), (2, 2))
    with pytest.raises(ValueError):
        complementary_state(full)


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(4), (2, 2))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5, 0, 0]), (2, 2))
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(3) / 3, (2, 2))


def test_cuts():
    assert [c.label() for c in all_cuts(3)] == ["A|BC", "B|AC", "C|AB"]
    assert [c.label() for c in all_cuts(2)] == ["A|B"]
    assert len(all_cuts(4)) == 7
    with pytest.raises(ValueError):
        BipartiteCut(frozenset({0, 1}), 2)


@pytest.mark.parametrize("build", [make_pyramid, make_tiles, make_shifts])
def test_upb_complements_are_ppt(build):
    rho = complementary_state(build())
    checks = all_cuts_ppt(rho)
    assert len(checks) == 2 ** (len(rho.dims) - 1) - 1
    for c in checks:
        assert c.min_eigenvalue >= -1e-12
        assert c.passed


def test_bell_state_is_npt():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = DensityMatrix(projector(bell), (2, 2))
    assert ppt_min_eigenvalue(rho, 0) == pytest.approx(-0.5, abs=1e-14)


def test_random_entangled_pure_state_fails_a_cut(rng):
    psi = random_vector(rng, 8)
    rho = DensityMatrix(projector(psi), (2, 2, 2))
    assert not all(c.passed for c in all_cuts_ppt(rho))


def test_product_projectors_ppt_on_every_cut(rng):
    for _ in range(10):
        psi = np.kron(np.kron(random_vector(rng, 2), random_vector(rng, 3)), random_vector(rng, 2))
        rho = DensityMatrix(projector(psi), (2, 3, 2))
        for c in all_cuts(3):
            assert ppt_min_eigenvalue(rho, c) >= -1e-12


@pytest.mark.parametrize("name,build", [("pyramid", make_pyramid), ("shifts", make_shifts)])
def test_range_has_no_product_state(name, build):
    r = range_has_product_state(complementary_state(build()), restarts=1000, seed=0)
    assert r.min_value > 1e-6
    assert r.min_value == pytest.approx(PINNED_RANGE_RESIDUAL[name], rel=1e-9)


def test_range_of_tiles_has_no_product_state():
    assert range_has_product_state(complementary_state(make_tiles()), restarts=200).min_value > 1e-6


def test_range_of_separable_mixture_has_product_state():
    e = np.eye(2)
    rho = DensityMatrix((projector(np.kron(e[0], e[0])) + projector(np.kron(e[1], e[1]))) / 2, (2, 2))
    assert range_has_product_state(rho, restarts=20).min_value <= 1e-10


@pytest.mark.parametrize("cut", [0, 1, 2])
def test_shifts_two_way_separable(cut):
    rho = complementary_state(make_shifts())
    members = shifts_cut_decomposition(cut)
    assert verify_product_decomposition(rho, members, [0.25] * 4, cut)
    assert decomposition_error(rho, members, [0.25] * 4, cut) <= 1e-12


def test_tiles_rejects_near_product_members():
    rho = complementary_state(make_tiles())
    members = [range_has_product_state(rho, restarts=5, seed=s).argmin for s in range(4)]
    assert not verify_product_decomposition(rho, members, [0.25] * 4, 0)


def test_decomposition_weights_checked():
    rho = complementary_state(make_shifts())
    with pytest.raises(ValueError):
        decomposition_error(rho, shifts_cut_decomposition(0), [0.5] * 4, 0)


def _independent_eof_value(est):
    total = 0.0
    dA, dB = est.dims
    for p, v in zip(est.weights, est.members):
        red = partial_trace(projector(v), (dA, dB), {0})
        total += p * von_neumann_entropy(red / np.trace(red).real)
    return total


@pytest.mark.parametrize("build,target", [(make_tiles, 0.213726), (make_pyramid, 0.232635)])
def test_eof_small_budget(build, target):
    rho = complementary_state(build())
    est = eof_upper_bound(rho, 0, k_max=6, restarts=8, seed=0)
    assert abs(est.value - target) <= 2e-3
    assert eof_reconstruction_error(rho, est) <= 1e-8
    assert abs(sum(est.weights) - 1) <= 1e-12
    assert _independent_eof_value(est) == pytest.approx(est.value, abs=1e-8)
    assert 0 <= est.value <= np.log2(3)


def test_eof_separable_control():
    est = eof_upper_bound(separable_control(), 0, k_max=6, restarts=10, seed=0)
    assert est.value <= 1e-6


def test_eof_pure_state_is_entropy_of_entanglement(rng):
    psi = random_vector(rng, 6)
    rho = DensityMatrix(projector(psi), (2, 3))
    red = partial_trace(rho.mat, (2, 3), {0})
    est = eof_upper_bound(rho, 0, k_max=3, restarts=3, seed=1)
    assert est.value == pytest.approx(von_neumann_entropy(red), abs=1e-10)


def test_eof_monotone_in_budget():
    rho = complementary_state(make_tiles())
    small = eof_upper_bound(rho, 0, k_max=5, restarts=3, seed=2).value
    more_restarts = eof_upper_bound(rho, 0, k_max=5, restarts=6, seed=2).value
    more_sizes = eof_upper_bound(rho, 0, k_max=7, restarts=3, seed=2).value
    assert more_restarts <= small
    assert more_sizes <= small


def test_eof_k_max_below_rank():
    with pytest.raises(ValueError):
        eof_upper_bound(complementary_state(make_tiles()), 0, k_max=3)


def test_eof_across_multiparty_cut_of_shifts():
    # separable across A|BC, so the bound should reach zero
    rho = complementary_state(make_shifts())
    est = eof_upper_bound(rho, 0, k_max=6, restarts=10, seed=0)
    assert est.dims == (2, 4)
    assert est.value <= 1e-6
    assert eof_reconstruction_error(rho, est, 0) <= 1e-8
