import itertools
import math

import numpy as np
import pytest

from entanglement_ensembles import closedform as cf
from entanglement_ensembles import entropy as ent
from entanglement_ensembles import hamiltonians as ham
from entanglement_ensembles.validation import slater_amplitudes


def test_free_fermion_spectrum_and_basis():
    m = ham.build_free_fermion_1d(4)
    E, phi = m.eigensystem
    assert np.allclose(np.sort(E), [-2, 0, 0, 2])
    assert np.allclose(np.sort(np.linalg.eigvalsh(m.h)), np.sort(E))
    assert np.allclose(m.h @ phi, phi * E, atol=1e-12)
    assert np.allclose(phi.conj().T @ phi, np.eye(4), atol=1e-12)


def test_anderson_clean_limit_is_cosine_band():
    L = 3
    m = ham.build_anderson_3d(L, 0.0, seed=1)
    k = 2 * np.pi * np.arange(L) / L
    oracle = np.sort([-2 * (math.cos(a) + math.cos(b) + math.cos(c)) for a in k for b in k for c in k])
    assert np.allclose(np.linalg.eigvalsh(m.h), oracle, atol=1e-12)


def test_anderson_open_boundary_and_disorder():
    L = 3
    m = ham.build_anderson_3d(L, 0.0, seed=1, periodic=False)
    # open cube: each axis contributes (L-1) L^2 bonds
    assert -m.h.sum() / 2 == pytest.approx(3 * (L - 1) * L * L)
    d = np.diag(ham.build_anderson_3d(L, 4.0, seed=2).h)
    assert np.all(np.abs(d) <= 2.0) and np.std(d) > 0.5
    assert np.array_equal(d, np.diag(ham.build_anderson_3d(L, 4.0, seed=2).h))


def test_syk2_is_seeded_gue():
    a = ham.build_syk2_dirac(6, 3)
    b = ham.build_syk2_dirac(6, 3)
    assert np.array_equal(a.h, b.h)
    assert np.allclose(a.h, a.h.conj().T)
    assert not np.array_equal(a.h, ham.build_syk2_dirac(6, 4).h)


def test_quadratic_entropy_matches_many_body_slater_state():
    m = ham.build_syk2_dirac(6, 5)
    _, phi = m.eigensystem
    for occ in [(0, 2), (1, 3, 4), (5,)]:
        amp = slater_amplitudes(phi, occ, 6)
        spec = ent.rdm_spectrum_full(ent.PureStateVector(amp, 6), ent.PartitionSpec(6, 2))
        assert ham.quadratic_eigenstate_entropy(m, occ, 2) == pytest.approx(ent.vn_entropy(spec), abs=1e-10)


def test_quadratic_entropy_masks_and_errors():
    m = ham.build_free_fermion_1d(6)
    mask = np.array([1, 0, 1, 0, 0, 0], dtype=bool)
    assert ham.quadratic_eigenstate_entropy(m, mask, 3) == ham.quadratic_eigenstate_entropy(m, [0, 2], 3)
    assert ham.quadratic_eigenstate_entropy(m, [], 3) == 0.0
    with pytest.raises(ValueError):
        ham.quadratic_eigenstate_entropy(m, [7], 3)
    with pytest.raises(ValueError):
        ham.quadratic_eigenstate_entropy(m, mask[:3], 3)


def test_all_states_average_matches_enumeration():
    m = ham.build_free_fermion_1d(4)
    brute = np.mean(
        [
            ham.quadratic_eigenstate_entropy(m, list(occ), 2)
            for r in range(5)
            for occ in itertools.combinations(range(4), r)
        ]
    )
    est = ham.quadratic_eigenstate_average(m, 2, mode="all_states")
    assert est.mean == pytest.approx(brute, abs=1e-14)
    assert est.n_samples == 16


def test_sampled_modes_are_deterministic_and_consistent():
    m = ham.build_syk2_dirac(10, 1)
    exact = ham.quadratic_eigenstate_average(m, 5, mode="all_states")
    a = ham.quadratic_eigenstate_average(m, 5, mode="sampled", n=400, seed=9, n_workers=1)
    b = ham.quadratic_eigenstate_average(m, 5, mode="sampled", n=400, seed=9, n_workers=4)
    assert (a.mean, a.stderr) == (b.mean, b.stderr)
    assert abs(a.z_score(exact.mean)) < 4
    s = ham.quadratic_eigenstate_average(m, 5, mode="stratified", n=400, seed=9)
    assert abs(s.z_score(exact.mean)) < 4
    assert s.stderr < a.stderr
    with pytest.raises(ValueError):
        ham.quadratic_eigenstate_average(m, 5, mode="sampled")
    with pytest.raises(ValueError):
        ham.quadratic_eigenstate_average(m, 5, mode="fixed_N_sampled", n=10, seed=1)


def test_fixed_N_sampled_matches_sector_enumeration():
    m = ham.build_syk2_dirac(8, 2)
    exact = np.mean([ham.quadratic_eigenstate_entropy(m, list(o), 4) for o in itertools.combinations(range(8), 3)])
    est = ham.quadratic_eigenstate_average(m, 4, mode="fixed_N_sampled", n=600, seed=4, N=3)
    assert abs(est.z_score(exact)) < 4


def _hcb_oracle(V, N, t1, t2, V1, V2):
    """Hard-core boson chain from Kronecker products, projected to the sector."""
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0> with |1> as index 1
    num = np.diag([0.0, 1.0])

    def site_op(op, l):
        mats = [np.eye(2)] * V
        mats[l % V] = op
        out = np.array([[1.0]])
        for x in mats:
            out = np.kron(out, x)
        return out

    H = np.zeros((2**V, 2**V))
    for l in range(V):
        for r, t in ((1, t1), (2, t2)):
            hop = site_op(lower.T, l + r) @ site_op(lower, l)
            H -= t * (hop + hop.T)
        H += V1 * site_op(num, l) @ site_op(num, l + 1) + V2 * site_op(num, l) @ site_op(num, l + 2)
    idx = ent.sector_basis(V, N)
    return H[np.ix_(idx, idx)]


@pytest.mark.parametrize("V,N", [(4, 2), (6, 3), (5, 2)])
def test_hcb_chain_matches_kron_oracle(V, N):
    args = (1.0, 0.4, 0.7, 0.3)
    m = ham.build_hcb_chain(V, N, *args)
    assert np.allclose(m.H, _hcb_oracle(V, N, *args), atol=1e-14)
    assert m.H.shape == (math.comb(V, N),) * 2


def test_hcb_free_limit_spectrum():
    # nearest-neighbour hard-core bosons with N=1 are a single free particle
    m = ham.build_hcb_chain(6, 1)
    k = 2 * np.pi * np.arange(6) / 6
    assert np.allclose(np.linalg.eigvalsh(m.H), np.sort(-2 * np.cos(k)), atol=1e-12)


def test_block_gue_eigenstates_match_fixed_N_average():
    V, N, V_A = 10, 5, 5
    m = ham.build_block_gue(V, N, seed=3)
    est = ham.interacting_eigenstate_average(m, V_A, central_fraction=0.5)
    assert abs(est.mean - cf.fixedN_average(V, V_A, N)) < 4 * est.stderr + 1e-3


def test_full_gue_eigenstates_match_page_average():
    m = ham.build_full_gue(8, seed=2)
    est = ham.interacting_eigenstate_average(m, 4, central_fraction=0.2)
    assert abs(est.mean - cf.page_average(16, 16)) < 4 * est.stderr + 1e-3


def test_interacting_average_deterministic_and_validated():
    m = ham.build_hcb_chain(8, 4, 1.0, 0.5, 0.3, 0.2)
    a = ham.interacting_eigenstate_average(m, 4)
    b = ham.interacting_eigenstate_average(ham.build_hcb_chain(8, 4, 1.0, 0.5, 0.3, 0.2), 4)
    assert a.mean == b.mean
    assert 0 < a.mean < cf.fixedN_average(8, 4, 4) + 0.1
    with pytest.raises(ValueError):
        ham.interacting_eigenstate_average(m, 4, central_fraction=0.0)
    with pytest.raises(ValueError):
        ham.build_full_gue(11, 0)
    with pytest.raises(ValueError):
        ham.build_block_gue(20, 10, 0)
