import math

import numpy as np
import pytest
from scipy import stats

from entanglement_ensembles import closedform as cf
from entanglement_ensembles import ensembles as ens
from entanglement_ensembles import entropy as ent


def rng(seed=7):
    return np.random.default_rng(seed)


def test_haar_unitary_is_unitary_and_has_haar_moments():
    r = rng()
    d = 6
    U = ens.haar_unitary(d, r)
    assert np.allclose(U.conj().T @ U, np.eye(d), atol=1e-12)
    x2, x4 = [], []
    for _ in range(4000):
        u = abs(ens.haar_unitary(d, r)[0, 0]) ** 2
        x2.append(u)
        x4.append(u * u)
    # Weingarten: E|U11|^2 = 1/d, E|U11|^4 = 2/(d(d+1))
    assert np.mean(x2) == pytest.approx(1 / d, abs=4 * np.std(x2) / math.sqrt(4000))
    assert np.mean(x4) == pytest.approx(2 / (d * (d + 1)), abs=4 * np.std(x4) / math.sqrt(4000))


def test_haar_orthogonal_entry_law():
    r = rng(1)
    d = 5
    O = ens.haar_orthogonal(d, r)
    assert np.allclose(O.T @ O, np.eye(d), atol=1e-12)
    x = np.array([ens.haar_orthogonal(d, r)[2, 3] ** 2 for _ in range(3000)])
    assert stats.kstest(x, stats.beta(0.5, (d - 1) / 2).cdf).pvalue > 1e-3


def test_haar_isometry_columns_orthonormal():
    Q = ens.haar_isometry(7, 3, rng())
    assert np.allclose(Q.conj().T @ Q, np.eye(3), atol=1e-12)
    assert ens.haar_isometry(4, 0, rng()).shape == (4, 0)
    with pytest.raises(ValueError):
        ens.haar_isometry(3, 4, rng())


def test_haar_state_amplitude_is_beta_1_3():
    r = rng(2)
    x = np.array([abs(ens.sample_haar_state(2, r).amplitudes[0]) ** 2 for _ in range(4000)])
    assert stats.kstest(x, stats.beta(1, 3).cdf).pvalue > 1e-3


def test_sector_state_normalized_and_sized():
    s = ens.sample_sector_state(6, 2, rng())
    assert s.amplitudes.size == math.comb(6, 2)
    assert np.linalg.norm(s.amplitudes) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        ens.sample_sector_state(4, 5, rng())


def test_gaussian_state_is_pure():
    g = ens.sample_gaussian_state(5, rng())
    g.validate()
    assert np.allclose(g.matrix @ g.matrix, -np.eye(10), atol=1e-10)


def test_gaussian_subsystem_matches_full_restriction():
    r = rng(3)
    V, V_A = 6, 2
    full = [ent.gaussian_entropy_from_J(ens.sample_gaussian_state(V, r).matrix[: 2 * V_A, : 2 * V_A]) for _ in range(2000)]
    fast = [ent.gaussian_entropy_from_J(ens.sample_gaussian_subsystem(V, V_A, r)) for _ in range(2000)]
    assert stats.ks_2samp(full, fast).pvalue > 1e-3
    assert ens.sample_gaussian_subsystem(4, 0, r).shape == (0, 0)


def test_gaussian_fixedN_projector_and_subsystem_law():
    r = rng(4)
    g = ens.sample_gaussian_fixedN(8, 3, r)
    g.validate()
    assert np.trace(g.matrix).real == pytest.approx(3.0, abs=1e-12)
    V, N, V_A = 8, 3, 3
    full = [ent.gaussian_entropy_from_C(ens.sample_gaussian_fixedN(V, N, r).matrix[:V_A, :V_A]) for _ in range(2000)]
    fast = [ent.gaussian_entropy_from_C(ens.sample_gaussian_fixedN_subsystem(V, N, V_A, r)) for _ in range(2000)]
    assert stats.ks_2samp(full, fast).pvalue > 1e-3


def test_bosonic_basis_and_rdm():
    basis = ens.bosonic_sector_basis(4, 3)
    assert basis.shape == (math.comb(6, 3), 4)
    assert np.all(basis.sum(axis=1) == 3)
    assert len({tuple(b) for b in basis}) == basis.shape[0]
    amp = ens.sample_bosonic_sector_state(4, 3, rng())
    spec = ens.bosonic_rdm_spectrum(amp, basis, 2)
    assert spec.eigenvalues.sum() == pytest.approx(1.0, abs=1e-12)
    assert sum(spec.block_weights.values()) == pytest.approx(1.0, abs=1e-12)


def test_seeded_rng_reproducible_and_bounded():
    a = ens.SeededRng(5, 2).generator().random(4)
    b = ens.SeededRng(5, 2).generator().random(4)
    c = ens.SeededRng(5, 3).generator().random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        ens.SeededRng(-1)
    with pytest.raises(ValueError):
        ens.SeededRng(0, 2**64)


@pytest.mark.parametrize("workers", [1, 4, 8])
def test_mc_estimate_is_worker_independent(workers):
    sampler = lambda g: ens.sample_haar_state(3, g)
    stat = lambda s: ent.vn_entropy(ent.rdm_spectrum_full(s, ent.PartitionSpec(3, 1)))
    ref = ens.mc_estimate(sampler, stat, 300, 11, n_workers=1, chunk_size=17)
    got = ens.mc_estimate(sampler, stat, 300, 11, n_workers=workers, chunk_size=17)
    assert (got.mean, got.stderr, got.n_samples) == (ref.mean, ref.stderr, ref.n_samples)


def test_mc_estimate_constant_statistic():
    est = ens.mc_estimate(lambda g: g.random(), lambda x: 2.5, 10, 0)
    assert est.mean == 2.5 and est.stderr == 0.0
    assert est.z_score(2.5) == 0.0
    assert est.z_score(2.0) == math.inf


def test_mc_estimate_reports_failing_chunk():
    def bad(g):
        raise ArithmeticError("boom")

    with pytest.raises(RuntimeError, match="chunk 0"):
        ens.mc_estimate(bad, float, 5, 0)
    with pytest.raises(ValueError):
        ens.mc_estimate(lambda g: 0.0, float, 1, 0)


def test_mc_estimate_interval_coverage():
    hits = 0
    for seed in range(200):
        est = ens.mc_estimate(lambda g: g.random(), float, 100, seed)
        hits += abs(est.z_score(0.5)) < 1.96
    # binomial(200, 0.95) has sd 3.1
    assert 0.89 <= hits / 200 <= 0.99


def test_mc_estimate_agrees_with_page_average():
    part = ent.PartitionSpec(6, 2)
    est = ens.mc_estimate(
        lambda g: ens.sample_haar_state(6, g),
        lambda s: ent.vn_entropy(ent.rdm_spectrum_full(s, part)),
        2000,
        3,
    )
    assert abs(est.z_score(cf.page_average(4, 16))) < 4


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv(ens.WORKERS_ENV, "3")
    assert ens.default_workers() == 3
    monkeypatch.setenv(ens.WORKERS_ENV, "x")
    with pytest.raises(ValueError):
        ens.default_workers()
