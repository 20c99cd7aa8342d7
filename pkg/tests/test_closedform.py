import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from entanglement_ensembles import asymptotics as asy
from entanglement_ensembles import closedform as cf
from entanglement_ensembles import ensembles as ens
from entanglement_ensembles import entropy as ent
from entanglement_ensembles import specfun as sf

mp.mp.dps = 30


def h(p):
    return float(-p * mp.log(p) - (1 - p) * mp.log(1 - p)) if 0 < p < 1 else 0.0


def page_mp(dA, dB):
    """Digamma form of the Haar average evaluated in high precision."""
    if dA > dB:
        dA, dB = dB, dA
    return float(mp.digamma(dA * dB + 1) - mp.digamma(dB + 1) - mp.mpf(dA - 1) / (2 * dB))


def page_var_mp(dA, dB):
    if dA > dB:
        dA, dB = dB, dA
    return float(
        mp.mpf(dA + dB) / (dA * dB + 1) * mp.polygamma(1, dB + 1)
        - mp.polygamma(1, dA * dB + 1)
        - mp.mpf((dA - 1) * (dA + 2 * dB - 1)) / (4 * dB**2 * (dA * dB + 1))
    )


def test_page_average_values():
    assert cf.page_average(1, 8) == 0.0
    assert cf.page_average(2, 2) == pytest.approx(1 / 3, abs=1e-14)
    assert cf.page_average(2, 4) == pytest.approx(1 / 5 + 1 / 6 + 1 / 7, abs=1e-14)
    for dA, dB in [(3, 7), (16, 16), (64, 2**20), (2**12, 2**28)]:
        assert cf.page_average(dA, dB) == pytest.approx(page_mp(dA, dB), rel=1e-13)
        assert cf.page_average(dA, dB) == cf.page_average(dB, dA)


def test_page_variance_values():
    assert cf.page_variance(1, 9) == 0.0
    # (4/5) psi'(3) - psi'(5) - 5/80
    assert cf.page_variance(2, 2) == pytest.approx(0.8 * float(mp.polygamma(1, 3)) - float(mp.polygamma(1, 5)) - 5 / 80, abs=1e-15)
    for dA, dB in [(2, 4), (5, 9), (32, 1024)]:
        assert cf.page_variance(dA, dB) == pytest.approx(page_var_mp(dA, dB), rel=1e-10)


def test_page_properties():
    for dA in (2, 3, 8):
        vals = [cf.page_average(dA, dB) for dB in range(1, 40)]
        assert np.all(np.diff(vals) > 0)
        assert all(v < math.log(dA) for v in vals)


def test_fixedN_two_mode_oracle():
    assert cf.fixedN_average(2, 1, 1) == pytest.approx(0.5, abs=1e-14)
    second = integrate.quad(lambda p: h(p) ** 2, 0, 1, epsabs=1e-14)[0]
    assert cf.fixedN_variance(2, 1, 1) == pytest.approx(second - 0.25, abs=1e-12)
    for V, V_A in [(5, 2), (9, 4)]:
        assert cf.fixedN_average(V, V_A, 0) == 0.0
        assert cf.fixedN_variance(V, V_A, 0) == 0.0


def test_dimension_identity_log_space():
    for V in range(1, 41):
        for N in range(V + 1):
            for V_A in range(V + 1):
                a = np.arange(N + 1)
                logs = sf.log_binomial(V_A, a) + sf.log_binomial(V - V_A, N - a)
                tot = np.logaddexp.reduce(logs)
                assert tot == pytest.approx(sf.log_binomial(V, N), abs=1e-10)


def test_weighted_small_cases():
    assert cf.weighted_average(2, 1, 0.0) == pytest.approx(0.25, abs=1e-14)
    assert cf.weighted_average(2, 1, 0.0, gaussian=True) == pytest.approx(0.25, abs=1e-14)
    assert cf.weighted_average(6, 3, 40.0) == pytest.approx(0.0, abs=1e-15)
    assert cf.weighted_variance(6, 3, 40.0) == pytest.approx(0.0, abs=1e-15)
    v1 = cf.fixedN_variance(2, 1, 1)
    assert cf.weighted_variance(2, 1, 0.0) == pytest.approx(0.5 * (0.25 + v1) - 1 / 16, abs=1e-14)
    p = cf.binomial_weights(300, 0.7)
    assert p.sum() == pytest.approx(1.0, abs=1e-14)
    assert p[10] == pytest.approx(math.comb(300, 10) * math.exp(-7) / (1 + math.exp(-0.7)) ** 300, rel=1e-12)


def test_weighted_gaussian_variance_leading_order():
    V, f, w = 800, 0.25, 1.0
    nbar = 1 / (1 + math.e)
    exact = cf.weighted_variance(V, int(f * V), w, gaussian=True)
    assert exact / asy.gaussian_weighted_variance_thermo(V, f, nbar) - 1 == pytest.approx(0, abs=0.05)


def test_gaussian_average_values():
    assert cf.gaussian_average(7, 0) == 0.0
    assert cf.gaussian_average(2, 1) == pytest.approx(0.5, abs=1e-14)
    assert cf.gaussian_average(50, 20) == cf.gaussian_average(50, 30)


def test_gaussian_variance_limits():
    assert cf.gaussian_variance(1000, 0, mode="asymptotic") == 0.0
    assert cf.gaussian_variance(10, 5, mode="asymptotic") == pytest.approx((0.75 + math.log(0.5)) / 2, abs=1e-15)
    assert cf.gaussian_variance_limit_summand(0, 0, 0.5) == pytest.approx(1 / 36, abs=1e-15)
    for V in (400, 1600):
        assert cf.gaussian_variance(V, V // 4) == pytest.approx(
            cf.gaussian_variance(V, V // 4, mode="asymptotic"), rel=0.05
        )
    with pytest.raises(ValueError):
        cf.gaussian_variance(10, 3, mode="bogus")


def test_gaussian_variance_series_matches_closed_forms():
    assert cf.gaussian_variance_series(0.3) == pytest.approx(cf.gaussian_variance(10, 3, mode="asymptotic"), abs=1e-6)
    assert cf.gaussian_fixedN_variance_series(0.3, 0.4) == pytest.approx(
        cf.gaussian_fixedN_variance_asymptotic(0.3, 0.4), abs=1e-6
    )


def test_gaussian_fixedN_values():
    assert cf.gaussian_fixedN_average(9, 4, 0) == 0.0
    assert cf.gaussian_fixedN_average(2, 1, 1) == pytest.approx(0.5, abs=1e-14)
    assert cf.gaussian_fixedN_average(2, 1, 1) == pytest.approx(cf.fixedN_average(2, 1, 1), abs=1e-14)
    f = 0.5
    # at n = 1/2 the fixed-N variance is twice the arbitrary-N one
    half = cf.gaussian_fixedN_variance_asymptotic(0.5, 0.5)
    assert half == pytest.approx(f + f * f + math.log(1 - f), abs=1e-15)
    assert half == pytest.approx(2 * cf.gaussian_variance(10, 5, mode="asymptotic"), abs=1e-15)
    assert cf.gaussian_fixedN_variance_asymptotic(1e-9, 0.3) == pytest.approx(0.0, abs=1e-8)


def test_symmetries_on_grid():
    rng = np.random.default_rng(0)
    for _ in range(200):
        V = int(rng.integers(2, 60))
        V_A, N = int(rng.integers(0, V + 1)), int(rng.integers(0, V + 1))
        a = cf.fixedN_average(V, V_A, N)
        assert cf.fixedN_average(V, V_A, V - N) == pytest.approx(a, abs=1e-10)
        assert cf.fixedN_average(V, V - V_A, N) == pytest.approx(a, abs=1e-10)
        g = cf.gaussian_fixedN_average(V, V_A, N)
        for b in (
            cf.gaussian_fixedN_average(V, V_A, V - N),
            cf.gaussian_fixedN_average(V, V - V_A, N),
            cf.gaussian_fixedN_average(V, N, V_A),
        ):
            assert b == pytest.approx(g, abs=1e-10)


def test_level_density_normalization():
    for args in [(60, 20, 30), (40, 10, 25), (30, 12, None), (50, 25, None)]:
        V, V_A, N = args
        val = integrate.quad(lambda x: cf.jacobi_level_density(x, V, V_A, N), -1, 1, limit=200, epsabs=1e-12)[0]
        assert val == pytest.approx(V_A, abs=1e-8)
        xs = np.linspace(-1, 1, 1000)
        assert np.all(cf.jacobi_level_density(xs, V, V_A, N) >= 0)


def test_level_density_against_sampled_spectra():
    from scipy import stats

    V, N, V_A = 60, 30, 20
    rng = ens.SeededRng(17).generator()
    xs = np.concatenate(
        [2 * np.linalg.eigvalsh(ens.sample_gaussian_fixedN_subsystem(V, N, V_A, rng)) - 1 for _ in range(500)]
    )
    edges = np.linspace(-1, 1, 21)
    expected = np.array(
        [integrate.quad(lambda x: cf.jacobi_level_density(x, V, V_A, N), a, b)[0] for a, b in zip(edges[:-1], edges[1:])]
    )
    counts, _ = np.histogram(xs, edges)
    expected *= counts.sum() / expected.sum()
    assert stats.chisquare(counts, expected).pvalue > 0.01


@pytest.mark.slow
def test_fixedN_mc_oracles():
    basis = ent.sector_basis(8, 4)
    part = ent.PartitionSpec(8, 3)
    e = ens.mc_estimate(
        lambda r: ens.sample_sector_state(8, 4, r, basis),
        lambda s: ent.vn_entropy(ent.rdm_spectrum_sector(s, part)),
        20_000,
        31,
    )
    assert abs(e.z_score(cf.fixedN_average(8, 3, 4))) < 4
    assert e.sample_variance / cf.fixedN_variance(8, 3, 4) - 1 == pytest.approx(0, abs=0.1)


@pytest.mark.slow
def test_page_variance_mc_oracle():
    part = ent.PartitionSpec(3, 1)
    e = ens.mc_estimate(
        lambda r: ens.sample_haar_state(3, r),
        lambda s: ent.vn_entropy(ent.rdm_spectrum_full(s, part)),
        100_000,
        32,
    )
    assert abs(e.z_score(cf.page_average(2, 4))) < 4
    assert e.sample_variance / cf.page_variance(2, 4) - 1 == pytest.approx(0, abs=0.03)
