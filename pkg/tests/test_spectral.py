import math

import numpy as np
import pytest
from scipy import integrate, stats

from entanglement_ensembles import spectral as spc


@pytest.mark.parametrize("ref", [spc.WIGNER_GOE, spc.WIGNER_GUE, spc.WIGNER_GSE, spc.POISSON])
def test_spacing_laws_have_unit_norm_and_mean(ref):
    norm = integrate.quad(lambda s: float(ref.pdf(s)), 0, np.inf)[0]
    mean = integrate.quad(lambda s: s * float(ref.pdf(s)), 0, np.inf)[0]
    assert norm == pytest.approx(1.0, abs=1e-10)
    assert mean == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("ref", [spc.WIGNER_GOE, spc.WIGNER_GUE, spc.WIGNER_GSE, spc.POISSON])
def test_cdf_integrates_pdf(ref):
    for s in (0.3, 1.0, 2.2):
        assert float(ref.cdf(s)) == pytest.approx(integrate.quad(lambda x: float(ref.pdf(x)), 0, s)[0], abs=1e-12)


def test_gue_surmise_closed_form():
    s = np.linspace(0, 3, 7)
    oracle = 32 / math.pi**2 * s**2 * np.exp(-4 * s**2 / math.pi)
    assert np.allclose(spc.WIGNER_GUE.pdf(s), oracle, rtol=1e-13)
    goe = math.pi / 2 * s * np.exp(-math.pi * s**2 / 4)
    assert np.allclose(spc.WIGNER_GOE.pdf(s), goe, rtol=1e-13)
    assert float(spc.WIGNER_GOE.pdf(1.0)) == pytest.approx(0.716186, abs=5e-7)


def test_picket_fence_and_invalid_laws():
    assert list(spc.PICKET_FENCE.cdf([0.5, 1.0, 2.0])) == [0.0, 1.0, 1.0]
    with pytest.raises(ValueError):
        spc.PICKET_FENCE.pdf(1.0)
    with pytest.raises(ValueError):
        spc.SpacingReference("wigner", 3)
    with pytest.raises(ValueError):
        spc.POISSON.pdf(-1.0)


def test_gue_matrix_entry_variances():
    r = np.random.default_rng(0)
    H = np.array([spc.gue_matrix(3, r) for _ in range(20000)])
    assert np.allclose(H, H.conj().transpose(0, 2, 1))
    assert np.var(H[:, 0, 0].real) == pytest.approx(1.0, rel=0.05)
    assert np.var(H[:, 0, 1].real) == pytest.approx(0.5, rel=0.05)
    assert np.var(H[:, 0, 1].imag) == pytest.approx(0.5, rel=0.05)


def test_semicircle_density():
    assert integrate.quad(lambda x: float(spc.semicircle_pdf(x, 2.0)), -2, 2)[0] == pytest.approx(1.0, abs=1e-8)
    assert float(spc.semicircle_pdf(3.0, 2.0)) == 0.0


def test_gue_levels_follow_semicircle():
    r = np.random.default_rng(1)
    d = 200
    ev = np.concatenate([spc.sample_gaussian_ensemble("GUE", d, r) for _ in range(20)])
    R = 2 * math.sqrt(d)
    edges = np.linspace(-R, R, 21)
    obs, _ = np.histogram(ev, edges)
    cdf = lambda x: integrate.quad(lambda t: float(spc.semicircle_pdf(t, R)), -R, x)[0]
    probs = np.diff([cdf(e) for e in edges])
    exp = probs / probs.sum() * obs.sum()
    # finite-d edge tails leak outside [-R, R]; bin counts still agree
    assert stats.chisquare(obs, exp).pvalue > 1e-4


def test_unfold_uniform_levels_is_identity_up_to_shift():
    E = np.linspace(-1, 1, 500)
    u = spc.unfold(E, degree=3)
    assert np.allclose(np.diff(u), np.diff(u).mean(), rtol=1e-8)
    assert np.diff(u).mean() == pytest.approx(1.0, rel=1e-8)


def test_unfold_rejects_short_input():
    with pytest.raises(ValueError):
        spc.unfold(np.arange(5.0), degree=7)


def test_bulk_spacings_fraction():
    s = spc.bulk_spacings(np.arange(101.0), bulk=0.8)
    assert s.size == 80 and np.all(s == 1.0)
    with pytest.raises(ValueError):
        spc.bulk_spacings(np.arange(10.0), bulk=0.0)


def test_poisson_spacings_pass_own_ks():
    r = np.random.default_rng(2)
    levels = np.cumsum(r.exponential(size=20000))
    s = np.diff(levels)
    d, p = spc.spacing_ks(s, spc.POISSON)
    assert p > 1e-3
    assert spc.spacing_ks(s, spc.WIGNER_GUE)[1] < 1e-10


def test_gue_spacings_match_surmise_not_poisson():
    r = np.random.default_rng(3)
    s = np.concatenate(
        [spc.bulk_spacings(spc.unfold(spc.sample_gaussian_ensemble("GUE", 200, r)), 0.6) for _ in range(40)]
    )
    assert spc.spacing_ks(s, spc.WIGNER_GUE)[0] < 0.02
    assert spc.spacing_ks(s, spc.POISSON)[1] < 1e-10


def test_direct_sum_single_block_is_wigner_like_and_many_blocks_poisson_like():
    r = np.random.default_rng(4)
    one = spc.direct_sum_gue_spacing(1, 1500, r, d=40)
    many = spc.direct_sum_gue_spacing(6, 1500, r, d=40)
    assert np.mean(one) == pytest.approx(1.0, abs=0.05)
    # small gaps are suppressed only for a single block
    assert np.mean(one < 0.2) < 0.02
    assert np.mean(many < 0.2) > 0.08


def test_porter_thomas_normalization_and_mean():
    for beta in (1, 2, 4):
        N = 50
        norm = integrate.quad(lambda a: float(spc.porter_thomas_pdf(a, beta, N)), 0, np.inf)[0]
        mean = integrate.quad(lambda a: a * float(spc.porter_thomas_pdf(a, beta, N)), 0, np.inf)[0]
        assert norm == pytest.approx(1.0, abs=1e-8)
        assert mean == pytest.approx(1 / N, rel=1e-8)
    A = np.linspace(0.001, 0.1, 5)
    assert np.allclose(spc.porter_thomas_pdf(A, 2, 50), 50 * np.exp(-50 * A))


def test_histogram_csv(tmp_path):
    table = spc.histogram_table([0.1, 0.2, 0.9], bins=2, range_=(0.0, 1.0))
    assert np.allclose(table[:, 2], [4 / 3, 2 / 3])
    text = spc.write_histogram_csv(tmp_path / "h.csv", table)
    assert text.splitlines()[0] == "bin_left,bin_right,density"
    assert (tmp_path / "h.csv").read_text() == text
