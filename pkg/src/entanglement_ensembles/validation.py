"""Acceptance checks shared by the ``validate`` command and the test suite.

Each check returns a :class:`CriterionResult` carrying the measured values.
The quick suite runs the inexpensive checks at full strength and skips the
rest; the full suite runs everything.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from . import asymptotics as asy
from . import closedform as cf
from . import ensembles as ens
from . import entropy as ent
from . import hamiltonians as ham
from . import spectral as spc

__all__ = ["CriterionResult", "CRITERIA", "QUICK_IDS", "run_criterion", "run_suite", "slater_amplitudes"]

LN2 = math.log(2.0)
SYK2_REALIZATIONS = 400
SYK2_PER_REALIZATION = 100


@dataclass
class CriterionResult:
    id: int
    title: str
    status: str
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def line(self) -> str:
        return f"criterion {self.id:2d} [{self.status.upper()}] {self.title}"

    def to_dict(self) -> dict:
        return asdict(self)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(np.abs(ys)), 1)[0])


def slater_amplitudes(phi: np.ndarray, occupied, V: int) -> np.ndarray:
    """Amplitudes of ``prod_k (sum_i phi_ik f_i^dagger) |0>`` in the 2**V basis.

    Creation operators are ordered by ascending site, site 0 being the most
    significant bit, so the amplitude of a configuration is a determinant.
    """
    occ = list(occupied)
    amp = np.zeros(2**V, dtype=complex)
    for sites in itertools.combinations(range(V), len(occ)):
        idx = sum(1 << (V - 1 - s) for s in sites)
        amp[idx] = np.linalg.det(phi[np.ix_(sites, occ)]) if occ else 1.0
    return amp


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------


def c01_oracles(seed: int) -> tuple[bool, dict]:
    vals = {
        "page(2,2)": (cf.page_average(2, 2), 1 / 3),
        "page(2,4)": (cf.page_average(2, 4), 107 / 210),
        "gaussian(2,1)": (cf.gaussian_average(2, 1), 0.5),
        "gaussian_fixedN(2,1,1)": (cf.gaussian_fixedN_average(2, 1, 1), 0.5),
        "fixedN(2,1,1)": (cf.fixedN_average(2, 1, 1), 0.5),
    }
    errs = {k: abs(a - b) for k, (a, b) in vals.items()}
    return all(e < 1e-12 for e in errs.values()), {"abs_errors": errs}


def c02_general_mc(seed: int) -> tuple[bool, dict]:
    out, ok = {}, True
    for V_A in (3, 5):
        part = ent.PartitionSpec(10, V_A)
        e = ens.mc_estimate(
            lambda r: ens.sample_haar_state(10, r),
            lambda s: ent.vn_entropy(ent.rdm_spectrum_full(s, part)),
            10_000,
            seed + V_A,
        )
        z = e.z_score(cf.page_average(2**V_A, 2 ** (10 - V_A)))
        out[f"z_full_VA{V_A}"] = z
        ok &= abs(z) < 4
    basis = ent.sector_basis(12, 6)
    part = ent.PartitionSpec(12, 4)
    e = ens.mc_estimate(
        lambda r: ens.sample_sector_state(12, 6, r, basis),
        lambda s: ent.vn_entropy(ent.rdm_spectrum_sector(s, part)),
        2_000,
        seed + 100,
    )
    z = e.z_score(cf.fixedN_average(12, 4, 6))
    out["z_sector"] = z
    return ok and abs(z) < 4, out


def c03_gaussian_mc(seed: int) -> tuple[bool, dict]:
    e1 = ens.mc_estimate(
        lambda r: ens.sample_gaussian_subsystem(50, 20, r), ent.gaussian_entropy_from_J, 2_000, seed
    )
    z1 = e1.z_score(cf.gaussian_average(50, 20))
    e2 = ens.mc_estimate(
        lambda r: ens.sample_gaussian_fixedN_subsystem(100, 50, 30, r), ent.gaussian_entropy_from_C, 2_000, seed + 1
    )
    z2 = e2.z_score(cf.gaussian_fixedN_average(100, 30, 50))
    return abs(z1) < 4 and abs(z2) < 4, {"z_arbitrary_N": z1, "z_fixed_N": z2}


def c04_variances(seed: int) -> tuple[bool, dict]:
    e1 = ens.mc_estimate(
        lambda r: ens.sample_gaussian_subsystem(200, 80, r), ent.gaussian_entropy_from_J, 5_000, seed
    )
    ref1 = cf.gaussian_variance(200, 80)
    e2 = ens.mc_estimate(
        lambda r: ens.sample_gaussian_fixedN_subsystem(200, 100, 80, r), ent.gaussian_entropy_from_C, 5_000, seed + 1
    )
    ref2 = cf.gaussian_fixedN_variance_asymptotic(0.4, 0.5)
    rel1 = e1.sample_variance / ref1 - 1
    rel2 = e2.sample_variance / ref2 - 1
    s1 = abs(cf.gaussian_variance_series(0.3) - cf.gaussian_variance(10, 3, mode="asymptotic"))
    s2 = abs(cf.gaussian_fixedN_variance_series(0.3, 0.4) - cf.gaussian_fixedN_variance_asymptotic(0.3, 0.4))
    ok = abs(rel1) < 0.1 and abs(rel2) < 0.1 and s1 < 1e-6 and s2 < 1e-6
    return ok, {
        "rel_dev_arbitrary_N": rel1,
        "rel_dev_fixed_N": rel2,
        "series_err_arbitrary_N": s1,
        "series_err_fixed_N": s2,
    }


def c05_asymptotic_orders(seed: int) -> tuple[bool, dict]:
    Vs = [64, 128, 256, 512, 1024]
    r1 = [cf.gaussian_fixedN_average(V, V // 4, V // 2) - asy.gaussian_fixedN_thermo(V, 0.25, 0.5) for V in Vs]
    w_eq = math.log(3.0)  # nbar = 1/4
    w_off = math.log(1.5)  # nbar = 2/5
    r2 = [cf.weighted_average(V, V // 4, w_eq, gaussian=True) - asy.gaussian_weighted_thermo(V, 0.25, 0.25) for V in Vs]
    r3 = [cf.weighted_average(V, V // 4, w_off, gaussian=True) - asy.gaussian_weighted_thermo(V, 0.25, 0.4) for V in Vs]
    k1, k2 = _loglog_slope(Vs, r1), _loglog_slope(Vs, r2)
    # below V = 256 a crossover term exp(-c V (f - nbar)^2) still dominates off the line
    k3 = _loglog_slope(Vs[2:], r3[2:])
    ok = abs(k1 + 3) <= 0.3 and abs(k2 + 1.5) <= 0.3 and abs(k3 + 3) <= 0.3
    return ok, {
        "slope_fixedN": k1,
        "slope_weighted_f_eq_nbar": k2,
        "slope_weighted_off_V_ge_256": k3,
        "slope_weighted_off_all_V": _loglog_slope(Vs, r3),
    }


def c06_symmetries(seed: int) -> tuple[bool, dict]:
    rng = ens.SeededRng(seed).generator()
    worst_f, worst_g = 0.0, 0.0
    for _ in range(200):
        V = int(rng.integers(2, 60))
        V_A = int(rng.integers(0, V + 1))
        N = int(rng.integers(0, V + 1))
        a = cf.fixedN_average(V, V_A, N)
        for b in (cf.fixedN_average(V, V_A, V - N), cf.fixedN_average(V, V - V_A, N)):
            worst_f = max(worst_f, abs(a - b))
        g = cf.gaussian_fixedN_average(V, V_A, N)
        for b in (
            cf.gaussian_fixedN_average(V, V_A, V - N),
            cf.gaussian_fixedN_average(V, V - V_A, N),
            cf.gaussian_fixedN_average(V, N, V_A),
        ):
            worst_g = max(worst_g, abs(g - b))
    return worst_f < 1e-10 and worst_g < 1e-10, {"max_dev_fixedN": worst_f, "max_dev_gaussian_fixedN": worst_g}


def c07_syk2(seed: int) -> tuple[bool, dict]:
    V = 256
    m = ham.build_syk2_dirac(V, seed)
    ok, out = True, {}
    for k in range(1, 6):
        f = k / 10
        V_A = round(f * V)
        fa = V_A / V
        lead = V * _gaussian_w0_leading(fa)
        e = ham.quadratic_eigenstate_average(m, V_A, "sampled", n=2_000, seed=seed + k)
        deficit = lead - e.mean
        rel = deficit / (fa / 2) - 1
        out[f"deficit_rel_dev_f{f:.1f}"] = rel
        ok &= abs(rel) < 0.15
    # one realization fluctuates by ~0.025 at V = 256, three times the 1/sqrt(V)
    # term, so the residual is averaged over disorder realizations
    means = [
        ham.quadratic_eigenstate_average(
            ham.build_syk2_dirac(V, seed + 1000 + r), V // 2, "stratified", n=SYK2_PER_REALIZATION, seed=seed + r
        ).mean
        for r in range(SYK2_REALIZATIONS)
    ]
    mean = float(np.mean(means))
    stderr = float(np.std(means, ddof=1) / math.sqrt(len(means)))
    resid = V * _gaussian_w0_leading(0.5) - mean - 0.25
    target = 1 / (3 * math.sqrt(2 * math.pi)) / math.sqrt(V)
    out.update(
        {
            "half_residual": resid,
            "half_residual_stderr": stderr,
            "half_target": target,
            "realizations": len(means),
        }
    )
    ok &= resid < 0 and target / 2 <= -resid <= 2 * target
    return ok, out


def _gaussian_w0_leading(f: float) -> float:
    """Volume coefficient of the Gaussian average at arbitrary particle number."""
    f = min(f, 1 - f)
    return (LN2 - 1.0) * f + (f - 1.0) * math.log1p(-f)


def c08_free_fermions(seed: int) -> tuple[bool, dict]:
    m = ham.build_free_fermion_1d(32)
    e = ham.quadratic_eigenstate_average(m, 16, "sampled", n=100_000, seed=seed)
    norm = 16 * LN2
    ratio, err = e.mean / norm, e.stderr / norm
    sep = (0.5573 - ratio) / err
    ok = 0.530 <= ratio <= 0.545 and sep >= 5
    return ok, {"ratio": ratio, "ratio_stderr": err, "stderrs_below_gaussian": sep}


def c09_hcb(seed: int) -> tuple[bool, dict]:
    deltas = {}
    for V in (10, 12, 14):
        m = ham.build_hcb_chain(V, V // 2, 1.0, 1.0, 1.1, 1.1)
        e = ham.interacting_eigenstate_average(m, V // 2, 0.2)
        deltas[V] = cf.fixedN_average(V, V // 2, V // 2) - e.mean
    d = [deltas[V] for V in (10, 12, 14)]
    positive = all(x > 0 for x in d)
    monotone = d[0] > d[1] > d[2]
    band = all(0.8 <= deltas[V] * V <= 3.3 for V in deltas)
    return positive and monotone and band, {
        "delta": {str(k): v for k, v in deltas.items()},
        "delta_times_V": {str(k): v * k for k, v in deltas.items()},
        "positive": positive,
        "monotone": monotone,
        "in_band": band,
    }


def c10_spectral(seed: int) -> tuple[bool, dict]:
    rng = ens.SeededRng(seed).generator()
    pooled = []
    while sum(p.size for p in pooled) < 100_000:
        u = spc.unfold(spc.sample_gaussian_ensemble("GUE", 400, rng))
        pooled.append(spc.bulk_spacings(u))
    sp = np.concatenate(pooled)
    ks_gue = spc.spacing_ks(sp, spc.WIGNER_GUE)[0]
    ks_poi = spc.spacing_ks(sp, spc.POISSON)[0]
    ds = spc.direct_sum_gue_spacing(5, 4_000, rng)
    ds_gue = spc.spacing_ks(ds, spc.WIGNER_GUE)[0]
    ds_poi = spc.spacing_ks(ds, spc.POISSON)[0]
    N = 256
    _, vecs = np.linalg.eigh(spc.gue_matrix(N, rng))
    amps = (np.abs(vecs[:, np.linspace(0, N - 1, 20).astype(int)]) ** 2).ravel()
    p_pt = _porter_thomas_chi2(amps, N)
    ok = ks_gue < 0.05 and ks_poi > 0.2 and ds_poi < ds_gue and p_pt > 0.01
    return ok, {
        "n_spacings": int(sp.size),
        "ks_gue_surmise": ks_gue,
        "ks_poisson": ks_poi,
        "direct_sum_M5_ks_surmise": ds_gue,
        "direct_sum_M5_ks_poisson": ds_poi,
        "porter_thomas_p": p_pt,
    }


def _porter_thomas_chi2(amps: np.ndarray, N: int, bins: int = 20) -> float:
    # equiprobable bins of the beta = 2 law, whose cdf is 1 - exp(-N A)
    edges = -np.log1p(-np.linspace(0, 1, bins + 1)[:-1]) / N
    edges = np.append(edges, np.inf)
    counts, _ = np.histogram(amps, bins=edges)
    return float(stats.chisquare(counts).pvalue)


def c11_cross_representation(seed: int) -> tuple[bool, dict]:
    rng = ens.SeededRng(seed).generator()
    worst = 0.0
    for _ in range(100):
        V = int(rng.integers(2, 9))
        kind = rng.integers(3)
        if kind == 0:
            m = ham.build_free_fermion_1d(V)
        elif kind == 1:
            m = ham.build_syk2_dirac(V, int(rng.integers(2**32)))
        else:
            A = rng.standard_normal((V, V))
            m = ham.QuadraticModel(A + A.T, "random-real")
        _, phi = m.eigensystem
        occ = sorted(rng.choice(V, int(rng.integers(0, V + 1)), replace=False).tolist())
        V_A = int(rng.integers(0, V + 1))
        amp = slater_amplitudes(phi, occ, V)
        amp /= np.linalg.norm(amp)
        exact = ent.vn_entropy(ent.rdm_spectrum_full(ent.PureStateVector(amp, V), ent.PartitionSpec(V, V_A)))
        worst = max(worst, abs(exact - ham.quadratic_eigenstate_entropy(m, np.array(occ, dtype=int), V_A)))
    return worst < 1e-9, {"max_abs_dev": worst}


def c12_anderson(seed: int) -> tuple[bool, dict]:
    L, V = 6, 216
    means = []
    for s in range(5):
        m = ham.build_anderson_3d(L, 1.0, seed + s)
        e = ham.quadratic_eigenstate_average(m, V // 2, "fixed_N_sampled", n=1_000, seed=seed + s, N=V // 2)
        means.append(e.mean)
    mean = float(np.mean(means))
    lead = V * _gaussian_w0_leading(0.5)
    rel = mean / lead - 1
    return abs(rel) < 0.03, {"mean": mean, "leading_order": lead, "rel_dev": rel, "seed_means": means}


def c13_bosons(seed: int) -> tuple[bool, dict]:
    identity_ok = True
    for V in range(1, 9):
        for N in range(0, 9):
            d_N = math.comb(N + V - 1, N)
            for V_A in range(0, V + 1):
                tot = sum(
                    (math.comb(a + V_A - 1, a) if V_A else int(a == 0))
                    * (math.comb(N - a + V - V_A - 1, N - a) if V - V_A else int(a == N))
                    for a in range(N + 1)
                )
                identity_ok &= tot == d_N
    basis = ens.bosonic_sector_basis(4, 3)
    e = ens.mc_estimate(
        lambda r: ens.sample_bosonic_sector_state(4, 3, r),
        lambda a: ent.vn_entropy(ens.bosonic_rdm_spectrum(a, basis, 2)),
        10_000,
        seed,
    )
    z = e.z_score(asy.bosonic_fixedN_exact(4, 2, 3))
    return identity_ok and abs(z) < 4, {"identity_exact": identity_ok, "z": z}


CRITERIA: dict[int, tuple[str, Callable[[int], tuple[bool, dict]]]] = {
    1: ("closed-form oracle battery", c01_oracles),
    2: ("Monte Carlo vs exact, general states", c02_general_mc),
    3: ("Monte Carlo vs exact, Gaussian states", c03_gaussian_mc),
    4: ("variance closed forms", c04_variances),
    5: ("asymptotic-order fits", c05_asymptotic_orders),
    6: ("symmetry suite", c06_symmetries),
    7: ("SYK2 eigenstate average", c07_syk2),
    8: ("translationally invariant free fermions", c08_free_fermions),
    9: ("hard-core boson chain finite-size scaling", c09_hcb),
    10: ("spectral statistics", c10_spectral),
    11: ("cross-representation Gaussian oracle", c11_cross_representation),
    12: ("3D Anderson leading order", c12_anderson),
    13: ("bosonic extension", c13_bosons),
}

QUICK_IDS = (1, 2, 3, 5, 6, 8, 11, 12, 13)


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def run_criterion(cid: int, seed: int = 20240601) -> CriterionResult:
    """Run one criterion and time it."""
    title, fn = CRITERIA[cid]
    t0 = time.perf_counter()
    ok, measured = fn(seed)
    return CriterionResult(cid, title, _status(bool(ok)), _clean(measured), time.perf_counter() - t0)


def run_suite(suite: str = "quick", seed: int = 20240601) -> list[CriterionResult]:
    """Run the quick or full suite; skipped criteria are listed with status ``skipped``."""
    if suite not in ("quick", "full"):
        raise ValueError("suite must be 'quick' or 'full'")
    results = []
    for cid, (title, _) in CRITERIA.items():
        if suite == "quick" and cid not in QUICK_IDS:
            results.append(CriterionResult(cid, title, "skipped", {"reason": "full suite only"}))
        else:
            results.append(run_criterion(cid, seed))
    return results
