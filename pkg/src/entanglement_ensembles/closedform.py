"""Exact finite-size averages and variances of the entanglement entropy.

Covers random pure states (arbitrary, fixed and weighted particle number)
and fermionic Gaussian states (the same three settings), the level
densities of the associated Jacobi ensembles, and the summands whose
double sums give the Gaussian variances.

All Hilbert-space dimensions are handled through their logarithms so that
sector sums remain finite for thousands of modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun as sf
from .entropy import PartitionSpec, s_binary

__all__ = [
    "FixedNSpec",
    "WeightedSpec",
    "page_average",
    "page_variance",
    "sector_sum_average",
    "sector_sum_variance",
    "fixedN_average",
    "fixedN_variance",
    "binomial_weights",
    "weighted_average",
    "weighted_variance",
    "gaussian_average",
    "gaussian_variance",
    "gaussian_variance_summand",
    "gaussian_variance_limit_summand",
    "gaussian_variance_series",
    "gaussian_fixedN_average",
    "gaussian_fixedN_variance_asymptotic",
    "gaussian_fixedN_fourier_coefficients",
    "gaussian_fixedN_limit_summand",
    "gaussian_fixedN_variance_series",
    "canonical_gaussian_fixedN",
    "jacobi_level_density",
]


@dataclass(frozen=True)
class FixedNSpec:
    """Bipartition together with a fixed total particle number ``N``."""

    part: PartitionSpec
    N: int

    def __post_init__(self) -> None:
        if not 0 <= self.N <= self.part.V:
            raise ValueError("N must lie in [0, V]")

    @property
    def n(self) -> float:
        return self.N / self.part.V


@dataclass(frozen=True)
class WeightedSpec:
    """Bipartition together with the weight parameter ``w`` of P_N ~ e^{-wN}."""

    part: PartitionSpec
    w: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.w):
            raise ValueError("w must be finite")

    @property
    def nbar(self) -> float:
        return 1.0 / (1.0 + math.exp(self.w)) if self.w < 700 else 0.0


# ---------------------------------------------------------------------------
# General pure states
# ---------------------------------------------------------------------------


def _phi_log(log_dA, log_dB, log_dN):
    """Psi(d_N + 1) - Psi(max + 1) - (min - 1)/(2 max) from log-dimensions."""
    lmax = np.maximum(log_dA, log_dB)
    lmin = np.minimum(log_dA, log_dB)
    return (
        sf.digamma1p_from_log(log_dN)
        - sf.digamma1p_from_log(lmax)
        - 0.5 * (np.exp(lmin - lmax) - np.exp(-lmax))
    )


def _chi_log(log_dA, log_dB, log_dN):
    """chi_{N_A} of the sector variance from log-dimensions.

    With r = min/max, eps = 1/max and h(d) = d Psi'(d+1) - 1 the defining
    expression becomes ``r + (1+r) h(max) - h(d_N) - Psi'(d_N+1)
    - (r - eps)(r + 2 - eps)/4``, which is free of large cancellations.
    """
    lmax = np.maximum(log_dA, log_dB)
    lmin = np.minimum(log_dA, log_dB)
    r = np.exp(lmin - lmax)
    eps = np.exp(-lmax)
    return (
        r
        + (1.0 + r) * sf.xtrigamma1p_minus_one_from_log(lmax)
        - sf.xtrigamma1p_minus_one_from_log(log_dN)
        - sf.trigamma1p_from_log(log_dN)
        - 0.25 * (r - eps) * (r + 2.0 - eps)
    )


def page_average(d_A: int, d_B: int) -> float:
    """Average entanglement entropy of a Haar-random state in C^{d_A} x C^{d_B}.

    Parameters
    ----------
    d_A, d_B : int
        Positive subsystem dimensions.

    Returns
    -------
    float
        ``Psi(d_A d_B + 1) - Psi(max + 1) - (min - 1)/(2 max)``.
    """
    if d_A < 1 or d_B < 1:
        raise ValueError("dimensions must be positive")
    la, lb = math.log(d_A), math.log(d_B)
    return float(_phi_log(la, lb, la + lb))


def page_variance(d_A: int, d_B: int) -> float:
    """Variance of the entanglement entropy of a Haar-random state."""
    if d_A < 1 or d_B < 1:
        raise ValueError("dimensions must be positive")
    la, lb = math.log(d_A), math.log(d_B)
    chi = float(_chi_log(la, lb, la + lb))
    return max(chi, 0.0) / (float(d_A) * float(d_B) + 1.0)


def sector_sum_average(log_dA, log_dB, log_dN: float) -> float:
    """Sector-decomposed average ``sum rho_{N_A} phi_{N_A}``.

    Parameters
    ----------
    log_dA, log_dB : array_like
        Log-dimensions of the A and B sectors for every admissible N_A;
        ``-inf`` entries contribute nothing.
    log_dN : float
        Log-dimension of the full sector.

    Returns
    -------
    float
        Average entanglement entropy of a uniformly random state in the
        direct sum of the product sectors.
    """
    la = np.atleast_1d(np.asarray(log_dA, dtype=float))
    lb = np.atleast_1d(np.asarray(log_dB, dtype=float))
    ok = np.isfinite(la) & np.isfinite(lb)
    la, lb = la[ok], lb[ok]
    if la.size == 0:
        return 0.0
    rho = np.exp(la + lb - log_dN)
    phi = _phi_log(la, lb, np.full_like(la, log_dN))
    return float(np.sum(rho * phi))


def sector_sum_variance(log_dA, log_dB, log_dN: float) -> float:
    """Sector-decomposed variance ``[sum rho (phi^2 + chi) - (sum rho phi)^2]/(d_N + 1)``."""
    la = np.atleast_1d(np.asarray(log_dA, dtype=float))
    lb = np.atleast_1d(np.asarray(log_dB, dtype=float))
    ok = np.isfinite(la) & np.isfinite(lb)
    la, lb = la[ok], lb[ok]
    if la.size == 0 or log_dN == 0.0:
        return 0.0
    lN = np.full_like(la, log_dN)
    rho = np.exp(la + lb - log_dN)
    phi = _phi_log(la, lb, lN)
    chi = _chi_log(la, lb, lN)
    mean = np.sum(rho * phi)
    bracket = np.sum(rho * ((phi - mean) ** 2 + chi)) + (1.0 - np.sum(rho)) * mean**2
    log_norm = log_dN + math.log1p(math.exp(-log_dN))
    return max(float(bracket), 0.0) * math.exp(-log_norm)


def _fixedN_logdims(V: int, V_A: int, N: int):
    if not 0 <= V_A <= V:
        raise ValueError("V_A must lie in [0, V]")
    if not 0 <= N <= V:
        raise ValueError("N must lie in [0, V]")
    V_B = V - V_A
    n_a = np.arange(max(0, N - V_B), min(N, V_A) + 1)
    return (
        np.asarray(sf.log_binomial(V_A, n_a)),
        np.asarray(sf.log_binomial(V_B, N - n_a)),
        float(sf.log_binomial(V, N)),
    )


def fixedN_average(V: int, V_A: int, N: int) -> float:
    """Average entanglement entropy of a random state with ``N`` fermions.

    Parameters
    ----------
    V : int
        Number of modes.
    V_A : int
        Modes in subsystem A.
    N : int
        Total particle number.

    Returns
    -------
    float
        ``sum_{N_A} rho_{N_A} [page(d_A, d_B) + Psi(d_N+1) - Psi(d_A d_B+1)]``.
    """
    return sector_sum_average(*_fixedN_logdims(V, V_A, N))


def fixedN_variance(V: int, V_A: int, N: int) -> float:
    """Variance of the entanglement entropy of a random state with ``N`` fermions."""
    return sector_sum_variance(*_fixedN_logdims(V, V_A, N))


# ---------------------------------------------------------------------------
# Weighted particle number
# ---------------------------------------------------------------------------


def binomial_weights(V: int, w: float) -> np.ndarray:
    """Sector probabilities ``P_N = C(V,N) e^{-wN} / (1 + e^{-w})^V``.

    Built from the ratio recurrence ``P_{N+1}/P_N = (V-N)/(N+1) e^{-w}`` in
    log space and normalized at the end, which keeps relative errors near
    machine precision even for thousands of modes.
    """
    if not math.isfinite(w):
        raise ValueError("w must be finite")
    N = np.arange(V)
    steps = np.log((V - N) / (N + 1.0)) - w
    lp = np.concatenate(([0.0], np.cumsum(steps)))
    lp -= lp.max()
    p = np.exp(lp)
    return p / p.sum()


def _sector_stats(V: int, V_A: int, N: int, gaussian: bool):
    if gaussian:
        mean = gaussian_fixedN_average(V, V_A, N)
        fA, nA, _ = canonical_gaussian_fixedN(V, V_A, N)
        var = 0.0 if fA == 0 else gaussian_fixedN_variance_asymptotic(fA / V, nA / V)
        return mean, var
    return fixedN_average(V, V_A, N), fixedN_variance(V, V_A, N)


def weighted_average(V: int, V_A: int, w: float, gaussian: bool = False) -> float:
    """Binomially weighted average over particle-number sectors.

    Parameters
    ----------
    V, V_A : int
        Modes in total and in subsystem A.
    w : float
        Weight parameter; the mean filling is ``1/(1 + e^w)``.
    gaussian : bool
        Average fixed-N Gaussian results instead of general states.
    """
    p = binomial_weights(V, w)
    f = gaussian_fixedN_average if gaussian else fixedN_average
    keep = np.flatnonzero(p > 1e-300)
    return float(sum(p[N] * f(V, V_A, int(N)) for N in keep))


def weighted_variance(V: int, V_A: int, w: float, gaussian: bool = False) -> float:
    """Variance of the entanglement entropy at fixed weight parameter.

    ``sum P_N (<S>_N^2 + var_N) - (sum P_N <S>_N)^2``.  For Gaussian states the
    fixed-N variance inside the sum is the large-V limit, which only
    affects terms of order below V.
    """
    p = binomial_weights(V, w)
    keep = np.flatnonzero(p > 1e-300)
    stats = np.array([_sector_stats(V, V_A, int(N), gaussian) for N in keep])
    pk = p[keep] / p[keep].sum()
    mean = float(np.sum(pk * stats[:, 0]))
    return float(np.sum(pk * ((stats[:, 0] - mean) ** 2 + stats[:, 1])))


# ---------------------------------------------------------------------------
# Gaussian states, arbitrary particle number
# ---------------------------------------------------------------------------


def gaussian_average(V: int, V_A: int) -> float:
    """Average entanglement entropy of a random pure fermionic Gaussian state.

    The subsystem is reflected to ``min(V_A, V - V_A)`` first.
    """
    if not 0 <= V_A <= V:
        raise ValueError("V_A must lie in [0, V]")
    VA = min(V_A, V - V_A)
    if VA == 0:
        return 0.0
    d = sf.digamma_diff
    val = (
        (0.5 + VA - V) * d(2.0 * V - 2.0 * VA, 2.0 * V)
        + (0.25 - VA) * d(float(V), 2.0 * V)
        - 0.25 * d(float(V - VA), 2.0 * V)
        - VA
    )
    return float(val)


def _log_s2(i: np.ndarray, j: np.ndarray, D: int) -> np.ndarray:
    """Log of the squared matrix element s_ij^2 for i < j (weight exponent D)."""
    lg = lambda z: np.asarray(sf.log_gamma(z))  # noqa: E731
    poly = (1 + D - 2 * D * D) * i - 2 * (D - 1) * i * i + (D + 1) * (2 * j + 1) * (D + j)
    return (
        lg(2 * j + 1.0)
        + np.log(2 * D + 4 * i + 1.0)
        + np.log(D + j + 1.0)
        + np.log(2 * D + 2 * j + 1.0)
        + np.log(2 * D + 4 * j + 1.0)
        + lg(2 * D + 2 * i + 1.0)
        + 2 * np.log(np.abs(poly.astype(float)))
        - math.log(2.0)
        - lg(2 * i + 1.0)
        - 2 * np.log(np.abs(2 * i - 2 * j + 1.0))
        - 2 * np.log(np.abs(2 * j - 2 * i + 1.0))
        - 2 * np.log((j - i).astype(float))
        - lg(2 * D + 2 * j + 3.0)
        - 2 * np.log(D + i + j + 0.0)
        - 2 * np.log(D + i + j + 1.0)
        - 2 * np.log(2 * D + 2 * i + 2 * j + 1.0)
    )


def gaussian_variance_summand(i, j, D: int):
    """Squared matrix element ``s_ij^2`` of the entropy function, ``i < j``.

    ``s_ij = int_0^1 s(x) psi_i(x) psi_j(x) dx`` with the even-degree
    Jacobi functions of weight ``(1 - x^2)^D`` normalized on [0, 1].
    """
    ii = np.asarray(i, dtype=np.int64)
    jj = np.asarray(j, dtype=np.int64)
    if np.any(ii >= jj):
        raise ValueError("requires i < j")
    out = np.exp(_log_s2(ii, jj, int(D)))
    return float(out) if np.ndim(out) == 0 else out


def gaussian_variance(V: int, V_A: int, mode: str = "exact_sum", tol: float = 1e-15) -> float:
    """Variance of the entanglement entropy of random pure Gaussian states.

    Parameters
    ----------
    V, V_A : int
        Modes in total and in subsystem A (reflected to ``V_A <= V/2``).
    mode : {"exact_sum", "asymptotic"}
        ``exact_sum`` evaluates ``sum_{i < V_A <= j} s_ij^2`` at finite V;
        ``asymptotic`` returns the limit ``(f + f^2 + ln(1-f))/2``.
    tol : float
        Relative size of the last summed j-block below which the sum stops.

    Returns
    -------
    float
        The variance.

    Notes
    -----
    At fixed ``i`` the summands decay like ``j^{-(7 + 2D)}``, a power law
    rather than a geometric series, so the truncated j-sum is completed by
    the integral estimate of the remaining power-law tail.
    """
    if not 0 <= V_A <= V:
        raise ValueError("V_A must lie in [0, V]")
    VA = min(V_A, V - V_A)
    if mode == "asymptotic":
        f = VA / V
        return 0.5 * (f + f * f + math.log1p(-f))
    if mode != "exact_sum":
        raise ValueError(f"unknown mode {mode!r}")
    if VA == 0:
        return 0.0
    D = V - 2 * VA
    i = np.arange(VA)[:, None]
    total = 0.0
    j0 = VA
    block = 256
    last_col = 0.0
    while True:
        j = np.arange(j0, j0 + block)[None, :]
        terms = np.exp(_log_s2(i, j, D))
        col = terms.sum(axis=0)
        total += float(col.sum())
        last_col = float(col[-1])
        j0 += block
        if col.sum() <= tol * total or j0 - VA > 200000:
            break
    p = 7.0 + 2.0 * D
    j_last = j0 - 1
    total += last_col * j_last / (p - 1.0)
    return total


def gaussian_variance_limit_summand(k: int, l: int, f: float) -> float:
    """Large-V limit of ``s^2_{V_A-1-k, V_A+l}`` at subsystem fraction ``f``."""
    m = k + l
    ratio = (1.0 - f) / f
    return (
        ratio ** (-2 * (m + 1))
        * (2 * m + 3 - 4 * f * (m + 1)) ** 2
        / (4.0 * (m + 1) ** 2 * (2 * m + 1) ** 2 * (2 * m + 3) ** 2)
    )


def gaussian_variance_series(f: float, mmax: int = 500) -> float:
    """Double sum of the limiting summands over ``k + l <= mmax``."""
    f = min(f, 1.0 - f)
    return float(sum((m + 1) * gaussian_variance_limit_summand(m, 0, f) for m in range(mmax + 1)))


# ---------------------------------------------------------------------------
# Gaussian states, fixed particle number
# ---------------------------------------------------------------------------


def canonical_gaussian_fixedN(V: int, V_A: int, N: int):
    """Map ``(V_A, N)`` into the wedge ``V_A <= N <= V/2``.

    Uses the invariances ``N -> V - N``, ``V_A -> V - V_A`` and
    ``N <-> V_A``.  Returns ``(V_A', N', V)``.
    """
    if not 0 <= V_A <= V or not 0 <= N <= V:
        raise ValueError("require 0 <= V_A, N <= V")
    a = min(V_A, V - V_A)
    b = min(N, V - N)
    return min(a, b), max(a, b), V


def gaussian_fixedN_average(V: int, V_A: int, N: int) -> float:
    """Average entanglement entropy of random Gaussian states with ``N`` fermions.

    Parameters
    ----------
    V, V_A, N : int
        Modes, subsystem modes and particle number (any values in [0, V]).

    Returns
    -------
    float
        Exact digamma expression evaluated in the canonical wedge.
    """
    VA, NN, _ = canonical_gaussian_fixedN(V, V_A, N)
    if VA == 0:
        return 0.0
    f = VA / V
    d = sf.digamma_diff
    Vf = float(V)
    val = (
        1.0
        - f * (1.0 + Vf)
        - f * NN * d(float(NN), Vf)
        - f * (Vf - NN) * d(Vf - NN, Vf)
        - (Vf - VA) * d(Vf - VA + 1.0, Vf)
    )
    return float(val)


def _canonical_fn(f: float, n: float):
    if not (0 < f < 1 and 0 < n < 1):
        raise ValueError("require 0 < f, n < 1")
    a, b = min(f, 1 - f), min(n, 1 - n)
    return min(a, b), max(a, b)


def gaussian_fixedN_variance_asymptotic(f: float, n: float) -> float:
    """Large-V variance of the entropy of Gaussian states at filling ``n``.

    Evaluated after mapping ``(f, n)`` into ``0 < f <= n <= 1/2``.
    """
    f, n = _canonical_fn(f, n)
    L = math.log(1.0 / n - 1.0)
    return (
        math.log1p(-f)
        + f
        + f * f
        + f * f * (2 * n - 1) * L
        + f * (f - 1) * (n - 1) * n * L * L
    )


def gaussian_fixedN_fourier_coefficients(f: float, n: float, dmax: int, npts: int = 1 << 16) -> np.ndarray:
    """Cosine coefficients ``c_d`` of ``s(b + 2a cos(theta))`` for ``d = 0..dmax``.

    In the large-V limit the truncated-unitary correlation block near the
    split between occupied and empty levels becomes a Toeplitz operator
    with diagonal ``b = (2n-1)(1-2f)`` and off-diagonal
    ``a = 2 sqrt(f(1-f) n(1-n))``.  The squared matrix elements of the
    entropy function across the split depend only on ``k + l`` and equal
    ``c_{k+l+1}^2``.
    """
    f, n = _canonical_fn(f, n)
    b = (2 * n - 1) * (1 - 2 * f)
    a = 2.0 * math.sqrt(f * (1 - f) * n * (1 - n))
    theta = 2.0 * math.pi * np.arange(npts) / npts
    g = s_binary(np.clip(b + 2 * a * np.cos(theta), -1.0, 1.0))
    # c_d = (1/pi) int_0^pi g cos(d theta) = (1/2pi) int_0^{2pi} g cos(d theta)
    c = np.fft.rfft(g).real / npts
    return c[: dmax + 1]


def gaussian_fixedN_limit_summand(k: int, l: int, f: float, n: float) -> float:
    """Large-V squared matrix element ``s^2_{V_A-1-k, V_A+l}`` at fixed N."""
    c = gaussian_fixedN_fourier_coefficients(f, n, k + l + 1)
    return float(c[k + l + 1] ** 2)


def gaussian_fixedN_variance_series(f: float, n: float, mmax: int = 500) -> float:
    """Double sum of the fixed-N limiting summands over ``k + l <= mmax``."""
    c = gaussian_fixedN_fourier_coefficients(f, n, mmax + 1)
    d = np.arange(1, mmax + 2)
    return float(np.sum(d * c[1:] ** 2))


# ---------------------------------------------------------------------------
# Level densities
# ---------------------------------------------------------------------------


def jacobi_level_density(x, V: int, V_A: int, N: int | None = None):
    """One-point function R_1(x) of the restricted correlation spectrum.

    Parameters
    ----------
    x : float or array_like
        Points in [-1, 1], with ``x = 2y - 1`` for eigenvalues ``y`` of
        ``C_A`` (fixed N) or the singular values of ``J_A`` (arbitrary N).
    V, V_A : int
        Modes in total and in subsystem A.
    N : int, optional
        Particle number; ``None`` selects arbitrary-N Gaussian states.

    Returns
    -------
    float or ndarray
        Nonnegative density with ``int_{-1}^{1} R_1 = V_A``.

    Notes
    -----
    Fixed N requires ``V_A <= min(N, V - N)`` so that no eigenvalue is pinned
    at 0 or 1; the weight is ``(1-x)^(V-N-V_A) (1+x)^(N-V_A)``.  For arbitrary
    N (``V_A <= V/2``) the density lives on ``x >= 0`` and is built from the
    even-degree functions of weight ``(1 - x^2)^(V - 2 V_A)``.
    """
    xs = np.asarray(x, dtype=float)
    if N is None:
        if not 0 <= V_A <= V / 2:
            raise ValueError("arbitrary-N density requires V_A <= V/2")
        D = V - 2 * V_A
        phi = sf.orthonormal_jacobi_functions(2 * V_A, D, D, np.abs(xs))
        dens = 2.0 * np.sum(phi[0::2] ** 2, axis=0)
        dens = np.where(xs >= 0, dens, 0.0)
    else:
        if not 0 <= V_A <= min(N, V - N):
            raise ValueError("fixed-N density requires V_A <= min(N, V - N)")
        phi = sf.orthonormal_jacobi_functions(V_A, V - N - V_A, N - V_A, xs)
        dens = np.sum(phi**2, axis=0)
    return float(dens) if np.ndim(x) == 0 else dens
