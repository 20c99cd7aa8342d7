"""Level-spacing and eigenvector-amplitude diagnostics.

Gaussian ensembles use the weight ``exp(-Tr H^2 / 2)`` for GUE: unit-variance
real diagonal entries and off-diagonal entries with real and imaginary parts
of variance 1/2.  GOE matrices are ``(A + A^T)/2`` with ``A`` real standard
normal.  Both have semicircle radius ``2 sqrt(d)`` (GUE) or ``sqrt(2d)``
(GOE) to leading order.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from scipy import special as _sp
from scipy import stats

from .tables import write_csv

__all__ = [
    "SpacingReference",
    "WIGNER_GOE",
    "WIGNER_GUE",
    "WIGNER_GSE",
    "POISSON",
    "PICKET_FENCE",
    "reference_pdf",
    "reference_cdf",
    "gue_matrix",
    "goe_matrix",
    "sample_gaussian_ensemble",
    "semicircle_pdf",
    "unfold",
    "bulk_spacings",
    "spacing_ks",
    "direct_sum_gue_spacing",
    "porter_thomas_pdf",
    "histogram_table",
    "write_histogram_csv",
]


@dataclass(frozen=True)
class SpacingReference:
    """Nearest-neighbour spacing law with unit mean.

    ``kind`` is ``"wigner"`` (with Dyson index ``beta`` in {1, 2, 4}),
    ``"poisson"`` or ``"picket"`` (a point mass at ``s = 1``).
    """

    kind: Literal["wigner", "poisson", "picket"]
    beta: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind == "wigner":
            if self.beta not in (1, 2, 4):
                raise ValueError("Wigner surmise needs beta in {1, 2, 4}")
        elif self.kind not in ("poisson", "picket"):
            raise ValueError(f"unknown spacing law {self.kind!r}")

    def _wigner_constants(self) -> tuple[float, float]:
        b = self.beta
        g2 = math.lgamma((b + 2) / 2)
        g1 = math.lgamma((b + 1) / 2)
        a = 2.0 * math.exp((b + 1) * g2 - (b + 2) * g1)
        c = math.exp(2 * (g2 - g1))
        return a, c

    def pdf(self, s):
        """Density at ``s``; the picket fence has no density and raises."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise ValueError("spacings are non-negative")
        if self.kind == "poisson":
            return np.exp(-s)
        if self.kind == "picket":
            raise ValueError("the picket fence is a point mass; use cdf")
        a, c = self._wigner_constants()
        return a * s**self.beta * np.exp(-c * s * s)

    def cdf(self, s):
        """Cumulative distribution at ``s``."""
        s = np.maximum(np.asarray(s, dtype=float), 0.0)
        if self.kind == "poisson":
            return -np.expm1(-s)
        if self.kind == "picket":
            return np.where(s >= 1.0, 1.0, 0.0)
        _, c = self._wigner_constants()
        return _sp.gammainc((self.beta + 1) / 2, c * s * s)


WIGNER_GOE = SpacingReference("wigner", 1)
WIGNER_GUE = SpacingReference("wigner", 2)
WIGNER_GSE = SpacingReference("wigner", 4)
POISSON = SpacingReference("poisson")
PICKET_FENCE = SpacingReference("picket")


def reference_pdf(ref: SpacingReference, s):
    """Density of ``ref`` at ``s >= 0``."""
    return ref.pdf(s)


def reference_cdf(ref: SpacingReference, s):
    """Distribution function of ``ref`` at ``s``."""
    return ref.cdf(s)


# ---------------------------------------------------------------------------
# Random matrices
# ---------------------------------------------------------------------------


def gue_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    """GUE matrix with density proportional to ``exp(-Tr H^2 / 2)``."""
    if d < 1:
        raise ValueError("d must be positive")
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (A + A.conj().T)


def goe_matrix(d: int, rng: np.random.Generator) -> np.ndarray:
    """GOE matrix ``(A + A^T)/2`` with ``A`` real standard normal."""
    if d < 1:
        raise ValueError("d must be positive")
    A = rng.standard_normal((d, d))
    return 0.5 * (A + A.T)


def sample_gaussian_ensemble(
    kind: Literal["GOE", "GUE"], d: int, rng: np.random.Generator
) -> np.ndarray:
    """Ascending eigenvalues of a GOE or GUE draw of size ``d >= 2``."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if kind == "GUE":
        H = gue_matrix(d, rng)
    elif kind == "GOE":
        H = goe_matrix(d, rng)
    else:
        raise ValueError(f"unknown ensemble {kind!r}")
    return np.linalg.eigvalsh(H)


def semicircle_pdf(x, radius: float):
    """Wigner semicircle density on ``[-radius, radius]``."""
    x = np.asarray(x, dtype=float)
    inside = np.clip(radius * radius - x * x, 0.0, None)
    return 2.0 / (math.pi * radius * radius) * np.sqrt(inside)


# ---------------------------------------------------------------------------
# Unfolding and spacing tests
# ---------------------------------------------------------------------------


def unfold(levels, degree: int = 7) -> np.ndarray:
    """Map levels through a polynomial fit of the staircase ``N(E)``.

    Raises
    ------
    ValueError
        If fewer than ``degree + 2`` levels are given or the least-squares
        fit is rank deficient.
    """
    E = np.sort(np.asarray(levels, dtype=float))
    if E.size < degree + 2:
        raise ValueError("need at least degree + 2 levels")
    staircase = np.arange(1, E.size + 1, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("error", np.exceptions.RankWarning)
        try:
            poly = np.polynomial.Polynomial.fit(E, staircase, degree)
        except np.exceptions.RankWarning as exc:
            raise ValueError("ill-conditioned unfolding fit") from exc
    return poly(E)


def bulk_spacings(unfolded, bulk: float = 0.8) -> np.ndarray:
    """Consecutive spacings among the central ``bulk`` fraction of levels."""
    u = np.sort(np.asarray(unfolded, dtype=float))
    if not 0 < bulk <= 1:
        raise ValueError("bulk must lie in (0, 1]")
    cut = int(round(u.size * (1 - bulk) / 2))
    core = u[cut : u.size - cut]
    return np.diff(core)


def spacing_ks(spacings, ref: SpacingReference) -> tuple[float, float]:
    """Two-sided Kolmogorov-Smirnov distance and p-value against ``ref``."""
    s = np.asarray(spacings, dtype=float)
    if s.size < 100:
        raise ValueError("need at least 100 spacings")
    res = stats.kstest(s, ref.cdf)
    return float(res.statistic), float(res.pvalue)


def direct_sum_gue_spacing(
    M: int, n_draws: int, rng: np.random.Generator, d: int = 100
) -> np.ndarray:
    """Central spacing of a direct sum of ``M`` independent GUE(d) blocks.

    Each draw concatenates the ``M`` spectra, sorts them and records the gap
    between the ``(d M / 2)``-th and ``(d M / 2 + 1)``-th levels.  Gaps are
    unfolded with the mean density ``M sqrt(4d - E^2) / (2 pi)`` of the
    direct sum at the gap midpoint.
    """
    if M < 1 or n_draws < 1 or d < 2:
        raise ValueError("require M >= 1, n_draws >= 1, d >= 2")
    k = (d * M) // 2
    out = np.empty(n_draws)
    for i in range(n_draws):
        levels = np.sort(np.concatenate([np.linalg.eigvalsh(gue_matrix(d, rng)) for _ in range(M)]))
        lo, hi = levels[k - 1], levels[k]
        mid = 0.5 * (lo + hi)
        rho = M * math.sqrt(max(4 * d - mid * mid, 0.0)) / (2 * math.pi)
        out[i] = (hi - lo) * rho
    return out


def porter_thomas_pdf(A, beta: int, N: int):
    """Chi-squared law of eigenvector intensities with mean ``1/N``.

    ``(beta N / 2)^{beta/2} A^{beta/2 - 1} exp(-beta N A / 2) / Gamma(beta/2)``.
    """
    A = np.asarray(A, dtype=float)
    if np.any(A < 0):
        raise ValueError("intensities are non-negative")
    if beta not in (1, 2, 4) or N < 1:
        raise ValueError("require beta in {1, 2, 4} and N >= 1")
    h = beta / 2
    with np.errstate(divide="ignore"):
        log_pdf = h * math.log(beta * N / 2) + (h - 1) * np.log(A) - beta * N * A / 2 - math.lgamma(h)
    return np.exp(log_pdf)


def histogram_table(samples, bins: int = 50, range_: Optional[tuple[float, float]] = None) -> np.ndarray:
    """Density histogram as rows ``(bin_left, bin_right, density)``."""
    dens, edges = np.histogram(np.asarray(samples, dtype=float), bins=bins, range=range_, density=True)
    return np.column_stack([edges[:-1], edges[1:], dens])


def write_histogram_csv(path: Optional[Union[str, Path]], table: np.ndarray) -> str:
    """Write a :func:`histogram_table` as CSV and return the text."""
    return write_csv(path, ["bin_left", "bin_right", "density"], [tuple(map(float, r)) for r in table])
