"""Large-V expansions and their double-scaling resolutions.

Kronecker-delta terms of the fixed-parameter expansions fire only on exact
equality of the arguments (``f == 0.5`` and so on).  Neighborhoods of those
critical points are covered by the resolved functions, which depend on
zoom coordinates such as ``f = 1/2 + Lambda_f / sqrt(V)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate
from scipy import special as _sp

from . import specfun as sf
from .closedform import sector_sum_average

__all__ = [
    "ScalingPoint",
    "page_thermo",
    "fixedN_thermo",
    "fixedN_variance_thermo",
    "page_weighted_thermo",
    "page_weighted_variance_thermo",
    "gaussian_thermo",
    "gaussian_fixedN_thermo",
    "gaussian_weighted_thermo",
    "gaussian_weighted_variance_thermo",
    "page_resolved",
    "page_b",
    "page_c",
    "page_weighted_resolved",
    "weighted_resolved_integrals",
    "gaussian_weighted_center",
    "gaussian_weighted_line",
    "gaussian_weighted_center_expansion",
    "gaussian_weighted_line_expansion",
    "bosonic_log_dims",
    "bosonic_fixedN_exact",
    "bosonic_fixedN_thermo",
]

LN2 = math.log(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ScalingPoint:
    """Evaluation point of an expansion, optionally in zoom coordinates.

    ``V = None`` stands for the limit itself.  When ``lambda_f`` or
    ``lambda_n`` are set they encode ``f = 1/2 + lambda_f / V**a`` and
    ``n = 1/2 + lambda_n / V**b`` with the exponents fixed by the operation.
    """

    V: Optional[float]
    f: float
    n: float
    lambda_f: Optional[float] = None
    lambda_n: Optional[float] = None

    def __post_init__(self) -> None:
        if not (0 < self.f < 1 and 0 < self.n):
            raise ValueError("require 0 < f < 1 and n > 0")


def _fold(x: float) -> float:
    return 1.0 - x if x > 0.5 else x


def _delta(x: float) -> float:
    return 1.0 if x == 0.5 else 0.0


def _xlnx(x: float) -> float:
    return x * math.log(x) if x > 0 else 0.0


def _check_open(name: str, x: float) -> None:
    if not 0 < x < 1:
        raise ValueError(f"{name} must lie in (0, 1)")


# ---------------------------------------------------------------------------
# General states
# ---------------------------------------------------------------------------


def page_thermo(V: float, f: float) -> tuple[float, float]:
    """Large-V mean and variance of the entropy of Haar-random states.

    Returns
    -------
    tuple of float
        ``(f V ln 2 - 2^{-|1-2f| V - 1},
        (1/2 - delta_{f,1/2}/4) 2^{-(1 + |1-2f|) V})`` with ``f`` folded to
        ``<= 1/2``.
    """
    _check_open("f", f)
    g = abs(1.0 - 2.0 * f)
    fm = min(f, 1.0 - f)
    mean = fm * V * LN2 - 2.0 ** (-g * V - 1.0)
    var = (0.5 - 0.25 * _delta(f)) * 2.0 ** (-(1.0 + g) * V)
    return mean, var


def _volume_coefficient(n: float) -> float:
    """Binary entropy ``-n ln n - (1-n) ln(1-n)`` of the filling."""
    return -_xlnx(n) - _xlnx(1.0 - n)


def fixedN_thermo(V: float, f: float, n: float) -> float:
    """Large-V average at fixed filling ``n`` including the delta terms."""
    _check_open("f", f)
    _check_open("n", n)
    df, dn = _delta(f), _delta(n)
    f, n = _fold(f), _fold(n)
    root = math.sqrt(n * (1 - n) / (2 * math.pi)) * abs(math.log((1 - n) / n))
    return (
        _volume_coefficient(n) * f * V
        - root * df * math.sqrt(V)
        + 0.5 * (f + math.log1p(-f))
        - 0.5 * df * dn
    )


def fixedN_variance_thermo(V: float, f: float, n: float) -> float:
    """Exponentially small large-V variance ``alpha V^{3/2} e^{-beta V}``."""
    _check_open("f", f)
    _check_open("n", n)
    df = _delta(f)
    f, n = _fold(f), _fold(n)
    alpha = (
        math.sqrt(2 * math.pi)
        * (f * (1 - f) - df / (2 * math.pi))
        * math.log(n / (1 - n)) ** 2
        * (n * (1 - n)) ** 1.5
    )
    beta = _volume_coefficient(n)
    return alpha * V**1.5 * math.exp(-beta * V)


def page_weighted_thermo(V: float, f: float, nbar: float) -> float:
    """Large-V average over sectors weighted binomially around ``nbar``."""
    _check_open("f", f)
    _check_open("nbar", nbar)
    df, dn = _delta(f), _delta(nbar)
    f, n = _fold(f), _fold(nbar)
    root = math.sqrt(n * (1 - n) / (2 * math.pi)) * abs(math.log((1 - n) / n))
    return (
        _volume_coefficient(n) * f * V
        - root * df * math.sqrt(V)
        + 0.5 * math.log1p(-f)
        - 2.0 / math.pi * df * dn
    )


def page_weighted_variance_thermo(V: float, f: float, nbar: float) -> float:
    """Leading ``O(V)`` variance at fixed weight parameter.

    Equals ``V nbar (1 - nbar) (d s / d nbar)^2`` with ``s = f H(nbar)`` the
    volume-law coefficient, hence quadratic in ``f``.  The exact sector sums
    confirm the ``f^2`` dependence.
    """
    _check_open("f", f)
    _check_open("nbar", nbar)
    f, n = _fold(f), nbar
    return n * (1 - n) * math.log(n / (1 - n)) ** 2 * f * f * V


# ---------------------------------------------------------------------------
# Gaussian states
# ---------------------------------------------------------------------------


def gaussian_thermo(V: float, f: float) -> float:
    """Large-V average for Gaussian states with arbitrary particle number."""
    _check_open("f", f)
    f = _fold(f)
    l1f = math.log1p(-f)
    return V * ((LN2 - 1.0) * f + (f - 1.0) * l1f) + 0.5 * f + 0.25 * l1f


def gaussian_fixedN_thermo(V: float, f: float, n: float) -> float:
    """Large-V average for Gaussian states at fixed filling, error ``O(V^-3)``."""
    _check_open("f", f)
    _check_open("n", n)
    a, b = _fold(f), _fold(n)
    f, n = min(a, b), max(a, b)
    lead = (f - 1.0) * math.log1p(-f) + f * ((n - 1.0) * math.log1p(-n) - n * math.log(n) - 1.0)
    corr = f * (1.0 - f + n * (1.0 - n)) / (12.0 * (1.0 - f) * (1.0 - n) * n)
    return lead * V + corr / V


def gaussian_weighted_thermo(V: float, f: float, nbar: float) -> float:
    """Large-V average of Gaussian states at fixed weight parameter.

    The branch (``f < nbar``, ``nbar < f``, ``f == nbar < 1/2`` or
    ``f == nbar == 1/2``) is chosen by exact comparison after folding both
    arguments to ``<= 1/2``.  Terms through ``1/V`` are included.
    """
    _check_open("f", f)
    _check_open("nbar", nbar)
    f, n = _fold(f), _fold(nbar)
    l1f = math.log1p(-f)
    if f < n:
        lead = (f - 1) * l1f + f * ((n - 1) * math.log1p(-n) - 1 - n * math.log(n))
        return lead * V - f / 2 + (f - 2) * f / (12 * (f - 1)) / V
    if n < f:
        lead = (f - 1) * n * l1f - n * (1 + f * math.log(f)) + (n - 1) * math.log1p(-n)
        return lead * V - n / 2 + n * (1 - f + f * f) / (12 * f * (1 - f)) / V
    if f < 0.5:
        lead = (f * f - 1) * l1f - f * (1 + f * math.log(f))
        return (
            lead * V
            - f / 2
            + math.sqrt((1 - f) * f / (18 * math.pi)) / math.sqrt(V)
            + (1 + f) / (24 * (1 - f)) / V
        )
    return (LN2 - 0.5) * V - 0.25 + 1.0 / (3 * _SQRT2PI) / math.sqrt(V) + 0.125 / V


def gaussian_weighted_variance_thermo(V: float, f: float, nbar: float) -> float:
    """Leading ``O(V)`` variance of Gaussian states at fixed weight parameter.

    Equals ``V nbar (1 - nbar) (d s / d nbar)^2`` with ``s`` the volume-law
    coefficient of :func:`gaussian_weighted_thermo`.
    """
    _check_open("f", f)
    _check_open("nbar", nbar)
    f, n = _fold(f), nbar
    if f <= n:
        slope = f * math.log(n / (1 - n))
    else:
        slope = math.log1p(-n) - (1 - f) * math.log1p(-f) - f * math.log(f)
    return n * (1 - n) * slope * slope * V


# ---------------------------------------------------------------------------
# Resolved forms, general states
# ---------------------------------------------------------------------------


def _log_erfc(z: float) -> float:
    if z > 0:
        return math.log(_sp.erfcx(z)) - z * z
    return math.log(_sp.erfc(z))


def _page_edge_terms(V: float, f: float, n: float) -> float:
    """The two ``2^{+-V(2f-1)} e^{V(1-2n)^2/2} erfc(...)`` terms (n < 1/2)."""
    g = 1.0 - 2.0 * n
    total = 0.0
    for sign in (1.0, -1.0):
        z = math.sqrt(V) * (g * g - sign * LN2 * (1 - 2 * f)) / (math.sqrt(2.0) * g)
        log_t = (sign * V * (2 * f - 1) - 2) * LN2 + V * g * g / 2 + _log_erfc(z)
        total += math.exp(log_t)
    return total


def page_resolved(V: float, f: float, n: float) -> float:
    """Average at fixed N with the critical region around f = 1/2 resolved.

    Parameters
    ----------
    V : float
        Number of modes.
    f, n : float
        Subsystem fraction and filling, folded to ``(0, 1/2]``.

    Returns
    -------
    float
        Volume term, constant term, the erfc-smoothed ``sqrt(V)`` term
        controlled by ``Delta N = -V (1-2f) L / (2 ln((1-n)/n))`` with
        ``L = n ln n + (1-n) ln(1-n)``, and the two exponentially weighted
        erfc terms that produce the ``-1/2`` correction at ``f = n = 1/2``.

    Raises
    ------
    ValueError
        At ``f = n = 1/2`` exactly, where the double-scaling form
        :func:`page_c` applies instead.
    """
    _check_open("f", f)
    _check_open("n", n)
    f, n = _fold(f), _fold(n)
    L = _xlnx(n) + _xlnx(1.0 - n)
    base = -V * f * L + 0.5 * f + 0.5 * math.log1p(-f)
    if n == 0.5:
        if f == 0.5:
            raise ValueError("f = n = 1/2 requires the double-scaling form page_c")
        return base - 2.0 ** (V * (2 * f - 1) - 1)
    lr = math.log((1 - n) / n)
    dN = -V * (1 - 2 * f) * L / (2 * lr)
    var = n * (1 - n) * V
    mid = -0.5 * V * (1 - 2 * f) * L * _sp.erfc(math.sqrt(2.0 / var) * dN) + math.sqrt(
        var / (2 * math.pi)
    ) * math.log(n / (1 - n)) * math.exp(-2 * dN * dN / var)
    return base + mid - _page_edge_terms(V, f, n)


def page_b(lambda_f: float, n: float) -> float:
    """Coefficient ``b`` of ``-b sqrt(V)`` for ``f = 1/2 + lambda_f/sqrt(V)``."""
    _check_open("n", n)
    L = _xlnx(n) + _xlnx(1.0 - n)
    lr = abs(math.log((1 - n) / n))
    if lr == 0.0:
        return 0.0
    s = math.sqrt(n * (1 - n))
    lam = abs(lambda_f)
    return lam * L * _sp.erfc(-math.sqrt(2.0) * lam * L / (s * lr)) + s / _SQRT2PI * lr * math.exp(
        -2.0 * lambda_f**2 * L * L / (s * s * lr * lr)
    )


def page_c(lambda_f: float, lambda_n: float) -> float:
    """Constant term near ``f = n = 1/2`` in the zoom ``f = 1/2 + lambda_f/V``,
    ``n = 1/2 + lambda_n/sqrt(V)`` (``lambda_n != 0``).

    ``e^{2 lambda_n^2} 4^{+-lambda_f} erfc(z_+-)`` is evaluated as
    ``erfcx(z_+-) exp(-(lambda_f ln 2)^2 / (2 lambda_n^2))`` in log space.
    """
    if lambda_n == 0:
        raise ValueError("lambda_n must be nonzero")
    ln2f = lambda_f * LN2
    an = abs(lambda_n)
    log_damp = -(ln2f**2) / (2 * lambda_n**2)
    bracket = 0.0
    for z in ((2 * lambda_n**2 + ln2f) / (math.sqrt(2.0) * an), (2 * lambda_n**2 - ln2f) / (math.sqrt(2.0) * an)):
        # erfcx overflows for very negative z, where erfc itself is finite
        log_t = math.log(_sp.erfcx(z)) if z > 0 else math.log(_sp.erfc(z)) + z * z
        bracket += math.exp(log_t + log_damp)
    return 0.25 * (2 * LN2 - 1 + bracket)


def weighted_resolved_integrals(V: float, f: float, w: float) -> tuple[float, float, float, float]:
    """The four delta-integrals entering :func:`page_weighted_resolved`.

    Returns
    -------
    tuple of float
        ``(I_exp, I_+, I_-, I_L)`` including their prefactors
        ``4/pi``, ``2^{V(2f-1)}`` and ``2^{V(1-2f)}``.  At ``f = 1/2`` and
        ``w = 0`` they equal ``(1/pi, 1/(2 pi), 1/(2 pi), 0)``.

    Raises
    ------
    RuntimeError
        If a quadrature does not reach the requested tolerance.
    """
    _check_open("f", f)
    f = _fold(f)
    a = LN2 * V * (1.0 - 2.0 * f)
    c = math.sqrt(V) * w
    shift = c * c / 8.0

    def tilt(d: float) -> float:
        # e^{-V w^2/8} cosh(sqrt(V) w d) without overflow
        return 0.5 * (math.exp(c * d - shift) + math.exp(-c * d - shift))

    def quad(fun) -> float:
        val, err = integrate.quad(fun, 0.0, 10.0, epsabs=1e-10, epsrel=1e-10, limit=400)
        if not err < 1e-8:
            raise RuntimeError(f"quadrature did not converge (error estimate {err})")
        return val

    def g_exp(d: float) -> float:
        if d == 0.0:
            return 0.0
        return math.exp(-2 * d * d - a * a / (8 * d * d)) * tilt(d) * d

    def g_edge(sign: float):
        def g(d: float) -> float:
            if d == 0.0:
                return tilt(0.0) * (2.0 if sign > 0 or a == 0 else 0.0) / _SQRT2PI
            z = (4 * d * d - sign * a) / (math.sqrt(8.0) * d)
            return tilt(d) * _sp.erfc(z) / _SQRT2PI

        return g

    def g_log(d: float) -> float:
        if d == 0.0 or a == 0.0:
            return 0.0
        return 2 * math.sqrt(2 / math.pi) * math.exp(-2 * d * d) * tilt(d) * 0.5 * a * _sp.erfc(
            a / (math.sqrt(8.0) * d)
        )

    return (
        4.0 / math.pi * quad(g_exp),
        math.exp(-a) * quad(g_edge(1.0)),
        math.exp(a) * quad(g_edge(-1.0)),
        quad(g_log),
    )


def page_weighted_resolved(V: float, f: float, w: float) -> float:
    """Weighted average in the regime ``w = O(V^{-1/2})``, ``1 - 2f = O(1/V)``.

    The binomial average of :func:`page_resolved` reduces to
    one-dimensional integrals over ``delta = sqrt(V) |1/2 - n|``::

        <S>_w = V f ln2 + ln(1-f)/2 - V (1 - 2 nbar)^2 / 4 - I_exp - I_+ - I_- + I_L

    with the integrals from :func:`weighted_resolved_integrals`.  ``I_L`` is
    the average of the ``(a/2) erfc(a / (sqrt 8 delta))`` term with
    ``a = ln2 V (1 - 2f)``, which stays of order one in this regime.  At
    ``f = 1/2``, ``w = 0`` the result is ``V ln2 / 2 - ln2 / 2 - 2/pi``.
    """
    _check_open("f", f)
    f = _fold(f)
    nbar = 1.0 / (1.0 + math.exp(w))
    i_exp, i_plus, i_minus, i_log = weighted_resolved_integrals(V, f, w)
    return (
        V * f * LN2
        + 0.5 * math.log1p(-f)
        - V * (1 - 2 * nbar) ** 2 / 4
        - i_exp
        - i_plus
        - i_minus
        + i_log
    )


# ---------------------------------------------------------------------------
# Resolved forms, Gaussian states
# ---------------------------------------------------------------------------


def gaussian_weighted_center(lambda_f: float, lambda_n: float) -> float:
    """Nonanalytic part of the ``1/sqrt(V)`` coefficient near ``f = nbar = 1/2``.

    Zoom: ``f = 1/2 + lambda_f/sqrt(V)``, ``nbar = 1/2 + lambda_n/sqrt(V)``.
    """
    s = abs(lambda_f) + abs(lambda_n)
    d = abs(lambda_f) - abs(lambda_n)
    ad = abs(d)
    r2 = math.sqrt(2.0)
    return (
        math.sqrt(2 / math.pi) * (math.exp(-2 * d * d) * (1 + 2 * d * d) + math.exp(-2 * s * s) * (1 + 2 * s * s))
        - s * (3 + 4 * s * s) * _sp.erfc(r2 * s)
        - ad * (3 + 4 * d * d) * _sp.erfc(r2 * ad)
    ) / 12.0


def gaussian_weighted_line(f: float, lambda_n: float) -> float:
    """Nonanalytic part of the ``1/sqrt(V)`` coefficient near ``nbar = f``.

    Zoom: ``nbar = f + lambda_n / sqrt(V)`` with ``0 < f <= 1/2``.  Equals
    ``sqrt(f(1-f)/(18 pi))`` at ``lambda_n = 0`` and vanishes as
    ``|lambda_n| -> infinity``.
    """
    if not 0 < f <= 0.5:
        raise ValueError("require 0 < f <= 1/2")
    lam = lambda_n
    al = abs(lam)
    g = f * (1 - f)
    gauss = math.exp(-lam * lam / (2 * g)) * (
        2 * f**2.5 - 2 * f**1.5 - math.sqrt(f) * lam * lam
    ) / (6 * math.sqrt(1 - f) * f * _SQRT2PI)
    tail = al * (3 * g + lam * lam) * _sp.erfc(al / math.sqrt(2 * g)) / (12 * g)
    return -(gauss + tail)


def gaussian_weighted_line_expansion(V: float, f: float, lambda_n: float) -> float:
    """Weighted Gaussian average through ``1/sqrt(V)`` at ``nbar = f + lambda_n/sqrt(V)``."""
    if not 0 < f < 0.5:
        raise ValueError("require 0 < f < 1/2")
    lam = lambda_n
    l1f = math.log1p(-f)
    sv = math.sqrt(V)
    lead = ((f * f - 1) * l1f - f * (1 + f * math.log(f))) * V
    root = lam * f * (l1f - math.log(f)) * sv
    const = -0.5 * (lam * lam / (1 - f) + f)
    if lam > 0:
        kink = lam**3 * (1 - 2 * f) / (6 * f * (1 - f) ** 2)
    elif lam < 0:
        kink = -lam / 6.0 * (3 + lam * lam / (1 - f) ** 2)
    else:
        kink = 0.0
    return lead + root + const + (kink + gaussian_weighted_line(f, lam)) / sv


def gaussian_weighted_center_expansion(V: float, lambda_f: float, lambda_n: float) -> float:
    """Weighted Gaussian average through ``1/sqrt(V)`` near ``f = nbar = 1/2``."""
    a2, b2 = lambda_f**2, lambda_n**2
    big = max(abs(lambda_f), abs(lambda_n))
    kink = big / 6.0 * (3 + 12 * min(a2, b2) + 4 * max(a2, b2))
    return (
        (LN2 - 0.5) * V
        - (0.25 + a2 + b2)
        + (kink + gaussian_weighted_center(lambda_f, lambda_n)) / math.sqrt(V)
    )


# ---------------------------------------------------------------------------
# Bosons
# ---------------------------------------------------------------------------


def _log_multiset(k: int, m) -> np.ndarray:
    """ln C(m + k - 1, m): ways to put m bosons into k modes."""
    m = np.asarray(m, dtype=float)
    if k == 0:
        return np.where(m == 0, 0.0, -np.inf)
    return np.where(
        m >= 0,
        _sp.gammaln(m + k) - _sp.gammaln(m + 1) - _sp.gammaln(float(k)),
        -np.inf,
    )


def bosonic_log_dims(V: int, V_A: int, N: int):
    """Log-dimensions ``(ln d_A(N_A), ln d_B(N - N_A), ln d_N)`` for bosons."""
    if not 0 <= V_A <= V or V < 1 or N < 0:
        raise ValueError("require 0 <= V_A <= V, V >= 1, N >= 0")
    n_a = np.arange(N + 1)
    return (
        _log_multiset(V_A, n_a),
        _log_multiset(V - V_A, N - n_a),
        float(_log_multiset(V, N)),
    )


def bosonic_fixedN_exact(V: int, V_A: int, N: int) -> float:
    """Exact average for ``N`` bosons in ``V`` modes, sector decomposition."""
    return sector_sum_average(*bosonic_log_dims(V, V_A, N))


def bosonic_fixedN_thermo(V: float, f: float, n: float, positive_root: bool = False) -> float:
    """Large-V bosonic average at density ``n = N/V`` (unbounded above).

    The ``f = 1/2`` square-root term defaults to
    ``-sqrt(V n (1+n) / (2 pi)) ln(1 + 1/n)``, which the exact sector sums
    approach with an ``O(V^{-1/2})`` residual.  ``positive_root=True`` uses
    ``+sqrt(V (n+n^2) / (8 pi)) ln(1 + 1/n)`` instead, a form that the exact
    sums do not support.
    """
    _check_open("f", f)
    if n <= 0:
        raise ValueError("n must be positive")
    df = _delta(f)
    f = _fold(f)
    vol = n * math.log1p(1.0 / n) + math.log1p(n)
    if positive_root:
        root = math.sqrt((n + n * n) / (8 * math.pi)) * math.log1p(1.0 / n)
    else:
        root = -math.sqrt((n + n * n) / (2 * math.pi)) * math.log1p(1.0 / n)
    return f * V * vol + root * math.sqrt(V) * df + 0.5 * (f + math.log1p(-f))
