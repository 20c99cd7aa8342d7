"""Special-function kernels used by every closed-form formula.

Digamma and trigamma are evaluated by shifting the argument upward with the
functional recurrence and then summing the asymptotic (Stirling-type)
series.  Helpers for very large arguments are provided in terms of
``ln x`` so that differences of digamma values at huge dimensions can be
formed without cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "JacobiParams",
    "log_gamma",
    "digamma",
    "trigamma",
    "erfc",
    "log_binomial",
    "jacobi_poly",
    "jacobi_norm_log",
    "orthonormal_jacobi_functions",
    "digamma_minus_log",
    "digamma_diff",
    "digamma1p_from_log",
    "xtrigamma1p_minus_one_from_log",
    "trigamma1p_from_log",
]

_SHIFT = 10.0

# Bernoulli-number coefficients B_{2k}/(2k) of the digamma series and
# B_{2k} of the trigamma series, k = 1..7.
_PSI_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_PSI1_COEF = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
)


@dataclass(frozen=True)
class JacobiParams:
    """Degree and weight exponents of a Jacobi polynomial P_n^(alpha, beta).

    Parameters
    ----------
    n : int
        Nonnegative degree.
    alpha, beta : float
        Exponents of ``(1 - x)`` and ``(1 + x)`` in the weight, both >= -1.
    """

    n: int
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("Jacobi degree must be nonnegative")
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ValueError("Jacobi exponents must be finite")
        if self.alpha < -1 or self.beta < -1:
            raise ValueError("Jacobi exponents must be >= -1")


def _as_positive(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"{name} must be > 0")
    return arr


def _ret(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def log_gamma(x):
    """Natural logarithm of the gamma function for positive arguments.

    Parameters
    ----------
    x : float or array_like
        Positive argument(s).

    Returns
    -------
    float or ndarray
        ``ln Gamma(x)``.

    Raises
    ------
    ValueError
        If any argument is not strictly positive.
    """
    arr = _as_positive(x)
    return _ret(_sp.gammaln(arr), x)


def _shift_up(x: np.ndarray):
    """Shift arguments to ``>= _SHIFT``; return shifted x and the step counts."""
    x = x.copy()
    steps = np.zeros_like(x)
    small = x < _SHIFT
    while np.any(small):
        x[small] += 1.0
        steps[small] += 1.0
        small = x < _SHIFT
    return x, steps


def _psi_series_minus_log(z: np.ndarray) -> np.ndarray:
    """Asymptotic series for Psi(z) - ln z, valid for z >= _SHIFT."""
    inv2 = 1.0 / (z * z)
    acc = np.zeros_like(z)
    for c in reversed(_PSI_COEF):
        acc = acc * inv2 + c
    return -0.5 / z - acc * inv2


def _psi1_series(z: np.ndarray) -> np.ndarray:
    inv = 1.0 / z
    inv2 = inv * inv
    acc = np.zeros_like(z)
    for c in reversed(_PSI1_COEF):
        acc = acc * inv2 + c
    return inv + 0.5 * inv2 + acc * inv2 * inv


def _psi_shift_sum(x: np.ndarray, steps: np.ndarray, power: int) -> np.ndarray:
    """Sum_{k < steps} (x + k)^(-power) evaluated elementwise, smallest last."""
    total = np.zeros_like(x)
    kmax = int(steps.max()) if steps.size else 0
    for k in range(kmax - 1, -1, -1):
        active = steps > k
        total[active] += (x[active] + k) ** (-power)
    return total


def digamma(x):
    """Digamma function Psi(x) = d ln Gamma(x)/dx for x > 0.

    Parameters
    ----------
    x : float or array_like
        Positive argument(s).

    Returns
    -------
    float or ndarray
        Psi(x) with absolute error below 1e-12.
    """
    arr = np.atleast_1d(_as_positive(x)).astype(float)
    z, steps = _shift_up(arr)
    out = np.log(z) + _psi_series_minus_log(z) - _psi_shift_sum(arr, steps, 1)
    return _ret(out.reshape(np.shape(x)), x)


def trigamma(x):
    """Trigamma function Psi'(x) for x > 0.

    Parameters
    ----------
    x : float or array_like
        Positive argument(s).

    Returns
    -------
    float or ndarray
        Psi'(x) with absolute error below 1e-12.
    """
    arr = np.atleast_1d(_as_positive(x)).astype(float)
    z, steps = _shift_up(arr)
    out = _psi1_series(z) + _psi_shift_sum(arr, steps, 2)
    return _ret(out.reshape(np.shape(x)), x)


def digamma_minus_log(x):
    """Return Psi(x) - ln(x), accurate also for very large x."""
    arr = np.atleast_1d(_as_positive(x)).astype(float)
    out = np.empty_like(arr)
    big = arr >= _SHIFT
    out[big] = _psi_series_minus_log(arr[big])
    if np.any(~big):
        out[~big] = digamma(arr[~big]) - np.log(arr[~big])
    return _ret(out.reshape(np.shape(x)), x)


def digamma_diff(a, b):
    """Cancellation-free difference Psi(a) - Psi(b) for positive a, b."""
    a_arr = _as_positive(a, "a")
    b_arr = _as_positive(b, "b")
    out = np.log(a_arr / b_arr) + (digamma_minus_log(a_arr) - digamma_minus_log(b_arr))
    return _ret(np.asarray(out), a if np.ndim(a) else b)


_LARGE = 100.0
_LOG_LARGE = math.log(_LARGE)


def digamma1p_from_log(logd):
    """Psi(d + 1) for d = exp(logd) >= 1, without forming d when it is huge."""
    l = np.atleast_1d(np.asarray(logd, dtype=float))
    out = np.empty_like(l)
    big = l >= _LOG_LARGE
    e = np.exp(-l[big])
    # Psi(d+1) - ln d = 1/(2d) - 1/(12 d^2) + 1/(120 d^4) - 1/(252 d^6)
    e2 = e * e
    out[big] = l[big] + e * 0.5 - e2 * (1.0 / 12.0 - e2 * (1.0 / 120.0 - e2 / 252.0))
    if np.any(~big):
        out[~big] = digamma(np.exp(l[~big]) + 1.0)
    return _ret(out.reshape(np.shape(logd)), logd)


def xtrigamma1p_minus_one_from_log(logd):
    """d * Psi'(d + 1) - 1 for d = exp(logd) >= 1, stable for huge d."""
    l = np.atleast_1d(np.asarray(logd, dtype=float))
    out = np.empty_like(l)
    big = l >= _LOG_LARGE
    e = np.exp(-l[big])
    e2 = e * e
    out[big] = -0.5 * e + e2 * (1.0 / 6.0 - e2 * (1.0 / 30.0 - e2 * (1.0 / 42.0 - e2 / 30.0)))
    if np.any(~big):
        d = np.exp(l[~big])
        out[~big] = d * trigamma(d + 1.0) - 1.0
    return _ret(out.reshape(np.shape(logd)), logd)


def trigamma1p_from_log(logd):
    """Psi'(d + 1) for d = exp(logd) >= 1; underflows gracefully to 0."""
    l = np.atleast_1d(np.asarray(logd, dtype=float))
    out = np.empty_like(l)
    big = l >= _LOG_LARGE
    e = np.exp(-l[big])
    out[big] = e * (1.0 + xtrigamma1p_minus_one_from_log(l[big]))
    if np.any(~big):
        out[~big] = trigamma(np.exp(l[~big]) + 1.0)
    return _ret(out.reshape(np.shape(logd)), logd)


def erfc(x):
    """Complementary error function (double precision, any real argument)."""
    return _ret(np.asarray(_sp.erfc(np.asarray(x, dtype=float))), x)


def log_binomial(V, N):
    """Logarithm of the binomial coefficient C(V, N).

    Parameters
    ----------
    V : int
        Nonnegative total count.
    N : int or array_like of int
        Subset size(s); values outside ``[0, V]`` are allowed.

    Returns
    -------
    float or ndarray
        ``ln C(V, N)``, or ``-inf`` when ``N < 0`` or ``N > V`` so that the
        corresponding exponentiated dimension vanishes.
    """
    n = np.asarray(N, dtype=float)
    Vf = float(V)
    ok = (n >= 0) & (n <= Vf)
    nc = np.clip(n, 0.0, Vf)
    val = _sp.gammaln(Vf + 1.0) - _sp.gammaln(nc + 1.0) - _sp.gammaln(Vf - nc + 1.0)
    out = np.where(ok, val, -np.inf)
    return _ret(out, N)


def jacobi_poly(p: JacobiParams, x):
    """Evaluate P_n^(alpha, beta)(x) by the three-term recurrence.

    Parameters
    ----------
    p : JacobiParams
        Degree and exponents.
    x : float or array_like
        Points with ``|x| <= 1 + 1e-9``.

    Returns
    -------
    float or ndarray
        Polynomial values in the standard normalization
        ``P_n(1) = C(n + alpha, n)``.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(np.abs(xs) > 1 + 1e-9):
        raise ValueError("jacobi_poly requires |x| <= 1")
    a, b, n = float(p.alpha), float(p.beta), p.n
    p0 = np.ones_like(xs)
    if n == 0:
        return _ret(p0, x)
    p1 = (a + 1.0) + (a + b + 2.0) * (xs - 1.0) / 2.0
    # alpha^2 - beta^2 is formed as a product to avoid cancellation.
    amb_apb = (a - b) * (a + b)
    for k in range(2, n + 1):
        s = 2.0 * k + a + b
        c1 = 2.0 * k * (k + a + b) * (s - 2.0)
        c2 = (s - 1.0) * amb_apb
        c3 = (s - 2.0) * (s - 1.0) * s
        c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s
        p0, p1 = p1, ((c2 / c1) + (c3 / c1) * xs) * p1 - (c4 / c1) * p0
    return _ret(p1, x)


def jacobi_norm_log(n: int, alpha: float, beta: float) -> float:
    """Log of h_n = int_{-1}^{1} (1-x)^alpha (1+x)^beta P_n(x)^2 dx."""
    a, b = float(alpha), float(beta)
    s = 2 * n + a + b + 1.0
    return (
        (a + b + 1.0) * math.log(2.0)
        - math.log(s)
        + math.lgamma(n + a + 1.0)
        + math.lgamma(n + b + 1.0)
        - math.lgamma(n + a + b + 1.0)
        - math.lgamma(n + 1.0)
    )


def orthonormal_jacobi_functions(nmax: int, alpha: float, beta: float, x) -> np.ndarray:
    """Weighted orthonormal Jacobi functions on [-1, 1].

    Returns ``phi[k] = sqrt(w(x) / h_k) P_k^(alpha, beta)(x)`` for
    ``k < nmax`` with ``w(x) = (1-x)^alpha (1+x)^beta``, so that
    ``int phi_k phi_l dx = delta_kl``.  The recurrence runs on the
    orthonormal polynomials with a per-point logarithmic scale, which keeps
    the computation finite for exponents in the thousands.

    Parameters
    ----------
    nmax : int
        Number of functions to return.
    alpha, beta : float
        Nonnegative weight exponents.
    x : array_like
        Points in [-1, 1].

    Returns
    -------
    ndarray
        Array of shape ``(nmax,) + x.shape``.
    """
    xs = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), -1.0, 1.0)
    a, b = float(alpha), float(beta)
    out = np.zeros((nmax,) + xs.shape)
    if nmax == 0:
        return out.reshape((nmax,) + np.shape(x))
    with np.errstate(divide="ignore"):
        scale = (
            _sp.xlogy(a / 2.0, 1.0 - xs)
            + _sp.xlogy(b / 2.0, 1.0 + xs)
            - 0.5 * jacobi_norm_log(0, a, b)
        )
    dead = ~np.isfinite(scale)
    scale = np.where(dead, 0.0, scale)
    q_prev = np.zeros_like(xs)
    q_cur = np.where(dead, 0.0, 1.0)

    def a_coef(k: int) -> float:
        s = 2.0 * k + a + b
        return 2.0 / s * math.sqrt(k * (k + a) * (k + b) * (k + a + b) / ((s - 1.0) * (s + 1.0)))

    def b_coef(k: int) -> float:
        if k == 0:
            return (b - a) / (a + b + 2.0)
        s = 2.0 * k + a + b
        return (b - a) * (b + a) / (s * (s + 2.0))

    out[0] = q_cur * np.exp(scale)
    a_k = 0.0
    for k in range(nmax - 1):
        a_next = a_coef(k + 1)
        q_next = ((xs - b_coef(k)) * q_cur - a_k * q_prev) / a_next
        q_prev, q_cur, a_k = q_cur, q_next, a_next
        big = np.abs(q_cur) > 1e150
        if np.any(big):
            q_cur[big] *= 1e-150
            q_prev[big] *= 1e-150
            scale[big] += 150.0 * math.log(10.0)
        with np.errstate(under="ignore"):
            out[k + 1] = q_cur * np.exp(scale)
    return out.reshape((nmax,) + np.shape(x))
