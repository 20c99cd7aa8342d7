"""Random state samplers and a reproducible Monte Carlo harness.

Every sampler takes an explicit :class:`numpy.random.Generator`.  Parallel
estimates obtain their generators from :class:`SeededRng`, keyed by the pair
``(master_seed, stream_id)``, so results do not depend on scheduling.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Any, Callable, Optional

import numpy as np
from scipy.linalg import solve_triangular

from .entropy import (
    GaussianStateRep,
    PureStateVector,
    RdmSpectrum,
    rdm_spectrum_blocked,
    sector_basis,
)

__all__ = [
    "SeededRng",
    "EntropyEstimate",
    "haar_unitary",
    "haar_orthogonal",
    "haar_isometry",
    "sample_haar_state",
    "sample_sector_state",
    "sample_gaussian_state",
    "sample_gaussian_subsystem",
    "sample_gaussian_fixedN",
    "sample_gaussian_fixedN_subsystem",
    "bosonic_sector_basis",
    "sample_bosonic_sector_state",
    "bosonic_rdm_spectrum",
    "mc_estimate",
    "default_workers",
]

MAX_FULL_MODES = 26
MAX_SECTOR_DIM = 1 << 26
WORKERS_ENV = "ENTANGLEMENT_WORKERS"


@dataclass(frozen=True)
class SeededRng:
    """Counter-based random stream identified by ``(master_seed, stream_id)``."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= v < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        """Fresh Philox generator; equal keys give identical draws."""
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class EntropyEstimate:
    """Sample mean of a statistic with its standard error."""

    mean: float
    stderr: float
    sample_variance: float
    n_samples: int
    master_seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_samples < 2:
            raise ValueError("an estimate needs at least two samples")

    def z_score(self, reference: float) -> float:
        """``(mean - reference) / stderr``; infinite if stderr vanishes."""
        diff = self.mean - reference
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.stderr


# ---------------------------------------------------------------------------
# Haar matrices
# ---------------------------------------------------------------------------


def _ginibre(rng: np.random.Generator, rows: int, cols: int, complex_: bool) -> np.ndarray:
    if complex_:
        return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2)
    return rng.standard_normal((rows, cols))


def _qr_haar(Z: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    # absorb the phases of diag(R) so the law of Q is exactly Haar
    ph = d / np.abs(d)
    return Q * ph[np.newaxis, :]


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary via QR of a complex Ginibre matrix."""
    if d < 1:
        raise ValueError("d must be positive")
    return _qr_haar(_ginibre(rng, d, d, True))


def haar_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``d x d`` orthogonal matrix (full group O(d))."""
    if d < 1:
        raise ValueError("d must be positive")
    return _qr_haar(_ginibre(rng, d, d, False))


def haar_isometry(d: int, k: int, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    """First ``k`` columns of a Haar unitary (or orthogonal) ``d x d`` matrix."""
    if not 0 <= k <= d:
        raise ValueError("require 0 <= k <= d")
    if k == 0:
        return np.zeros((d, 0), dtype=float if real else complex)
    return _qr_haar(_ginibre(rng, d, k, not real))


# ---------------------------------------------------------------------------
# State samplers
# ---------------------------------------------------------------------------


def _unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = _ginibre(rng, dim, 1, True)[:, 0]
    return z / np.linalg.norm(z)


def sample_haar_state(V: int, rng: np.random.Generator) -> PureStateVector:
    """Uniformly random pure state on ``V`` modes (dimension ``2**V``)."""
    if not 1 <= V <= MAX_FULL_MODES:
        raise ValueError(f"V must lie in [1, {MAX_FULL_MODES}]")
    return PureStateVector(_unit_vector(rng, 2**V), V)


def sample_sector_state(
    V: int, N: int, rng: np.random.Generator, basis: Optional[np.ndarray] = None
) -> PureStateVector:
    """Uniformly random pure state in the sector with ``N`` particles.

    ``basis`` may be passed to reuse a precomputed :func:`sector_basis`.
    """
    if not 0 <= N <= V:
        raise ValueError("N must lie in [0, V]")
    if math.comb(V, N) > MAX_SECTOR_DIM:
        raise ValueError("sector dimension too large")
    if basis is None:
        basis = sector_basis(V, N)
    return PureStateVector(_unit_vector(rng, basis.size), V, N, basis)


def sample_gaussian_state(V: int, rng: np.random.Generator) -> GaussianStateRep:
    """Random pure Gaussian state ``J = M^T J0 M`` with ``M`` Haar in O(2V)."""
    if V < 1:
        raise ValueError("V must be positive")
    M = haar_orthogonal(2 * V, rng)
    J = M.T @ _apply_J0(M)
    return GaussianStateRep(0.5 * (J - J.T), "J")


def _apply_J0(M: np.ndarray) -> np.ndarray:
    """``canonical_J0(V) @ M`` as a row permutation with signs."""
    out = np.empty_like(M)
    out[0::2] = M[1::2]
    out[1::2] = -M[0::2]
    return out


def sample_gaussian_subsystem(V: int, V_A: int, rng: np.random.Generator) -> np.ndarray:
    """Restricted complex structure ``J_A`` of :func:`sample_gaussian_state`.

    Only the first ``2 V_A`` columns of the Haar orthogonal matrix enter
    ``J_A = M_A^T J0 M_A``.  They are ``M_A = G L^{-T}`` for a Gaussian
    ``2V x 2V_A`` matrix ``G`` with Cholesky factor ``G^T G = L L^T``, which
    is the QR factor with positive diagonal and hence exactly Haar.  The
    draw costs ``O(V V_A^2)`` instead of ``O(V^3)``.
    """
    if not 0 <= V_A <= V or V < 1:
        raise ValueError("require V >= 1 and 0 <= V_A <= V")
    if V_A == 0:
        return np.zeros((0, 0))
    G = rng.standard_normal((2 * V, 2 * V_A))
    L = np.linalg.cholesky(G.T @ G)
    X = solve_triangular(L, G.T @ _apply_J0(G), lower=True)
    J_A = solve_triangular(L, X.T, lower=True).T
    return 0.5 * (J_A - J_A.T)


def sample_gaussian_fixedN_subsystem(V: int, N: int, V_A: int, rng: np.random.Generator) -> np.ndarray:
    """Block ``C_A`` of :func:`sample_gaussian_fixedN` for the first ``V_A`` modes.

    With a complex Gaussian ``V x N`` matrix ``G`` the Haar isometry is
    ``G (G^dagger G)^{-1/2}`` up to a right unitary, so
    ``C_A = G_A (G^dagger G)^{-1} G_A^dagger`` needs only a Cholesky solve.
    """
    if not 0 <= N <= V or not 0 <= V_A <= V or V < 1:
        raise ValueError("require V >= 1, 0 <= N <= V and 0 <= V_A <= V")
    if N == 0 or V_A == 0:
        return np.zeros((V_A, V_A), dtype=complex)
    G = _ginibre(rng, V, N, True)
    L = np.linalg.cholesky(G.conj().T @ G)
    X = solve_triangular(L, G[:V_A].conj().T, lower=True)
    C_A = X.conj().T @ X
    return 0.5 * (C_A + C_A.conj().T)


def sample_gaussian_fixedN(V: int, N: int, rng: np.random.Generator) -> GaussianStateRep:
    """Random Gaussian state with ``N`` particles.

    Returns ``C = U^dagger diag(1_N, 0) U`` for Haar ``U``, assembled from the
    ``N`` rows of ``U`` that survive the projection.
    """
    if not 0 <= N <= V or V < 1:
        raise ValueError("require V >= 1 and 0 <= N <= V")
    Q = haar_isometry(V, N, rng)
    C = Q @ Q.conj().T
    return GaussianStateRep(0.5 * (C + C.conj().T), "C")


def bosonic_sector_basis(V: int, N: int) -> np.ndarray:
    """Occupation vectors of ``N`` bosons on ``V`` modes, shape ``(d_N, V)``."""
    if V < 1 or N < 0:
        raise ValueError("require V >= 1 and N >= 0")
    rows = []
    for combo in combinations_with_replacement(range(V), N):
        occ = np.zeros(V, dtype=np.int64)
        np.add.at(occ, list(combo), 1)
        rows.append(occ)
    return np.array(rows, dtype=np.int64).reshape(-1, V)


def sample_bosonic_sector_state(V: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random amplitudes over :func:`bosonic_sector_basis` ``(V, N)``."""
    dim = math.comb(N + V - 1, N)
    if dim > MAX_SECTOR_DIM:
        raise ValueError("sector dimension too large")
    return _unit_vector(rng, dim)


def bosonic_rdm_spectrum(amplitudes: np.ndarray, basis: np.ndarray, V_A: int) -> RdmSpectrum:
    """Reduced spectrum of the first ``V_A`` bosonic modes, blocked by ``N_A``."""
    a_keys = [tuple(r) for r in basis[:, :V_A]]
    b_keys = [tuple(r) for r in basis[:, V_A:]]
    return rdm_spectrum_blocked(amplitudes, a_keys, b_keys, basis[:, :V_A].sum(axis=1))


# ---------------------------------------------------------------------------
# Monte Carlo harness
# ---------------------------------------------------------------------------


def default_workers() -> int:
    """Worker count from ``$ENTANGLEMENT_WORKERS`` (default 1)."""
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


def _run_chunk(
    chunk: int,
    size: int,
    sampler: Callable[[np.random.Generator], Any],
    statistic: Callable[[Any], float],
    master_seed: int,
) -> tuple[int, float, float]:
    rng = SeededRng(master_seed, chunk).generator()
    count, mean, m2 = 0, 0.0, 0.0
    try:
        for _ in range(size):
            x = float(statistic(sampler(rng)))
            count += 1
            delta = x - mean
            mean += delta / count
            m2 += delta * (x - mean)
    except Exception as exc:
        raise RuntimeError(f"sampling failed in chunk {chunk}: {exc}") from exc
    return count, mean, m2


def mc_estimate(
    sampler: Callable[[np.random.Generator], Any],
    statistic: Callable[[Any], float],
    n_samples: int,
    master_seed: int,
    n_workers: Optional[int] = None,
    chunk_size: int = 64,
) -> EntropyEstimate:
    """Monte Carlo mean and standard error of ``statistic(sampler(rng))``.

    Parameters
    ----------
    sampler : callable
        Draws one object from a :class:`numpy.random.Generator`.
    statistic : callable
        Maps a drawn object to a float.
    n_samples : int
        Total number of draws, at least 2.
    master_seed : int
        Key shared by all chunk streams.
    n_workers : int, optional
        Thread count; defaults to :func:`default_workers`.
    chunk_size : int
        Draws per chunk.  Chunk ``c`` uses ``SeededRng(master_seed, c)``.

    Returns
    -------
    EntropyEstimate
        Chunk accumulators are merged in ascending chunk order, so the result
        is bit-identical for every ``n_workers``.

    Raises
    ------
    RuntimeError
        If the sampler or statistic fails; the message names the chunk.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    workers = default_workers() if n_workers is None else max(1, int(n_workers))
    sizes = [min(chunk_size, n_samples - s) for s in range(0, n_samples, chunk_size)]
    args = [(c, sz, sampler, statistic, master_seed) for c, sz in enumerate(sizes)]
    if workers == 1:
        parts = [_run_chunk(*a) for a in args]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda a: _run_chunk(*a), args))
    count, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        tot = count + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta * delta * count * nb / tot
        count = tot
    var = m2 / (count - 1)
    return EntropyEstimate(mean, math.sqrt(var / count), var, count, master_seed)
