"""Quadratic and interacting lattice Hamiltonians and their eigenstate entropies.

Quadratic models are described by a ``V x V`` single-particle matrix ``h``.
A many-body eigenstate is a set of occupied orbitals, and its entropy follows
from the restricted correlation matrix.  Interacting models are dense
matrices on a fixed-N occupation basis (bit convention of
:mod:`entanglement_ensembles.entropy`: site 0 is the most significant bit).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .ensembles import EntropyEstimate, SeededRng, mc_estimate
from .entropy import (
    PartitionSpec,
    PureStateVector,
    gaussian_entropy_from_C,
    rdm_spectrum_full,
    rdm_spectrum_sector,
    sector_basis,
    vn_entropy,
)
from .spectral import gue_matrix

__all__ = [
    "QuadraticModel",
    "ManyBodyModel",
    "build_free_fermion_1d",
    "build_anderson_3d",
    "build_syk2_dirac",
    "quadratic_eigenstate_entropy",
    "quadratic_eigenstate_average",
    "build_hcb_chain",
    "build_block_gue",
    "build_full_gue",
    "interacting_eigenstate_average",
    "MAX_SECTOR_DIM",
]

MAX_SECTOR_DIM = 12870
MAX_ALL_STATES_MODES = 24
MAX_FULL_GUE_MODES = 10


@dataclass
class QuadraticModel:
    """Single-particle Hamiltonian with a cached eigenbasis.

    Parameters
    ----------
    h : ndarray
        Hermitian ``V x V`` matrix.
    label : str
        ``"FreeFermion1D"``, ``"Anderson3D"`` or ``"SYK2Dirac"``.
    params : dict
        Construction parameters (``L``, ``W``, ``seed`` ...).
    orbitals : ndarray, optional
        Explicit eigenbasis (columns) used instead of ``eigh``; needed when the
        spectrum is degenerate and a particular basis is intended.
    energies : ndarray, optional
        Eigenvalues matching ``orbitals``.
    """

    h: np.ndarray
    label: str
    params: dict = field(default_factory=dict)
    orbitals: Optional[np.ndarray] = None
    energies: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.h = np.asarray(self.h)
        if self.h.ndim != 2 or self.h.shape[0] != self.h.shape[1]:
            raise ValueError("h must be square")
        if np.max(np.abs(self.h - self.h.conj().T)) > 1e-12:
            raise ValueError("h is not Hermitian")
        if (self.orbitals is None) != (self.energies is None):
            raise ValueError("orbitals and energies must be given together")

    @property
    def V(self) -> int:
        return self.h.shape[0]

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """``(energies, orbitals)`` with orbitals as columns."""
        if self.orbitals is not None:
            return np.asarray(self.energies), np.asarray(self.orbitals)
        return np.linalg.eigh(self.h)


@dataclass
class ManyBodyModel:
    """Hamiltonian on an occupation basis.

    ``N is None`` means the full ``2**V`` space, otherwise ``basis`` lists the
    sector bitstrings of :func:`entanglement_ensembles.entropy.sector_basis`.
    """

    H: np.ndarray
    V: int
    N: Optional[int]
    basis: np.ndarray
    label: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.H.shape != (self.basis.size, self.basis.size):
            raise ValueError("H does not match the basis size")
        if np.max(np.abs(self.H - self.H.conj().T)) > 1e-12:
            raise ValueError("H is not Hermitian")


# ---------------------------------------------------------------------------
# Quadratic models
# ---------------------------------------------------------------------------


def _ring_hopping(V: int) -> np.ndarray:
    h = np.zeros((V, V))
    for j in range(V):
        h[j, (j + 1) % V] -= 1.0
        h[(j + 1) % V, j] -= 1.0
    return h


def build_free_fermion_1d(V: int) -> QuadraticModel:
    """Periodic nearest-neighbour chain with unit hopping.

    The eigenbasis is fixed to plane waves ``exp(2 pi i k j / V)/sqrt(V)``
    with energies ``-2 cos(2 pi k / V)``, which lifts the ambiguity of the
    degenerate pairs ``k``, ``V - k``.
    """
    if V < 2:
        raise ValueError("V must be at least 2")
    j = np.arange(V)
    k = np.arange(V)
    orb = np.exp(2j * np.pi * np.outer(j, k) / V) / math.sqrt(V)
    return QuadraticModel(
        _ring_hopping(V), "FreeFermion1D", {"V": V}, orbitals=orb, energies=-2 * np.cos(2 * np.pi * k / V)
    )


def build_anderson_3d(
    L: int, W: float, seed: int, periodic: bool = True, t: float = 1.0
) -> QuadraticModel:
    """Cubic lattice with hopping ``t`` and on-site disorder ``(W/2) eps_i``.

    ``eps_i`` is uniform in ``[-1, 1]`` from ``SeededRng(seed)``.  Site
    ``(x, y, z)`` has index ``z L^2 + y L + x``, so subsystems made of the
    first ``V_A`` sites fill whole z-layers first.
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    V = L**3
    h = np.zeros((V, V))
    idx = np.arange(V).reshape(L, L, L)  # [z, y, x]
    for axis in range(3):
        nb = np.roll(idx, -1, axis=axis)
        src, dst = idx.ravel(), nb.ravel()
        if not periodic:
            keep = np.moveaxis(np.ones_like(idx, dtype=bool), axis, 0)
            keep[-1] = False
            keep = np.moveaxis(keep, 0, axis).ravel()
            src, dst = src[keep], dst[keep]
        np.add.at(h, (src, dst), -t)
        np.add.at(h, (dst, src), -t)
    eps = SeededRng(seed).generator().uniform(-1.0, 1.0, V)
    h[np.diag_indices(V)] += 0.5 * W * eps
    return QuadraticModel(h, "Anderson3D", {"L": L, "W": W, "seed": seed, "periodic": periodic})


def build_syk2_dirac(V: int, seed: int) -> QuadraticModel:
    """Number-conserving SYK2 model: a ``V x V`` GUE coefficient matrix.

    The weight is ``exp(-Tr h^2 / 2)``, so off-diagonal entries have half
    the variance of the diagonal ones in each of their real and imaginary parts.
    """
    if V < 2:
        raise ValueError("V must be at least 2")
    h = gue_matrix(V, SeededRng(seed).generator())
    return QuadraticModel(h, "SYK2Dirac", {"V": V, "seed": seed})


def quadratic_eigenstate_entropy(m: QuadraticModel, occupied, V_A: int) -> float:
    """Entropy of the first ``V_A`` sites in the Slater determinant ``occupied``.

    ``occupied`` is a boolean mask of length ``V`` or an index collection.
    """
    if not 0 <= V_A <= m.V:
        raise ValueError("V_A must lie in [0, V]")
    _, phi = m.eigensystem
    occ = np.asarray(occupied)
    if occ.dtype == bool:
        if occ.size != m.V:
            raise ValueError("mask length must equal V")
        cols = np.flatnonzero(occ)
    else:
        cols = np.unique(occ.astype(np.int64))
        if cols.size and (cols[0] < 0 or cols[-1] >= m.V):
            raise ValueError("occupied orbital index out of range")
    if cols.size == 0 or V_A == 0:
        return 0.0
    P = phi[:V_A, cols]
    return gaussian_entropy_from_C(P @ P.conj().T)


def quadratic_eigenstate_average(
    m: QuadraticModel,
    V_A: int,
    mode: str = "sampled",
    n: Optional[int] = None,
    seed: Optional[int] = None,
    N: Optional[int] = None,
    n_workers: Optional[int] = None,
) -> EntropyEstimate:
    """Average eigenstate entropy over a family of Slater determinants.

    Parameters
    ----------
    mode : {"all_states", "sampled", "stratified", "fixed_N_sampled"}
        ``all_states`` enumerates all ``2**V`` occupations (``V <= 24``);
        ``sampled`` draws ``n`` uniformly random occupation subsets, which
        weighs particle numbers binomially; ``stratified`` targets the same
        average but fixes the particle numbers by systematic sampling of the
        binomial law (see :func:`_stratified_average`); ``fixed_N_sampled``
        draws ``n`` random subsets of size ``N``.
    n, seed, N : int
        Sample count, master seed and particle number as the mode requires.
    """
    V = m.V
    if mode == "all_states":
        if V > MAX_ALL_STATES_MODES:
            raise ValueError(f"all_states needs V <= {MAX_ALL_STATES_MODES}")
        vals = np.empty(2**V)
        for s in range(2**V):
            mask = np.array([(s >> k) & 1 for k in range(V)], dtype=bool)
            vals[s] = quadratic_eigenstate_entropy(m, mask, V_A)
        mean = float(np.mean(vals))
        var = float(np.var(vals, ddof=1))
        return EntropyEstimate(mean, math.sqrt(var / vals.size), var, vals.size, None)
    if n is None or seed is None:
        raise ValueError("sampled modes need n and seed")
    m.eigensystem  # populate the cache before worker threads start
    if mode == "stratified":
        return _stratified_average(m, V_A, n, seed)
    if mode == "sampled":
        sampler = lambda rng: rng.random(V) < 0.5
    elif mode == "fixed_N_sampled":
        if N is None or not 0 <= N <= V:
            raise ValueError("fixed_N_sampled needs 0 <= N <= V")
        sampler = lambda rng: rng.permutation(V)[:N]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return mc_estimate(sampler, lambda occ: quadratic_eigenstate_entropy(m, occ, V_A), n, seed, n_workers)


def _stratified_average(m: QuadraticModel, V_A: int, n: int, seed: int) -> EntropyEstimate:
    """Uniform-subset average with particle numbers drawn systematically.

    ``N_i = F^{-1}((i + u) / n)`` for the Binomial(V, 1/2) distribution
    function ``F`` and one uniform offset ``u``; stratum ``N`` then draws its
    subsets from stream ``N + 1``.  The estimator is unbiased and its
    variance only contains the within-stratum fluctuations.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    V = m.V
    u = SeededRng(seed, 0).generator().random()
    cdf = np.cumsum(np.exp([_log_binom_half(V, k) for k in range(V + 1)]))
    cdf[-1] = 1.0
    Ns = np.searchsorted(cdf, (np.arange(n) + u) / n, side="right")
    total, var_sum, pooled = 0.0, 0.0, []
    counts = np.bincount(Ns, minlength=V + 1)
    stats_by_N = {}
    for N in np.flatnonzero(counts):
        rng = SeededRng(seed, int(N) + 1).generator()
        vals = np.array(
            [quadratic_eigenstate_entropy(m, rng.permutation(V)[:N], V_A) for _ in range(counts[N])]
        )
        stats_by_N[int(N)] = vals
        total += vals.sum()
        if vals.size > 1:
            pooled.append(vals - vals.mean())
    within = float(np.concatenate(pooled).var(ddof=1)) if pooled else 0.0
    for N, vals in stats_by_N.items():
        v = float(vals.var(ddof=1)) if vals.size > 1 else within
        var_sum += vals.size * v
    mean = float(total) / n
    var = var_sum / n
    return EntropyEstimate(mean, math.sqrt(var / n), var, n, seed)


def _log_binom_half(V: int, k: int) -> float:
    return math.lgamma(V + 1) - math.lgamma(k + 1) - math.lgamma(V - k + 1) - V * math.log(2)


# ---------------------------------------------------------------------------
# Interacting models
# ---------------------------------------------------------------------------


def build_hcb_chain(
    V: int, N: int, t1: float = 1.0, t2: float = 0.0, V1: float = 0.0, V2: float = 0.0
) -> ManyBodyModel:
    """Hard-core bosons on a periodic ring with hops and interactions at range 1, 2.

    ``H = sum_l [-t1 (b+_{l+1} b_l + h.c.) - t2 (b+_{l+2} b_l + h.c.)
    + V1 n_l n_{l+1} + V2 n_l n_{l+2}]`` with site indices mod ``V``.
    Matrix elements carry no exchange signs.
    """
    if V < 2 or not 0 <= N <= V:
        raise ValueError("require V >= 2 and 0 <= N <= V")
    if math.comb(V, N) > MAX_SECTOR_DIM:
        raise ValueError(f"sector dimension exceeds {MAX_SECTOR_DIM}")
    basis = sector_basis(V, N)
    pos = {int(b): i for i, b in enumerate(basis)}
    H = np.zeros((basis.size, basis.size))

    def bit(l: int) -> int:
        return 1 << (V - 1 - (l % V))

    for i, b in enumerate(basis):
        b = int(b)
        diag = 0.0
        for l in range(V):
            if b & bit(l):
                if b & bit(l + 1):
                    diag += V1
                if b & bit(l + 2):
                    diag += V2
        H[i, i] = diag
        for r, t in ((1, t1), (2, t2)):
            if t == 0:
                continue
            for l in range(V):
                # b+_{l+r} b_l and its conjugate b+_l b_{l+r}
                for src, dst in ((l, l + r), (l + r, l)):
                    if b & bit(src) and not b & bit(dst):
                        j = pos[b ^ bit(src) ^ bit(dst)]
                        H[j, i] -= t
    return ManyBodyModel(H, V, N, basis, "HardCoreBosonChain", {"t1": t1, "t2": t2, "V1": V1, "V2": V2})


def build_block_gue(V: int, N: int, seed: int) -> ManyBodyModel:
    """Independent GUE draw on the ``N``-particle sector."""
    if not 0 <= N <= V:
        raise ValueError("require 0 <= N <= V")
    if math.comb(V, N) > MAX_SECTOR_DIM:
        raise ValueError(f"sector dimension exceeds {MAX_SECTOR_DIM}")
    basis = sector_basis(V, N)
    H = gue_matrix(basis.size, SeededRng(seed).generator())
    return ManyBodyModel(H, V, N, basis, "BlockGUE", {"seed": seed})


def build_full_gue(V: int, seed: int) -> ManyBodyModel:
    """GUE draw on the full ``2**V`` space (``V <= 10``)."""
    if not 1 <= V <= MAX_FULL_GUE_MODES:
        raise ValueError(f"V must lie in [1, {MAX_FULL_GUE_MODES}]")
    H = gue_matrix(2**V, SeededRng(seed).generator())
    return ManyBodyModel(H, V, None, np.arange(2**V), "FullGUE", {"seed": seed})


def interacting_eigenstate_average(
    m: ManyBodyModel, V_A: int, central_fraction: float = 0.2
) -> EntropyEstimate:
    """Mean entropy over the central ``central_fraction`` of eigenstates by energy.

    The window holds ``round(central_fraction * d)`` states (at least 2)
    centred on the middle of the ascending spectrum.
    """
    if not 0 < central_fraction <= 1:
        raise ValueError("central_fraction must lie in (0, 1]")
    d = m.basis.size
    k = max(2, int(round(central_fraction * d)))
    if k > d:
        raise ValueError("window needs at least two eigenstates")
    _, vecs = np.linalg.eigh(m.H)
    start = (d - k) // 2
    part = PartitionSpec(m.V, V_A)
    vals = np.empty(k)
    for i in range(k):
        v = vecs[:, start + i]
        if m.N is None:
            spec = rdm_spectrum_full(PureStateVector(v, m.V), part)
        else:
            spec = rdm_spectrum_sector(PureStateVector(v, m.V, m.N, m.basis), part)
        vals[i] = vn_entropy(spec)
    var = float(np.var(vals, ddof=1))
    return EntropyEstimate(float(np.mean(vals)), math.sqrt(var / k), var, k, None)
