"""Reduced-density-matrix spectra and entropy functions.

Bit convention: mode 1 is the most significant bit of a basis index and
subsystem A consists of the first ``V_A`` modes, so reshaping a full-space
amplitude vector into a ``d_A x d_B`` matrix is a contiguous operation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, Literal, Optional, Sequence

import numpy as np

__all__ = [
    "PartitionSpec",
    "PureStateVector",
    "GaussianStateRep",
    "RdmSpectrum",
    "s_binary",
    "vn_entropy",
    "renyi_entropy",
    "sector_basis",
    "rdm_spectrum_full",
    "rdm_spectrum_sector",
    "rdm_spectrum_blocked",
    "gaussian_entropy_from_C",
    "gaussian_entropy_from_J",
    "canonical_J0",
    "correlation_to_J",
]

_CLAMP = 1e-12


@dataclass(frozen=True)
class PartitionSpec:
    """Bipartition of ``V`` modes into the first ``V_A`` and the rest."""

    V: int
    V_A: int

    def __post_init__(self) -> None:
        if self.V < 1:
            raise ValueError("V must be positive")
        if not 0 <= self.V_A <= self.V:
            raise ValueError("V_A must lie in [0, V]")

    @property
    def V_B(self) -> int:
        return self.V - self.V_A

    @property
    def f(self) -> float:
        return self.V_A / self.V


def sector_basis(V: int, N: int) -> np.ndarray:
    """All V-bit integers of Hamming weight N in ascending order."""
    if not 0 <= N <= V:
        raise ValueError("N must lie in [0, V]")
    states = [sum(1 << (V - 1 - k) for k in occ) for occ in combinations(range(V), N)]
    return np.array(sorted(states), dtype=np.int64)


@dataclass
class PureStateVector:
    """Normalized amplitude vector in the full space or in a fixed-N sector.

    Parameters
    ----------
    amplitudes : ndarray
        Complex amplitudes.
    V : int
        Number of modes.
    N : int, optional
        Particle number for a sector state; ``None`` for the full space.
    basis : ndarray, optional
        Occupation bitstrings (as integers) labelling the sector amplitudes.
        Built with :func:`sector_basis` when omitted.
    """

    amplitudes: np.ndarray
    V: int
    N: Optional[int] = None
    basis: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.N is None:
            if self.amplitudes.size != 2**self.V:
                raise ValueError("full-space state must have 2**V amplitudes")
        else:
            if self.basis is None:
                self.basis = sector_basis(self.V, self.N)
            if self.amplitudes.size != self.basis.size:
                raise ValueError("sector state size does not match its basis")
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm^2 = {norm})")

    @property
    def is_sector(self) -> bool:
        return self.N is not None

    def embed(self) -> np.ndarray:
        """Zero-padded amplitude vector in the full 2**V space."""
        if not self.is_sector:
            return self.amplitudes.copy()
        full = np.zeros(2**self.V, dtype=complex)
        full[self.basis] = self.amplitudes
        return full


@dataclass
class GaussianStateRep:
    """Pure fermionic Gaussian state given by C (fixed N) or J (arbitrary N).

    ``kind == "C"``: ``matrix`` is the ``V x V`` one-body correlation matrix
    ``C_ij = <f_j^dagger f_i>``.  ``kind == "J"``: ``matrix`` is the real
    antisymmetric ``2V x 2V`` complex structure with ``J^2 = -1``.
    """

    matrix: np.ndarray
    kind: Literal["C", "J"]

    @property
    def V(self) -> int:
        n = self.matrix.shape[0]
        return n if self.kind == "C" else n // 2

    def validate(self, tol: float = 1e-10) -> None:
        """Raise ``ValueError`` if the matrix violates its purity invariants."""
        M = self.matrix
        if self.kind == "C":
            if np.max(np.abs(M - M.conj().T)) > tol:
                raise ValueError("C is not Hermitian")
            if np.max(np.abs(M @ M - M)) > tol:
                raise ValueError("C is not a projector")
        elif self.kind == "J":
            if np.max(np.abs(M + M.T)) > tol:
                raise ValueError("J is not antisymmetric")
            if np.max(np.abs(M @ M + np.eye(M.shape[0]))) > tol:
                raise ValueError("J^2 != -1")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    def restrict(self, V_A: int) -> np.ndarray:
        """Block of the matrix belonging to the first ``V_A`` modes."""
        k = V_A if self.kind == "C" else 2 * V_A
        return self.matrix[:k, :k]

    def entropy(self, V_A: int) -> float:
        """Entanglement entropy of the first ``V_A`` modes."""
        if self.kind == "C":
            return gaussian_entropy_from_C(self.restrict(V_A))
        return gaussian_entropy_from_J(self.restrict(V_A))


@dataclass
class RdmSpectrum:
    """Eigenvalues of a reduced density matrix with optional block tags."""

    eigenvalues: np.ndarray
    block_labels: Optional[np.ndarray] = None
    block_weights: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        ev = np.asarray(self.eigenvalues, dtype=float)
        ev = np.where(ev < _CLAMP, np.where(ev < -_CLAMP, ev, 0.0), ev)
        if np.any(ev < 0):
            raise ValueError("spectrum has negative eigenvalues beyond clamping window")
        self.eigenvalues = ev


def s_binary(x):
    """Binary entropy of the eigenvalue pair (1 +- x)/2.

    Parameters
    ----------
    x : float or array_like
        Values in [-1, 1]; inputs up to 1e-12 outside are clamped.

    Returns
    -------
    float or ndarray
        ``-p ln p - (1-p) ln(1-p)`` with ``p = (1+x)/2``; exactly 0 at +-1.
    """
    xs = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    p = 0.5 * (1.0 + xs)
    q = 0.5 * (1.0 - xs)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = -np.where(p > 0, p * np.log(p), 0.0) - np.where(q > 0, q * np.log(q), 0.0)
    return float(val) if np.ndim(x) == 0 else val


def vn_entropy(spec: RdmSpectrum) -> float:
    """Von Neumann entropy ``-sum lambda ln lambda`` with 0 ln 0 = 0."""
    lam = spec.eigenvalues
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def renyi_entropy(spec: RdmSpectrum, order: float) -> float:
    """Renyi entropy ``ln(sum lambda^n) / (1 - n)`` for ``n > 0``, ``n != 1``."""
    if order <= 0 or order == 1:
        raise ValueError("Renyi order must be positive and different from 1")
    lam = spec.eigenvalues
    lam = lam[lam > 0]
    return float(math.log(np.sum(lam**order)) / (1.0 - order))


def _spectrum_of(W: np.ndarray) -> np.ndarray:
    if W.size == 0:
        return np.zeros(0)
    sv = np.linalg.svd(W, compute_uv=False)
    return sv * sv


def rdm_spectrum_full(state: PureStateVector, part: PartitionSpec) -> RdmSpectrum:
    """Spectrum of rho_A = W W^dagger for a full-space state.

    Parameters
    ----------
    state : PureStateVector
        State with ``2**V`` amplitudes.
    part : PartitionSpec
        Bipartition; A is the first ``V_A`` modes.

    Returns
    -------
    RdmSpectrum
        ``min(d_A, d_B)`` eigenvalues (the remaining ones are zero).
    """
    if state.is_sector:
        state = PureStateVector(state.embed(), state.V)
    if state.V != part.V:
        raise ValueError("state and partition disagree on V")
    W = state.amplitudes.reshape(2**part.V_A, 2**part.V_B)
    return RdmSpectrum(_spectrum_of(W))


def rdm_spectrum_blocked(
    amplitudes: np.ndarray,
    a_keys: Sequence[Hashable],
    b_keys: Sequence[Hashable],
    block_of: Sequence[int],
) -> RdmSpectrum:
    """Block-diagonal reduced spectrum for a number-conserving state.

    Parameters
    ----------
    amplitudes : ndarray
        Amplitudes over a basis of product configurations.
    a_keys, b_keys : sequence
        Configuration of subsystem A and B for every basis state.
    block_of : sequence of int
        Particle number in A for every basis state (the block label).

    Returns
    -------
    RdmSpectrum
        Union of block spectra, tagged with ``block_labels``, and the block
        weights ``p_{N_A}`` (squared norms per block).
    """
    amps = np.asarray(amplitudes, dtype=complex)
    blocks = np.asarray(block_of)
    eigs, labels, weights = [], [], {}
    for nA in np.unique(blocks):
        idx = np.flatnonzero(blocks == nA)
        rows = {k: r for r, k in enumerate(dict.fromkeys(a_keys[i] for i in idx))}
        cols = {k: c for c, k in enumerate(dict.fromkeys(b_keys[i] for i in idx))}
        W = np.zeros((len(rows), len(cols)), dtype=complex)
        for i in idx:
            W[rows[a_keys[i]], cols[b_keys[i]]] = amps[i]
        lam = _spectrum_of(W)
        eigs.append(lam)
        labels.append(np.full(lam.size, int(nA)))
        weights[int(nA)] = float(np.sum(np.abs(amps[idx]) ** 2))
    return RdmSpectrum(np.concatenate(eigs), np.concatenate(labels), weights)


def rdm_spectrum_sector(state: PureStateVector, part: PartitionSpec) -> RdmSpectrum:
    """Block-diagonal reduced spectrum of a fixed-N sector state.

    Basis bitstrings are grouped by the weight ``N_A`` of their A-substring;
    each block ``W_{N_A}`` has shape ``d_A(N_A) x d_B(N - N_A)``.
    """
    if not state.is_sector:
        raise ValueError("rdm_spectrum_sector requires a sector state")
    if state.V != part.V:
        raise ValueError("state and partition disagree on V")
    a_part = state.basis >> part.V_B
    b_part = state.basis & ((1 << part.V_B) - 1)
    n_a = _popcount(a_part)
    amps = state.amplitudes
    eigs, labels, weights = [], [], {}
    for nA in np.unique(n_a):
        idx = np.flatnonzero(n_a == nA)
        _, rows = np.unique(a_part[idx], return_inverse=True)
        _, cols = np.unique(b_part[idx], return_inverse=True)
        W = np.zeros((rows.max() + 1, cols.max() + 1), dtype=complex)
        W[rows, cols] = amps[idx]
        lam = _spectrum_of(W)
        eigs.append(lam)
        labels.append(np.full(lam.size, int(nA)))
        weights[int(nA)] = float(np.sum(np.abs(amps[idx]) ** 2))
    return RdmSpectrum(np.concatenate(eigs), np.concatenate(labels), weights)


def _popcount(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64).copy()
    count = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        count += x & 1
        x >>= 1
    return count


def _check_hermitian(M: np.ndarray, tol: float, what: str) -> None:
    if M.size and np.max(np.abs(M - M.conj().T)) > tol:
        raise ValueError(f"{what} is not Hermitian within {tol}")


def gaussian_entropy_from_C(C_A: np.ndarray) -> float:
    """Entropy of a Gaussian state from its restricted correlation matrix.

    Parameters
    ----------
    C_A : ndarray
        Hermitian ``V_A x V_A`` block of the correlation matrix.

    Returns
    -------
    float
        ``sum_j s_binary(2 y_j - 1)`` over the eigenvalues ``y_j`` of C_A.
    """
    C_A = np.asarray(C_A)
    _check_hermitian(C_A, 1e-8, "C_A")
    if C_A.size == 0:
        return 0.0
    y = np.linalg.eigvalsh(0.5 * (C_A + C_A.conj().T))
    return float(np.sum(s_binary(2.0 * y - 1.0)))


def gaussian_entropy_from_J(J_A: np.ndarray) -> float:
    """Entropy of a Gaussian state from its restricted complex structure.

    The eigenvalues of ``i J_A`` come in pairs ``+-x_j`` and ``s_binary`` is
    even, so ``sum_j s_binary(x_j)`` is half the sum over all ``2 V_A``
    values.  Those are read off as square roots of the eigenvalues of the
    real symmetric ``-J_A^2``, which avoids a complex eigensolve and any
    pairing step.
    """
    J_A = np.asarray(J_A, dtype=float)
    if J_A.size and np.max(np.abs(J_A + J_A.T)) > 1e-8:
        raise ValueError("J_A is not antisymmetric")
    if J_A.size == 0:
        return 0.0
    J = 0.5 * (J_A - J_A.T)
    x2 = np.linalg.eigvalsh(J.T @ J)
    return 0.5 * float(np.sum(s_binary(np.sqrt(np.clip(x2, 0.0, 1.0)))))


def canonical_J0(V: int) -> np.ndarray:
    """Block-diagonal reference complex structure ``i tau_2 (x) 1``."""
    return np.kron(np.eye(V), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def correlation_to_J(C: np.ndarray) -> np.ndarray:
    """Complex structure in the Majorana basis of a number-conserving state.

    With Majoranas ``gamma_{2j-1} = (f_j + f_j^dagger)/sqrt 2`` and
    ``gamma_{2j} = i (f_j^dagger - f_j)/sqrt 2`` (ordered mode by mode),
    the returned real antisymmetric matrix has ``i J`` eigenvalues
    ``+-(2 y - 1)`` where ``y`` are the eigenvalues of ``C``.
    """
    C = np.asarray(C, dtype=complex)
    G = 2.0 * C - np.eye(C.shape[0])
    V = C.shape[0]
    J = np.zeros((2 * V, 2 * V))
    # iJ = [[Im-part, Re-part],[...]] assembled blockwise per mode pair.
    J[0::2, 0::2] = -G.imag
    J[1::2, 1::2] = -G.imag
    J[0::2, 1::2] = G.real
    J[1::2, 0::2] = -G.real
    return J
