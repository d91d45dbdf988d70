"""Spectral statistics of a single spreading-matrix realization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import SpreadingMatrix
from .errors import FactorizationError
from .linalg import symmetric_eigvalsh

DEFAULT_L_MAX = 8


def chip_counts(m: SpreadingMatrix) -> np.ndarray:
    """Number of users pulsing on each chip (valid as a spectrum only for Ns=1)."""
    return np.bincount(m.chips.ravel(), minlength=m.N)


def small_gram(m: SpreadingMatrix) -> np.ndarray:
    """``S^T S`` when ``K < N``, otherwise ``S S^T``."""
    S = m.entries
    return S.T @ S if m.K < m.N else S @ S.T


def gram_eigenvalues(m: SpreadingMatrix) -> np.ndarray:
    """Eigenvalues of ``S S^T`` in ascending order, length ``N``.

    For one pulse per symbol ``S S^T`` is diagonal and its eigenvalues are the
    per-chip user counts, returned exactly. Otherwise the smaller of the two
    Gram matrices is diagonalized and padded with zeros. Rounding residue
    below zero is clipped.
    """
    if m.Ns == 1:
        return np.sort(chip_counts(m)).astype(float)
    vals = symmetric_eigvalsh(small_gram(m))
    vals = np.clip(vals, 0.0, None)
    if m.K < m.N:
        vals = np.concatenate([np.zeros(m.N - m.K), vals])
    return np.sort(vals)


def _power_sums(counts: np.ndarray, L_max: int) -> list[float]:
    # Exact integer power sums; fall back to Python ints if int64 could overflow.
    top = int(counts.max()) if counts.size else 0
    if top == 0:
        return [0.0] * L_max
    if L_max * math.log2(top) + math.log2(counts.size) < 62:
        c = counts.astype(np.int64)
        out, p = [], np.ones_like(c)
        for _ in range(L_max):
            p = p * c
            out.append(int(p.sum()))
        return out
    values, mult = np.unique(counts, return_counts=True)
    return [sum(int(v) ** L * int(n) for v, n in zip(values, mult)) for L in range(1, L_max + 1)]


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    """Eigenvalues of ``S S^T`` plus derived quantities for one realization."""

    eigenvalues: np.ndarray
    moments: tuple[float, ...]
    normalized_rank: float
    N: int
    K: int

    @property
    def beta(self) -> float:
        return self.K / self.N

    @property
    def L_max(self) -> int:
        return len(self.moments)

    def esd(self, x):
        """Empirical spectral distribution: fraction of eigenvalues <= x."""
        return np.searchsorted(self.eigenvalues, x, side="right") / self.N


def summarize(m: SpreadingMatrix, L_max: int = DEFAULT_L_MAX) -> SpectralSummary:
    eig = gram_eigenvalues(m)
    if m.Ns == 1:
        sums = _power_sums(chip_counts(m), L_max)
        moments = tuple(s / m.N for s in sums)
    else:
        moments = tuple(float(np.sum(eig**L)) / m.N for L in range(1, L_max + 1))
    return SpectralSummary(eig, moments, normalized_rank(m, eigenvalues=eig), m.N, m.K)


def esd_moment(summary: SpectralSummary, L: int) -> float:
    """``(1/N) sum_n lambda_n^L``."""
    if not 1 <= L <= summary.L_max:
        raise ValueError(f"moment order must lie in 1..{summary.L_max}")
    return summary.moments[L - 1]


def rank_tolerance(N: int, lam_max: float) -> float:
    return N * np.finfo(float).eps * lam_max


def normalized_rank(m: SpreadingMatrix, eigenvalues=None) -> float:
    """``rank(S) / N``.

    Counted exactly (nonempty chips) for one pulse per symbol; otherwise the
    number of Gram eigenvalues above ``N * eps * lambda_max``.
    """
    if m.Ns == 1:
        return np.count_nonzero(chip_counts(m)) / m.N
    eig = gram_eigenvalues(m) if eigenvalues is None else eigenvalues
    lam_max = float(eig[-1])
    if lam_max <= 0:
        return 0.0
    return int(np.count_nonzero(eig > rank_tolerance(m.N, lam_max))) / m.N


def logdet_capacity(m: SpreadingMatrix, gamma: float) -> float:
    """``(1/N) log2 det(I + gamma S S^T)`` in b/s/Hz, via Cholesky.

    Uses the ``K x K`` form ``det(I + gamma S^T S)`` when ``K < N``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    G = small_gram(m)
    A = gamma * G
    A[np.diag_indices_from(A)] += 1.0
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"Cholesky factorization failed: {exc}") from exc
    return 2.0 * float(np.sum(np.log(np.diag(L)))) / (math.log(2.0) * m.N)


def eigen_capacity(eigenvalues, gamma: float, N: int | None = None) -> float:
    """Same quantity from a spectrum: ``(1/N) sum log2(1 + gamma lambda)``."""
    eig = np.asarray(eigenvalues, dtype=float)
    N = eig.size if N is None else N
    return float(np.sum(np.log1p(gamma * eig))) / (math.log(2.0) * N)
