"""Finite-N algebra of linear front ends ``W^T = S^T (eta S S^T + alpha I)^{-1}``.

``eta = 0`` gives the single-user matched filter (up to the scale ``1/alpha``),
``eta = 1`` with ``alpha = 1/gamma`` the MMSE filter and ``alpha -> 0+`` the
decorrelator. With one pulse per symbol ``S S^T`` is diagonal and the
effective gains have a closed form in terms of the chip occupancy; the dense
solve in :func:`gain_direct` is kept as an independent oracle for it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .ensembles import SpreadingMatrix
from .errors import SingularSystemError
from .spectra import chip_counts, normalized_rank

DECORRELATOR_RIDGE = 1e-10


@dataclass(frozen=True)
class LinearFrontEnd:
    alpha: float
    eta: int = 1

    def __post_init__(self):
        if self.eta not in (0, 1):
            raise ValueError("eta must be 0 or 1")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.eta == 0 and self.alpha == 0:
            raise ValueError("eta = 0 requires alpha > 0")

    @classmethod
    def sumf(cls, alpha: float = 1.0):
        return cls(alpha, 0)

    @classmethod
    def mmse(cls, gamma: float):
        return cls(1.0 / gamma, 1)

    @classmethod
    def decorrelator(cls, ridge: float = DECORRELATOR_RIDGE):
        return cls(ridge, 1)


@dataclass(frozen=True, eq=False)
class GainMatrix:
    """``G = W^T S`` and the unit-noise output covariance ``W^T W``."""

    G: np.ndarray
    noise_cov: np.ndarray

    @property
    def noise_scale(self) -> np.ndarray:
        """Per-user noise variance factor (diagonal of ``W^T W``)."""
        return np.diag(self.noise_cov).copy()


def crosscorrelations(m: SpreadingMatrix) -> np.ndarray:
    """``rho = S^T S`` from integer collision counts (exact multiples of 1/Ns)."""
    # Signed integer incidence matrix sqrt(Ns) S^T; its Gram is exact in int64.
    A = np.zeros((m.K, m.N), dtype=np.int64)
    A[np.repeat(np.arange(m.K), m.Ns), m.chips.ravel()] = m.signs.ravel()
    return (A @ A.T) / m.Ns


def _require_single_pulse(m: SpreadingMatrix, what: str):
    if m.Ns != 1:
        raise ValueError(f"{what} is defined for one pulse per symbol (Ns=1), got Ns={m.Ns}")


def occupancy(m: SpreadingMatrix) -> np.ndarray:
    """``v_i``: number of users (including ``i``) on user ``i``'s chip."""
    _require_single_pulse(m, "occupancy")
    return chip_counts(m)[m.chips[:, 0]]


def gain_closed_form(m: SpreadingMatrix, fe: LinearFrontEnd) -> GainMatrix:
    """``G_ij = rho_ij / (alpha + eta v_i)``, ``[W^T W]_ij = rho_ij / (alpha + eta v_i)^2``."""
    _require_single_pulse(m, "the closed-form gain")
    rho = crosscorrelations(m)
    denom = fe.alpha + fe.eta * occupancy(m)
    G = rho / denom[:, None]
    cov = rho / (denom**2)[:, None]
    return GainMatrix(G, cov)


def _solve_refined(M, B):
    # Cholesky solve followed by one pass of iterative refinement.
    try:
        factor = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "eta S S^T + alpha I is singular; use a positive ridge alpha "
            "(e.g. LinearFrontEnd.decorrelator()) for the decorrelator limit"
        ) from exc
    X = scipy.linalg.cho_solve(factor, B, check_finite=False)
    X += scipy.linalg.cho_solve(factor, B - M @ X, check_finite=False)
    return X


def gain_direct(m: SpreadingMatrix, fe: LinearFrontEnd) -> GainMatrix:
    """Dense evaluation of ``G = S^T (eta S S^T + alpha I)^{-1} S``; any Ns."""
    S = np.asarray(m.entries)
    if fe.eta == 0:
        X = S / fe.alpha
    else:
        M = S @ S.T
        M[np.diag_indices_from(M)] += fe.alpha
        if fe.alpha == 0 and normalized_rank(m) < 1.0:
            raise SingularSystemError(
                "S S^T is rank deficient at alpha = 0; use the ridge path "
                f"alpha = {DECORRELATOR_RIDGE:g}"
            )
        if 0 < fe.alpha <= 1e3 * DECORRELATOR_RIDGE and normalized_rank(m) < min(1.0, m.K / m.N):
            warnings.warn(
                "Gram matrix is numerically singular; decorrelator evaluated as the "
                f"Tikhonov limit with alpha = {fe.alpha:g}",
                RuntimeWarning,
                stacklevel=2,
            )
        X = _solve_refined(M, S)
    return GainMatrix(S.T @ X, X.T @ X)


def noise_covariance_closed_form(m: SpreadingMatrix, fe: LinearFrontEnd, n0: float = 1.0):
    return n0 * gain_closed_form(m, fe).noise_cov


def conditional_sinr_user1(m: SpreadingMatrix, fe: LinearFrontEnd | None, gamma: float) -> float:
    """``gamma / (v1' gamma + 1)`` with ``v1' = v1 - 1`` interferers on user 1's chip.

    The value does not depend on the front end (any ``alpha``, ``eta``).
    """
    v1 = int(occupancy(m)[0])
    return sinr_from_interferers(v1 - 1, gamma)


def sinr_from_interferers(v_prime, gamma: float):
    v_prime = np.asarray(v_prime, dtype=float)
    out = gamma / (v_prime * gamma + 1.0)
    return float(out) if out.ndim == 0 else out


def interference_power(m: SpreadingMatrix, user: int = 0) -> float:
    """``sum_{k != user} rho_{user,k}^2``."""
    rho = crosscorrelations(m)[user]
    return float(np.sum(rho**2) - rho[user] ** 2)


def interference_powers(m: SpreadingMatrix) -> np.ndarray:
    """Interference power seen by every user's matched filter."""
    rho = crosscorrelations(m)
    return np.sum(rho**2, axis=1) - np.diag(rho) ** 2
