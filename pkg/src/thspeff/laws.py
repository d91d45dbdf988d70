"""Limiting spectral laws and their moments.

* The Poisson law with mean ``beta`` (eigenvalue law of sparse TH spreading
  with one pulse per symbol).
* The Marchenko-Pastur law (binary DS spreading).
* Exact integer tables of Stirling numbers of the second kind and Narayana
  numbers, whose generating polynomials give the moments of the two laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .quadrature import integrate

L_MAX = 20
POISSON_TAIL = 1e-12


def poisson_truncation(beta: float, tail: float = POISSON_TAIL) -> int:
    """Largest index kept when summing over a Poisson(beta) law.

    ``max(ceil(beta + 12 sqrt(beta) + 30), first k whose upper tail < tail)``.
    """
    k = math.ceil(beta + 12.0 * math.sqrt(beta) + 30.0)
    while _poisson_sf(beta, k) >= tail:
        k += max(1, int(math.sqrt(beta)))
    return k


def _poisson_sf(beta: float, k: int) -> float:
    # P(X > k), summed forward from k+1 in the log domain.
    total = 0.0
    j = k + 1
    while True:
        term = math.exp(j * math.log(beta) - beta - math.lgamma(j + 1)) if beta > 0 else 0.0
        total += term
        if term < 1e-18 * max(total, 1e-300) or term == 0.0:
            return total
        j += 1


def poisson_weights(beta: float, k_max: int | None = None) -> np.ndarray:
    """``f_k(beta) = beta^k e^{-beta} / k!`` for ``k = 0..k_max``."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if k_max is None:
        k_max = poisson_truncation(beta)
    k = np.arange(k_max + 1)
    if beta == 0:
        w = np.zeros(k_max + 1)
        w[0] = 1.0
        return w
    return np.exp(k * math.log(beta) - beta - gammaln(k + 1))


@dataclass(frozen=True)
class PoissonLaw:
    beta: float
    k_max: int | None = None

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError("beta must be nonnegative")
        if self.k_max is None:
            object.__setattr__(self, "k_max", poisson_truncation(self.beta))

    @property
    def weights(self) -> np.ndarray:
        return poisson_weights(self.beta, self.k_max)

    def pmf(self, k: int) -> float:
        return poisson_pmf(self, k)

    def cdf(self, x: float) -> float:
        return poisson_cdf(self, x)

    def moment(self, L: int) -> float:
        return poisson_moment(self, L)


def poisson_pmf(law: PoissonLaw, k: int) -> float:
    if k < 0:
        raise ValueError("k must be nonnegative")
    if law.beta == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(law.beta) - law.beta - math.lgamma(k + 1))


def poisson_cdf(law: PoissonLaw, x: float) -> float:
    """Right-continuous distribution function of the Poisson law."""
    if x < 0:
        return 0.0
    k = min(math.floor(x), law.k_max)
    return math.fsum(poisson_weights(law.beta, k))


@lru_cache(maxsize=None)
def stirling2_table(L_max: int = L_MAX) -> tuple[tuple[int, ...], ...]:
    """``table[n][l]`` is the Stirling number of the second kind {n, l}."""
    table = [[0] * (L_max + 1) for _ in range(L_max + 1)]
    table[0][0] = 1
    for n in range(1, L_max + 1):
        for l in range(1, n + 1):
            table[n][l] = l * table[n - 1][l] + table[n - 1][l - 1]
    return tuple(tuple(row) for row in table)


@lru_cache(maxsize=None)
def narayana_table(L_max: int = L_MAX) -> tuple[tuple[int, ...], ...]:
    """``table[L][l] = C(L, l) C(L, l-1) / L`` for ``1 <= l <= L``."""
    table = [[0] * (L_max + 1) for _ in range(L_max + 1)]
    table[0][0] = 1
    for L in range(1, L_max + 1):
        for l in range(1, L + 1):
            table[L][l] = math.comb(L, l) * math.comb(L, l - 1) // L
    return tuple(tuple(row) for row in table)


@dataclass(frozen=True)
class MomentTable:
    L_max: int = L_MAX

    @property
    def stirling2(self):
        return stirling2_table(self.L_max)

    @property
    def narayana(self):
        return narayana_table(self.L_max)

    def check_order(self, L: int):
        if L < 1:
            raise ValueError("moment order must be >= 1")
        if L > self.L_max:
            raise OverflowError(f"moment order {L} exceeds the exact table limit {self.L_max}")


_TABLE = MomentTable()


def poisson_moment(law: PoissonLaw | float, L: int) -> float:
    """Touchard polynomial ``sum_l {L, l} beta^l``."""
    beta = law.beta if isinstance(law, PoissonLaw) else float(law)
    _TABLE.check_order(L)
    row = _TABLE.stirling2[L]
    return math.fsum(row[l] * beta**l for l in range(1, L + 1))


def expected_moment_finite(N: int, K: int, L: int) -> float:
    """Mean of ``m_L`` over TH(Ns=1) matrices of size ``N x K``.

    ``sum_l {L, l} K!/(K-l)! N^{-l}``, accumulated as an exact rational.
    """
    _TABLE.check_order(L)
    row = _TABLE.stirling2[L]
    total = Fraction(0)
    for l in range(1, L + 1):
        if l > K:
            break
        total += Fraction(row[l] * math.perm(K, l), N**l)
    return float(total)


@dataclass(frozen=True)
class MarchenkoPasturLaw:
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @property
    def lower(self) -> float:
        return (1.0 - math.sqrt(self.beta)) ** 2

    @property
    def upper(self) -> float:
        return (1.0 + math.sqrt(self.beta)) ** 2

    @property
    def atom(self) -> float:
        """Mass of the point at zero, ``(1 - beta)^+``."""
        return max(0.0, 1.0 - self.beta)

    def density(self, x):
        return mp_density(self, x)

    def moment(self, L: int) -> float:
        return mp_moment(self, L)


def mp_density(law: MarchenkoPasturLaw, x):
    """Density of the absolutely continuous part; zero off ``[lower, upper]``."""
    x = np.asarray(x, dtype=float)
    lo, hi = law.lower, law.upper
    inside = (x > lo) & (x < hi) & (x > 0)
    xs = np.where(inside, x, 1.0)
    val = np.sqrt(np.clip(-(xs - hi) * (xs - lo), 0.0, None)) / (2.0 * math.pi * xs)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def mp_moment(law: MarchenkoPasturLaw | float, L: int) -> float:
    """``sum_l N_l(L) beta^l`` with Narayana numbers ``N_l(L)``."""
    beta = law.beta if isinstance(law, MarchenkoPasturLaw) else float(law)
    _TABLE.check_order(L)
    row = _TABLE.narayana[L]
    return math.fsum(row[l] * beta**l for l in range(1, L + 1))


def mp_expectation(law: MarchenkoPasturLaw, g, *, atol: float = 1e-11) -> float:
    """``E[g(lambda)]`` under the full law (atom at zero plus density).

    The continuous part is integrated in the angle ``theta`` with
    ``lambda = 1 + beta + 2 sqrt(beta) cos(theta)``, which removes the
    square-root singularities at both edges of the support.
    """
    c = 1.0 + law.beta
    r = 2.0 * math.sqrt(law.beta)

    def integrand(theta):
        lam = c + r * np.cos(theta)
        s = np.sin(theta)
        # sin^2 / lam stays bounded as lam -> 0 when beta == 1.
        weight = r * r * s * s / (2.0 * math.pi * np.where(lam > 0, lam, 1.0))
        return np.where(lam > 0, weight * g(lam), 0.0)

    cont, _ = integrate(integrand, 0.0, math.pi, atol=atol)
    atom = law.atom * float(g(np.array([0.0]))[0]) if law.atom > 0 else 0.0
    return atom + cont


def rank_upper_bound(beta, Ns: int):
    """``min(beta, 1 - exp(-Ns beta))``, an upper bound on the normalized rank."""
    beta = np.asarray(beta, dtype=float)
    return np.minimum(beta, 1.0 - np.exp(-Ns * beta))
