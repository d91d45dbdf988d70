"""Spectral-efficiency curves, Gaussian-mixture entropies and asymptotic parameters.

Every curve is a pure function ``(beta, gamma[, Ns]) -> b/s/Hz`` with
``gamma`` the per-user SNR and ``beta = K/N`` the load. The energy per bit
follows as ``Eb/N0 = beta * gamma / C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import DomainError, NumericalError
from .laws import MarchenkoPasturLaw, mp_expectation, poisson_truncation, poisson_weights
from .quadrature import integrate
from .sweep import SweepResult

LN2 = math.log(2.0)
LN10_OVER_10 = math.log(10.0) / 10.0
SERIES_TAIL = 1e-14
ENTROPY_ATOL = 1e-8


def _check_load(beta):
    if not (math.isfinite(beta) and beta > 0):
        raise DomainError(f"load beta must be finite and positive, got {beta}")


def _check_snr(gamma):
    if not (math.isfinite(gamma) and gamma >= 0):
        raise DomainError(f"gamma must be finite and nonnegative, got {gamma}")


def _check_pulses(Ns):
    if int(Ns) != Ns or Ns < 1:
        raise DomainError(f"Ns must be a positive integer, got {Ns}")


def _poisson_series(mean: float, term) -> float:
    """``sum_k Pois(mean)(k) * term(k)``, extended until the last term is below 1e-14."""
    k_max = poisson_truncation(mean)
    while True:
        k = np.arange(k_max + 1, dtype=float)
        t = poisson_weights(mean, k_max) * term(k)
        if abs(t[-1]) < SERIES_TAIL:
            return math.fsum(t)
        k_max += 16


# ---------------------------------------------------------------- optimum decoding


def c_opt_th_ns1(beta: float, gamma: float) -> float:
    """Optimum-decoding capacity of TH with one pulse per symbol.

    ``sum_k f_k(beta) log2(1 + k gamma)``: the Gram matrix is diagonal with
    Poisson-distributed entries, so the channel splits into parallel chips.
    """
    _check_load(beta)
    _check_snr(gamma)
    return _poisson_series(beta, lambda k: np.log1p(k * gamma) / LN2)


def c_opt_ds(beta: float, gamma: float) -> float:
    """Optimum-decoding capacity of DS by quadrature over the Marchenko-Pastur law."""
    _check_load(beta)
    _check_snr(gamma)
    if gamma == 0:
        return 0.0
    law = MarchenkoPasturLaw(beta)
    return mp_expectation(law, lambda lam: np.log1p(gamma * lam) / LN2, atol=1e-12)


def _mp_excess(beta, gamma, chip: bool):
    # gamma s - F/4 without cancellation: s = 1 for the user term, s = beta for the
    # chip term. It equals gamma s (c + ab) / D with c = 1 + gamma (1 - beta) (user)
    # or 1 + gamma (beta - 1) (chip), ab = sqrt((1 + gamma l+)(1 + gamma l-)) and
    # D = 1 + gamma (1 + beta) + ab. ab^2 - c^2 is 4 gamma beta (user) or 4 gamma
    # (chip), which replaces c + ab when c < 0.
    lp = (1.0 + math.sqrt(beta)) ** 2
    lm = (1.0 - math.sqrt(beta)) ** 2
    ab = math.sqrt((1.0 + gamma * lp) * (1.0 + gamma * lm))
    scale, c, gap = ((beta, 1.0 + gamma * (beta - 1.0), 4.0 * gamma) if chip
                     else (1.0, 1.0 + gamma * (1.0 - beta), 4.0 * gamma * beta))
    numer = c + ab if c >= 0 else gap / (ab - c)
    return gamma * scale * numer / (1.0 + gamma * (1.0 + beta) + ab)


def _mp_quarter_f(beta, gamma):
    lp = (1.0 + math.sqrt(beta)) ** 2
    lm = (1.0 - math.sqrt(beta)) ** 2
    ab = math.sqrt((1.0 + gamma * lp) * (1.0 + gamma * lm))
    return 2.0 * gamma * gamma * beta / (1.0 + gamma * (1.0 + beta) + ab)


def c_opt_ds_closed_form(beta: float, gamma: float) -> float:
    """Known closed form of the DS optimum-decoding capacity (cross-check path)."""
    _check_load(beta)
    _check_snr(gamma)
    if gamma == 0:
        return 0.0
    user = _mp_excess(beta, gamma, chip=False)  # gamma - F/4
    chip = _mp_excess(beta, gamma, chip=True)  # gamma beta - F/4
    return (beta * math.log1p(user) + math.log1p(chip)) / LN2 - _mp_quarter_f(beta, gamma) / (gamma * LN2)


def orthogonal(beta: float, gamma: float) -> float:
    """``log2(1 + beta gamma)``: the single-user AWGN bound at the same total SNR."""
    _check_load(beta)
    _check_snr(gamma)
    return math.log1p(beta * gamma) / LN2


# ---------------------------------------------------------------- matched filter


def sumf_ds(beta: float, gamma: float) -> float:
    """``beta log2(1 + gamma / (1 + beta gamma))``."""
    _check_load(beta)
    _check_snr(gamma)
    return beta * math.log1p(gamma / (1.0 + beta * gamma)) / LN2


def sumf_th_dense_limit(beta: float, gamma: float) -> float:
    """TH with a number of pulses proportional to ``N``; same limit as DS."""
    return sumf_ds(beta, gamma)


def sumf_th_knownS(beta: float, gamma: float, Ns: int = 1) -> float:
    """Matched-filter bank with Gaussian inputs, decoder conditioned on ``S``.

    The interference seen by one user is ``k/Ns^2`` with ``k`` Poisson of
    mean ``beta Ns^2``.
    """
    _check_load(beta)
    _check_snr(gamma)
    _check_pulses(Ns)
    n2 = float(Ns * Ns)
    return beta * _poisson_series(
        beta * n2, lambda k: np.log1p(gamma / (1.0 + k * gamma / n2)) / LN2)


# ---------------------------------------------------------------- linear receivers


def deco_ds(beta: float, gamma: float) -> float:
    """``beta log2(1 + gamma (1 - beta))``; only defined for ``beta < 1``."""
    _check_load(beta)
    _check_snr(gamma)
    if beta >= 1:
        raise DomainError("deco_ds requires beta < 1 (the Gram matrix S^T S must be invertible)")
    return beta * math.log1p(gamma * (1.0 - beta)) / LN2


def mmse_ds(beta: float, gamma: float) -> float:
    """``beta log2(1 + gamma - F(beta, gamma)/4)``, evaluated without cancellation."""
    _check_load(beta)
    _check_snr(gamma)
    if gamma == 0:
        return 0.0
    sinr = _mp_excess(beta, gamma, chip=False)
    return beta * math.log1p(sinr) / LN2


def mmse_ds_direct(beta: float, gamma: float) -> float:
    """Same curve straight from ``F``; loses accuracy when ``gamma`` is large."""
    lp = (1.0 + math.sqrt(beta)) ** 2
    lm = (1.0 - math.sqrt(beta)) ** 2
    F = (math.sqrt(1.0 + gamma * lp) - math.sqrt(1.0 + gamma * lm)) ** 2
    return beta * math.log2(1.0 + gamma - F / 4.0)


def linear_th_ns1(beta: float, gamma: float) -> float:
    """Any linear front end on TH with one pulse per symbol.

    The output SINR of user 1 is ``gamma / (v gamma + 1)`` with ``v`` the
    number of interferers on its chip, whatever the front end.
    """
    _check_load(beta)
    _check_snr(gamma)
    return beta * _poisson_series(
        beta, lambda k: (np.log1p((k + 1.0) * gamma) - np.log1p(k * gamma)) / LN2)


# ---------------------------------------------------------------- Gaussian mixtures


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Zero-mean circularly-symmetric complex Gaussian mixture.

    ``variances[k]`` is ``E|Z|^2`` of component ``k``. Weights may sum to
    slightly less than one when they come from a truncated Poisson law.
    """

    weights: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        v = np.array(self.variances, dtype=float).ravel()
        if w.shape != v.shape or w.size == 0:
            raise ValueError("weights and variances must be nonempty and of equal length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ValueError(f"weights sum to {w.sum()}, expected 1")
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise ValueError("variances must be finite and positive")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "variances", v)

    @property
    def size(self) -> int:
        return self.weights.size

    def log_radial_density(self, t):
        """``log p`` at ``|z|^2 = t``."""
        t = np.asarray(t, dtype=float)[..., None]
        keep = self.weights > 0
        logw = np.log(self.weights[keep]) - np.log(math.pi * self.variances[keep])
        return logsumexp(logw - t / self.variances[keep], axis=-1)

    def real_marginal_pdf(self, x):
        """Density of ``Re Z``: each component contributes ``N(0, sigma^2/2)``."""
        x = np.asarray(x, dtype=float)[..., None]
        s2 = self.variances / 2.0
        return np.sum(self.weights * np.exp(-x * x / (2 * s2)) / np.sqrt(2 * math.pi * s2), axis=-1)


def mixture_pz(beta: float, gamma: float, Ns: int = 1) -> GaussianMixture:
    """Interference-plus-noise law at the matched-filter output (unit noise)."""
    _check_load(beta)
    _check_snr(gamma)
    _check_pulses(Ns)
    if gamma == 0:
        return GaussianMixture([1.0], [1.0])
    n2 = float(Ns * Ns)
    w = poisson_weights(beta * n2)
    k = np.arange(w.size)
    return GaussianMixture(w, 1.0 + k * gamma / n2)


def mixture_py(beta: float, gamma: float, Ns: int = 1) -> GaussianMixture:
    """Matched-filter output law including the desired user's Gaussian symbol."""
    _check_load(beta)
    _check_snr(gamma)
    _check_pulses(Ns)
    if gamma == 0:
        return GaussianMixture([1.0], [1.0])
    n2 = float(Ns * Ns)
    w = poisson_weights(beta * n2)
    k = np.arange(w.size)
    return GaussianMixture(w, 1.0 + gamma + k * gamma / n2)


def _log_radius_range(mix: GaussianMixture):
    # Window in u = log|z|^2 outside of which the integrands are below 1e-18.
    live = mix.variances[mix.weights > 0]
    return math.log(live.min()) - 45.0, math.log(live.max()) + math.log(90.0)


def _breakpoints(mix: GaussianMixture):
    return tuple(np.unique(np.log(mix.variances[mix.weights > 0])))


def mixture_entropy(mix: GaussianMixture, atol: float = ENTROPY_ATOL) -> float:
    """Differential entropy in bits.

    Circular symmetry reduces the planar integral to one over
    ``t = |z|^2`` (``dz = pi dt``), which is then integrated in ``u = log t``
    so that every component's scale gets comparable resolution.
    """
    if mix.size == 1 or np.all(mix.variances == mix.variances[0]):
        return math.log2(math.pi * math.e * float(mix.variances[0]))

    def integrand(u):
        t = np.exp(u)
        logp = mix.log_radial_density(t)
        return -math.pi * t * np.exp(logp) * logp / LN2

    lo, hi = _log_radius_range(mix)
    value, _ = integrate(integrand, lo, hi, atol=atol / 10, breakpoints=_breakpoints(mix))
    return value


def entropy_bounds(mix: GaussianMixture) -> tuple[float, float]:
    """``(h_G, h_G + h_P)``: component-average entropy and that plus the label entropy."""
    w = mix.weights
    live = w > 0
    h_g = float(np.sum(w * np.log2(math.pi * math.e * mix.variances)))
    h_p = float(-np.sum(w[live] * np.log2(w[live])))
    return h_g, h_g + h_p


def mixture_moment(mix: GaussianMixture, order: int) -> float:
    """``E|Z|^(2 order)`` by quadrature of the radial density."""
    if order < 0:
        raise ValueError("order must be nonnegative")

    def integrand(u):
        t = np.exp(u)
        return math.pi * t ** (order + 1) * np.exp(mix.log_radial_density(t))

    lo, hi = _log_radius_range(mix)
    value, _ = integrate(integrand, lo, hi, atol=1e-300, rtol=1e-13,
                         breakpoints=_breakpoints(mix))
    return value


def mixture_kurtosis(mix: GaussianMixture) -> float:
    """``E|Z|^4 / (E|Z|^2)^2`` by quadrature (2 for a single complex Gaussian)."""
    return mixture_moment(mix, 2) / mixture_moment(mix, 1) ** 2


def kurtosis_pz(beta: float, gamma: float, Ns: int = 1) -> float:
    """Closed form ``2 + (2/Ns^2) beta gamma^2 / (1 + beta gamma)^2``."""
    return 2.0 + 2.0 / (Ns * Ns) * beta * gamma * gamma / (1.0 + beta * gamma) ** 2


def entropy_difference(mix_a: GaussianMixture, mix_b: GaussianMixture,
                       atol: float = 1e-12, rtol: float = 1e-7) -> float:
    """``h(mix_a) - h(mix_b)`` in bits as a single integral.

    Integrating the difference of the two integrands keeps the relative
    accuracy when the mixtures are close, where subtracting two separately
    computed entropies would leave only quadrature noise.
    """
    def integrand(u):
        t = np.exp(u)
        la = mix_a.log_radial_density(t)
        lb = mix_b.log_radial_density(t)
        return -math.pi * t * (np.exp(la) * la - np.exp(lb) * lb) / LN2

    lo_a, hi_a = _log_radius_range(mix_a)
    lo_b, hi_b = _log_radius_range(mix_b)
    cuts = _breakpoints(mix_a) + _breakpoints(mix_b)
    value, _ = integrate(integrand, min(lo_a, lo_b), max(hi_a, hi_b),
                         atol=atol, rtol=rtol, breakpoints=cuts)
    return value


def sumf_th_star(beta: float, gamma: float, Ns: int = 1) -> float:
    """Matched-filter bank whose decoder knows only the interference statistics.

    ``beta [h(P_Y) - h(P_Z)]`` with both outputs Gaussian mixtures.
    """
    if gamma == 0:
        return 0.0
    return beta * entropy_difference(mixture_py(beta, gamma, Ns), mixture_pz(beta, gamma, Ns))


# ---------------------------------------------------------------- Eb/N0 mapping


FORMULAS = {
    "c_opt_th_ns1": c_opt_th_ns1,
    "c_opt_ds": c_opt_ds,
    "orthogonal": orthogonal,
    "sumf_ds": sumf_ds,
    "sumf_th_knownS": sumf_th_knownS,
    "sumf_th_star": sumf_th_star,
    "sumf_th_dense_limit": sumf_th_dense_limit,
    "deco_ds": deco_ds,
    "mmse_ds": mmse_ds,
    "linear_th_ns1": linear_th_ns1,
}
TAKES_NS = {"sumf_th_knownS", "sumf_th_star"}


def resolve(formula, Ns: int | None = None):
    """Turn a formula name (or callable) into ``f(beta, gamma)``."""
    if callable(formula):
        return formula
    try:
        f = FORMULAS[formula]
    except KeyError:
        raise DomainError(f"unknown formula {formula!r}; choose from {sorted(FORMULAS)}") from None
    if formula in TAKES_NS:
        n = 1 if Ns is None else Ns
        return lambda beta, gamma: f(beta, gamma, n)
    if Ns not in (None, 1) and formula.endswith("ns1"):
        raise DomainError(f"{formula} is defined for Ns=1 only")
    return f


def evaluate(formula, beta: float, gammas, Ns: int | None = None) -> np.ndarray:
    f = resolve(formula, Ns)
    return np.array([f(beta, float(g)) for g in np.atleast_1d(gammas)])


def default_gamma_grid(points_per_decade: int = 10) -> np.ndarray:
    return np.logspace(-8, 8, 16 * points_per_decade + 1)


def ebn0_curve(formula, beta: float, gammas=None, Ns: int | None = None,
               tag: str = "") -> SweepResult:
    """Parametric curve ``gamma -> (Eb/N0 in dB, C)`` sorted by ``Eb/N0``.

    A point at ``gamma = 1e-8`` is prepended when the grid does not reach
    within 0.05 dB of the minimum energy per bit.
    """
    gammas = default_gamma_grid() if gammas is None else np.asarray(gammas, dtype=float)
    if np.any(np.diff(gammas) <= 0) or np.any(gammas <= 0):
        raise DomainError("gamma grid must be positive and strictly increasing")
    f = resolve(formula, Ns)
    floor_db = 10 * math.log10(beta * 1e-8 / f(beta, 1e-8))
    C = np.array([f(beta, float(g)) for g in gammas])
    eta_db = 10 * np.log10(beta * gammas / C)
    if eta_db[0] > floor_db + 0.05:
        gammas = np.concatenate([[1e-8], gammas])
        C = np.concatenate([[f(beta, 1e-8)], C])
        eta_db = np.concatenate([[floor_db], eta_db])
    drops = np.diff(C) < -1e-12 * np.maximum(np.abs(C[1:]), 1.0)
    if np.any(drops):
        i = int(np.argmax(drops))
        raise NumericalError(
            f"capacity decreases between gamma={gammas[i]:g} and gamma={gammas[i + 1]:g}")
    order = np.argsort(eta_db, kind="stable")
    name = formula if isinstance(formula, str) else getattr(formula, "__name__", "formula")
    return SweepResult(
        axis="ebn0_db", x=eta_db[order], mean=C[order],
        metadata={"formula": name, "beta": beta, "Ns": Ns, "kind": "analytic", "tag": tag,
                  "gamma": gammas[order]},
    )


def gamma_at_ebn0(formula, beta: float, ebn0_db: float, Ns: int | None = None) -> float:
    """Per-user SNR at which ``beta gamma / C(gamma)`` equals the target ``Eb/N0``.

    Returns 0 when the target lies at or below the minimum energy per bit.
    ``Eb/N0`` is increasing in ``gamma`` for every concave curve, so a
    bracketing root search on ``log gamma`` is safe.
    """
    f = resolve(formula, Ns)
    target = ebn0_db * LN10_OVER_10

    def excess(u):
        g = math.exp(u)
        return math.log(beta * g / f(beta, g)) - target

    lo, hi = math.log(1e-10), math.log(1e4)
    if excess(lo) >= 0:
        return 0.0
    while excess(hi) < 0:
        hi += math.log(100.0)
        if hi > math.log(1e18):
            raise NumericalError(f"Eb/N0 = {ebn0_db} dB not reached for gamma <= 1e18")
    return math.exp(brentq(excess, lo, hi, xtol=1e-13, rtol=1e-13))


def capacity_at_ebn0(formula, beta: float, ebn0_db: float, Ns: int | None = None) -> float:
    g = gamma_at_ebn0(formula, beta, ebn0_db, Ns)
    return 0.0 if g == 0 else resolve(formula, Ns)(beta, g)


# ---------------------------------------------------------------- asymptotics


@dataclass(frozen=True)
class AsymptoticParams:
    """Low- and high-SNR descriptors of a ``C(Eb/N0)`` curve.

    ``eta_min`` is linear; slopes are in b/s/Hz per 3 dB; ``L_inf`` is in
    3 dB units and ``None`` when the high-SNR slope is zero.
    """

    eta_min: float
    S0: float
    S_inf: float
    L_inf: float | None = None
    converged: bool = True
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.eta_min > 0:
            raise NumericalError(f"eta_min must be positive, got {self.eta_min}")
        if not 0 < self.S0 <= 2 + 1e-9:
            raise NumericalError(f"S0 must lie in (0, 2], got {self.S0}")
        if self.S_inf < -1e-9:
            raise NumericalError(f"S_inf must be nonnegative, got {self.S_inf}")

    @property
    def eta_min_db(self) -> float:
        return 10 * math.log10(self.eta_min)


LOW_SNR = 1e-8
WIDEBAND_STEP = 1e-4
HIGH_SNR_EXPONENTS = (18, 20, 22)
SLOPE_RTOL = 0.01
ZERO_SLOPE = 1e-4


def wideband_parameters(formula, beta: float, Ns: int | None = None) -> tuple[float, float]:
    """Numeric ``(eta_min, S0)``.

    ``eta_min = beta gamma / C`` at ``gamma = 1e-8``. ``S0`` uses the first
    two derivatives at zero extracted from ``C(h)`` and ``C(2h)``.
    """
    f = resolve(formula, Ns)
    eta_min = beta * LOW_SNR / f(beta, LOW_SNR)
    h = WIDEBAND_STEP
    c1, c2 = f(beta, h), f(beta, 2 * h)
    first = (4 * c1 - c2) / (2 * h)
    second = (c2 - 2 * c1) / (h * h)
    return eta_min, -2 * LN2 * first * first / second


def high_snr_parameters(formula, beta: float, Ns: int | None = None):
    """Numeric ``(S_inf, L_inf, converged)`` from octave slopes between 2^18 and 2^22."""
    f = resolve(formula, Ns)
    e0, e1, e2 = HIGH_SNR_EXPONENTS
    c0, c1, c2 = (f(beta, 2.0**e) for e in HIGH_SNR_EXPONENTS)
    slope = (c2 - c0) / (e2 - e0)
    lower, upper = (c1 - c0) / (e1 - e0), (c2 - c1) / (e2 - e1)
    converged = abs(upper - lower) <= max(SLOPE_RTOL * abs(slope), 1e-9)
    if slope < ZERO_SLOPE:
        # A bounded curve: both octave slopes vanish, which is the limit itself.
        converged = max(abs(lower), abs(upper)) < ZERO_SLOPE
        return max(slope, 0.0), None, converged
    L_inf = math.log2(beta) + e2 - c2 / slope
    return slope, L_inf, converged


def asymptotics(formula, beta: float, Ns: int | None = None) -> AsymptoticParams:
    eta_min, S0 = wideband_parameters(formula, beta, Ns)
    S_inf, L_inf, converged = high_snr_parameters(formula, beta, Ns)
    notes = () if converged else ("high-SNR slope unconverged: octave slopes differ by more than 1%",)
    return AsymptoticParams(eta_min, S0, S_inf, L_inf, converged, notes)


def th_ns1_asymptotics(beta: float) -> AsymptoticParams:
    """Closed-form parameters of :func:`c_opt_th_ns1`."""
    _check_load(beta)
    S_inf = -math.expm1(-beta)
    offset = _poisson_series(beta, lambda k: np.log2(np.maximum(k, 1.0)))
    L_inf = math.log2(beta) - offset / S_inf
    return AsymptoticParams(LN2, 2 * beta / (1 + beta), S_inf, L_inf)
