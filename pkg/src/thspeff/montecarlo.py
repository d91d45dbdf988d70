"""Monte Carlo harness over grids of load, SNR or dimension.

Every realization is drawn from the seed ``derive_seed(seed, point, trial)``,
so results do not depend on the number of worker threads or on the order in
which points are processed. Along SNR axes the matrices do not depend on the
grid point (point index 0 is used throughout), which gives common random
numbers across the curve.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import capacity
from .ensembles import EnsembleSpec, make_rng, sample
from .errors import MonteCarloError, NumericalError
from .receivers import conditional_sinr_user1, interference_powers
from .spectra import (DEFAULT_L_MAX, chip_counts, eigen_capacity, gram_eigenvalues,
                      logdet_capacity, normalized_rank, summarize)
from .sweep import SweepResult

STATISTICS = ("esd_moments", "rank", "logdet", "sumf_sinr", "linear_sinr")
SNR_AXES = ("gamma", "ebn0_db")
DEFAULT_TRIALS = {"rank": 500, "esd_moments": 500, "logdet": 100}


def worker_count() -> int:
    """Threads to use: ``THSPEFF_THREADS`` if set, else the CPU count."""
    env = os.environ.get("THSPEFF_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"THSPEFF_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Experiment:
    """A grid of Monte Carlo points.

    ``ensemble`` is the template; along the ``beta`` axis ``K`` is set to
    ``round(beta N)`` and along the ``N`` axis ``K = round(beta N)`` with
    ``beta`` taken from the template. ``gamma`` is the per-user SNR used by
    SNR-dependent statistics when the axis is not itself an SNR axis. For the
    ``ebn0_db`` axis each grid value is mapped to an SNR through the
    analytic ``reference`` formula.
    """

    ensemble: EnsembleSpec
    axis: str
    grid: tuple[float, ...]
    trials: int
    statistics: frozenset[str] = frozenset({"esd_moments"})
    seed: int = 0
    gamma: float | None = None
    reference: str | None = None
    L_max: int = DEFAULT_L_MAX
    ns_fraction: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "statistics", frozenset(self.statistics))
        if self.axis not in ("beta", "N", *SNR_AXES):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.grid or any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ValueError("grid must be nonempty and strictly increasing")
        unknown = self.statistics - set(STATISTICS)
        if unknown:
            raise ValueError(f"unknown statistics {sorted(unknown)}")
        needs_snr = self.statistics & {"logdet", "sumf_sinr", "linear_sinr"}
        if needs_snr and self.axis not in SNR_AXES and self.gamma is None:
            raise ValueError("SNR-dependent statistics need gamma when the axis is not an SNR axis")
        if self.axis == "ebn0_db" and self.reference is None:
            raise ValueError("the ebn0_db axis needs a reference formula to map Eb/N0 to gamma")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def beta(self) -> float:
        return self.ensemble.beta

    def spec_at(self, i: int) -> EnsembleSpec:
        """Ensemble of grid point ``i``."""
        e = self.ensemble
        if self.axis == "beta":
            return _resize(e, e.N, self.grid[i], self.ns_fraction)
        if self.axis == "N":
            return _resize(e, int(round(self.grid[i])), e.beta, self.ns_fraction)
        return e

    def gamma_at(self, i: int) -> float:
        if self.axis == "gamma":
            return self.grid[i]
        if self.axis == "ebn0_db":
            return capacity.gamma_at_ebn0(self.reference, self.beta, self.grid[i])
        return float(self.gamma)

    def seed_index(self, i: int) -> int:
        return 0 if self.axis in SNR_AXES else i


def _resize(e: EnsembleSpec, N: int, beta: float, ns_fraction):
    K = max(1, int(round(beta * N)))
    if e.kind == "DS":
        return EnsembleSpec("DS", N, K, N, e.seed)
    Ns = e.Ns if ns_fraction is None else max(1, int(round(ns_fraction * N)))
    return EnsembleSpec("TH", N, K, Ns, e.seed)


def _one_trial(exp: Experiment, spec: EnsembleSpec, gamma, point: int, trial: int) -> dict:
    m = sample(replace(spec, seed=exp.seed), exp.seed_index(point), trial)
    out = {}
    if "esd_moments" in exp.statistics:
        summary = summarize(m, exp.L_max)
        out["moments"] = summary.moments
        out["rank"] = summary.normalized_rank
    elif "rank" in exp.statistics:
        out["rank"] = normalized_rank(m)
    if "logdet" in exp.statistics:
        out["logdet"] = logdet_capacity(m, gamma)
    if "sumf_sinr" in exp.statistics:
        # Average over all users of the realization; each user's term has the same law.
        varsigma = interference_powers(m)
        out["sumf_sinr"] = m.beta * float(np.mean(np.log1p(gamma / (1.0 + varsigma * gamma)))) / math.log(2.0)
    if "linear_sinr" in exp.statistics:
        out["linear_sinr"] = m.beta * math.log2(1.0 + conditional_sinr_user1(m, None, gamma))
    return out


def _run_point(exp: Experiment, point: int) -> list[dict]:
    spec = exp.spec_at(point)
    gamma = exp.gamma_at(point) if exp.statistics & {"logdet", "sumf_sinr", "linear_sinr"} else None
    rows = []
    for trial in range(exp.trials):
        try:
            rows.append(_one_trial(exp, spec, gamma, point, trial))
        except NumericalError as exc:
            raise MonteCarloError(point, trial, exc) from exc
    return rows


def _collect(exp: Experiment, rows_per_point, key, extract=lambda r, key: r[key]):
    values = np.array([[extract(r, key) for r in rows] for rows in rows_per_point])
    mean = values.mean(axis=1)
    std = values.std(axis=1, ddof=1) if exp.trials > 1 else np.zeros(len(exp.grid))
    return mean, std


def run(exp: Experiment, threads: int | None = None) -> dict[str, SweepResult]:
    """Evaluate every configured statistic at every grid point.

    Returns a mapping from statistic name (``m1`` .. ``mL``, ``rank``,
    ``logdet``, ``sumf_sinr``, ``linear_sinr``) to a :class:`SweepResult`.
    """
    threads = worker_count() if threads is None else max(1, threads)
    points = range(len(exp.grid))
    if threads == 1 or len(exp.grid) == 1:
        rows_per_point = [_run_point(exp, i) for i in points]
    else:
        with ThreadPoolExecutor(max_workers=min(threads, len(exp.grid))) as pool:
            rows_per_point = list(pool.map(lambda i: _run_point(exp, i), points))

    meta = {
        "kind": "empirical",
        "ensemble": exp.ensemble.kind,
        "N": exp.ensemble.N,
        "K": exp.ensemble.K,
        "Ns": exp.ensemble.Ns,
        "seed": exp.seed,
        "trials": exp.trials,
    }
    if exp.gamma is not None:
        meta["gamma"] = exp.gamma
    if exp.axis == "ebn0_db":
        meta["reference"] = exp.reference
    trials = np.full(len(exp.grid), exp.trials)
    x = np.array(exp.grid)

    def result(name, mean, std):
        return SweepResult(exp.axis, x, mean, std, trials, {**meta, "statistic": name})

    out = {}
    keys = set(rows_per_point[0][0])
    if "moments" in keys:
        for L in range(1, exp.L_max + 1):
            mean, std = _collect(exp, rows_per_point, L - 1, lambda r, j: r["moments"][j])
            out[f"m{L}"] = result(f"m{L}", mean, std)
    for name in ("rank", "logdet", "sumf_sinr", "linear_sinr"):
        if name in keys:
            out[name] = result(name, *_collect(exp, rows_per_point, name))
    return out


def empirical_sumf_mi(exp: Experiment, gamma: float | None = None) -> SweepResult:
    """Matched-filter mutual information with the decoder conditioned on ``S``.

    Per realization the interference power ``sum_{k != i} rho_ik^2`` of every
    user is computed, ``log2(1 + gamma / (1 + varsigma gamma))`` is averaged
    over users and multiplied by ``beta`` (b/s/Hz).
    """
    if gamma is not None:
        exp = replace(exp, gamma=gamma)
    exp = replace(exp, statistics=frozenset({"sumf_sinr"}))
    return run(exp)["sumf_sinr"]


def empirical_linear_mi(exp: Experiment, gamma: float | None = None) -> SweepResult:
    """Linear-receiver mutual information of user 1 from its chip occupancy (Ns=1)."""
    if gamma is not None:
        exp = replace(exp, gamma=gamma)
    exp = replace(exp, statistics=frozenset({"linear_sinr"}))
    return run(exp)["linear_sinr"]


@dataclass(frozen=True)
class EmpiricalPoint:
    gamma: float
    mean: float
    std: float
    trials: int


def empirical_capacity_at_ebn0(spec: EnsembleSpec, ebn0_db: float, trials: int,
                               seed: int = 0, point: int = 0) -> EmpiricalPoint:
    """Optimum-decoding capacity of the sample mean curve at a target ``Eb/N0``.

    The same ``trials`` matrices serve every SNR, so the mean curve
    ``C(gamma)`` is a smooth increasing function and ``beta gamma / C(gamma)``
    can be inverted by a bracketing root search. Returns the per-trial mean and
    standard deviation at the solution; ``gamma = 0`` when the target is at or
    below the minimum energy per bit of the mean curve.
    """
    spectra = [gram_eigenvalues(sample(replace(spec, seed=seed), point, t)) for t in range(trials)]
    beta = spec.beta
    target = ebn0_db * math.log(10.0) / 10.0

    def values(g):
        return np.array([eigen_capacity(e, g, spec.N) for e in spectra])

    def excess(u):
        g = math.exp(u)
        return math.log(beta * g / values(g).mean()) - target

    lo, hi = math.log(1e-10), math.log(1e4)
    if excess(lo) >= 0:
        return EmpiricalPoint(0.0, 0.0, 0.0, trials)
    while excess(hi) < 0:
        hi += math.log(100.0)
        if hi > math.log(1e18):
            raise NumericalError(f"Eb/N0 = {ebn0_db} dB not reached for gamma <= 1e18")
    g = math.exp(brentq(excess, lo, hi, xtol=1e-12, rtol=1e-12))
    v = values(g)
    return EmpiricalPoint(g, float(v.mean()), float(v.std(ddof=1)) if trials > 1 else 0.0, trials)


# ---------------------------------------------------------------- interference


def _user1_crosscorrelations(rng: np.random.Generator, spec: EnsembleSpec, batch: int):
    # Same law as ensembles.sample restricted to rho_{1k}, drawn for a batch of matrices.
    slots = rng.integers(0, spec.Nh, size=(batch, spec.K, spec.Ns))
    signs = 2 * rng.integers(0, 2, size=(batch, spec.K, spec.Ns)) - 1
    hits = (slots[:, 1:, :] == slots[:, :1, :]) * signs[:, 1:, :] * signs[:, :1, :]
    return hits.sum(axis=2) / spec.Ns


def interference_samples(spec: EnsembleSpec, gamma: float, n_samples: int,
                         seed: int = 0, batch: int = 4096) -> np.ndarray:
    """Samples of ``Z_1 = sqrt(gamma) sum_{k>=2} rho_1k b_k + n_1`` (unit noise).

    Symbols and noise are circularly-symmetric complex Gaussians. Every
    sample uses a fresh spreading matrix; block ``j`` of ``batch`` samples is
    drawn from ``derive_seed(seed, 0, j)``.
    """
    if spec.K < 1:
        raise ValueError("need at least one user")
    out = np.empty(n_samples, dtype=complex)
    for j, start in enumerate(range(0, n_samples, batch)):
        size = min(batch, n_samples - start)
        rng = make_rng(seed, 0, j)
        rho = _user1_crosscorrelations(rng, spec, size)
        b = (rng.standard_normal(rho.shape) + 1j * rng.standard_normal(rho.shape)) / math.sqrt(2)
        n = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2)
        out[start:start + size] = math.sqrt(gamma) * np.sum(rho * b, axis=1) + n
    return out


def complex_kurtosis(z) -> float:
    """``E|Z|^4 / (E|Z|^2)^2`` (2 for a circular complex Gaussian)."""
    p = np.abs(np.asarray(z)) ** 2
    return float(np.mean(p * p) / np.mean(p) ** 2)


@dataclass(frozen=True, eq=False)
class InterferenceHistogram:
    edges: np.ndarray
    density: np.ndarray
    mixture_density: np.ndarray
    gaussian_density: np.ndarray
    kurtosis: float
    kurtosis_limit: float
    samples: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def interference_histogram(exp: Experiment, gamma: float, bins: int = 101,
                           span: float = 4.0) -> InterferenceHistogram:
    """Histogram of ``Re Z_1`` against the mixture and moment-matched Gaussian densities.

    ``exp.trials`` is the number of samples. The histogram covers
    ``+- span`` standard deviations of ``Re Z_1``.
    """
    spec = exp.ensemble
    z = interference_samples(spec, gamma, exp.trials, exp.seed)
    power = 1.0 + spec.beta * gamma
    half_width = span * math.sqrt(power / 2.0)
    edges = np.linspace(-half_width, half_width, bins + 1)
    counts, _ = np.histogram(z.real, bins=edges)
    density = counts / (z.size * np.diff(edges))
    centers = 0.5 * (edges[1:] + edges[:-1])
    mix = capacity.mixture_pz(spec.beta, gamma, spec.Ns)
    gauss = np.exp(-centers**2 / power) / math.sqrt(math.pi * power)
    return InterferenceHistogram(
        edges, density, mix.real_marginal_pdf(centers), gauss,
        complex_kurtosis(z), capacity.kurtosis_pz(spec.beta, gamma, spec.Ns), z.size,
    )


# ---------------------------------------------------------------- variance decay


@dataclass(frozen=True)
class VarianceDecayRow:
    beta: float
    N: int
    variance: float
    ratio_to_4N: float | None = None
    passed: bool | None = None


@dataclass(frozen=True)
class VarianceDecayTable:
    L: int
    rows: tuple[VarianceDecayRow, ...] = field(default=())
    bounds: tuple[float, float] = (2.5, 6.0)

    @property
    def passed(self) -> bool:
        checks = [r.passed for r in self.rows if r.passed is not None]
        return all(checks) and bool(checks)


def _moment_samples(beta: float, N: int, L: int, trials: int, seed: int) -> np.ndarray:
    spec = EnsembleSpec.from_load("TH", N, beta, 1, seed)
    out = np.empty(trials)
    for t in range(trials):
        counts = chip_counts(sample(spec, N, t)).astype(np.int64)
        out[t] = float(np.sum(counts**L)) / N
    return out


def variance_decay_check(L: int, betas, Ns: int = 1, N_values=(100, 400),
                         trials: int = 2000, seed: int = 0,
                         bounds=(2.5, 6.0)) -> VarianceDecayTable:
    """Sample variance of ``m_L`` at each ``N`` and the ratio ``Var(N) / Var(4N)``.

    Only one pulse per symbol is supported. Along ``L = 1`` the variance is
    exactly zero and no ratio is formed.
    """
    if Ns != 1:
        raise ValueError("variance_decay_check supports Ns=1 only")
    rows = []
    for beta in betas:
        var = {N: float(np.var(_moment_samples(beta, N, L, trials, seed), ddof=1)) for N in N_values}
        for N in N_values:
            ratio, ok = None, None
            if 4 * N in var and var[4 * N] > 0:
                ratio = var[N] / var[4 * N]
                ok = bounds[0] <= ratio <= bounds[1]
            rows.append(VarianceDecayRow(beta, N, var[N], ratio, ok))
    return VarianceDecayTable(L, tuple(rows), tuple(bounds))
