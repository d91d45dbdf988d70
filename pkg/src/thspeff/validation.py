"""Self-check suites run by ``thspeff validate``.

Each check yields a :class:`Check` record; a suite passes when every record
does. Monte Carlo checks use fixed seeds so reports are reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import capacity, montecarlo
from .ensembles import EnsembleSpec, sample
from .laws import (MarchenkoPasturLaw, expected_moment_finite, mp_expectation, mp_moment,
                   poisson_moment, rank_upper_bound)
from .receivers import LinearFrontEnd, gain_closed_form, gain_direct


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    expected: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("observed", "expected", "tolerance"):
            d[key] = float(d[key])
        d["pass"] = bool(d.pop("passed"))
        return d


def _within(name, observed, expected, tol):
    return Check(name, float(observed), float(expected), float(tol),
                 bool(abs(observed - expected) <= tol))


def _at_most(name, observed, bound, slack=0.0):
    return Check(name, float(observed), float(bound), float(slack), bool(observed <= bound + slack))


def brute_force_mean_moment(N: int, K: int, L: int) -> float:
    """Average of ``m_L`` over every one-pulse matrix of size ``N x K`` (signs do not matter)."""
    total = 0
    for chips in itertools.product(range(N), repeat=K):
        counts = np.bincount(chips, minlength=N)
        total += int(np.sum(counts**L))
    return total / (N * N**K)


def moments_suite(seed: int = 1):
    yield _within("finite_moment_N2_K2_L2_exact", expected_moment_finite(2, 2, 2),
                  brute_force_mean_moment(2, 2, 2), 0.0)
    for L in range(1, 6):
        yield _within(f"mp_moment_quadrature_beta0.5_L{L}",
                      mp_expectation(MarchenkoPasturLaw(0.5), lambda x, L=L: x**L),
                      mp_moment(0.5, L), 1e-6)
    exp = montecarlo.Experiment(EnsembleSpec.th(200, 100, 1), "N", (200,), 1000,
                                {"esd_moments"}, seed=seed)
    res = montecarlo.run(exp)
    for L in (2, 3, 4):
        r = res[f"m{L}"]
        yield _within(f"mean_m{L}_N200_beta0.5", r.mean[0], poisson_moment(0.5, L),
                      3 * float(r.stderr[0]))
    table = montecarlo.variance_decay_check(2, [1.0], seed=seed)
    for row in table.rows:
        if row.ratio_to_4N is not None:
            yield Check(f"variance_ratio_m2_N{row.N}_vs_{4 * row.N}", row.ratio_to_4N, 4.0,
                        1.0, bool(row.passed))
    zero = montecarlo.variance_decay_check(1, [1.0], trials=200, seed=seed)
    yield _within("variance_m1_is_zero", max(r.variance for r in zero.rows), 0.0, 0.0)


def rank_suite(seed: int = 2):
    grid = tuple(np.round(np.arange(0.2, 2.01, 0.2), 10))
    for Ns in (1, 2):
        exp = montecarlo.Experiment(EnsembleSpec.th(50, 50, Ns), "beta", grid, 500,
                                    {"rank"}, seed=seed)
        res = montecarlo.run(exp)["rank"]
        for b, m, s in zip(grid, res.mean, res.std):
            if Ns == 1:
                yield _within(f"rank_ns1_beta{b:g}", m, -math.expm1(-b), 0.02)
            else:
                yield _at_most(f"rank_ns2_beta{b:g}_below_bound", m,
                               float(rank_upper_bound(b, 2)), 2 * s)


def receivers_suite(seed: int = 6, instances: int = 100):
    rng = np.random.default_rng(seed)
    worst_g = worst_c = 0.0
    for i in range(instances):
        N = int(rng.integers(1, 17))
        K = int(rng.integers(1, 2 * N + 1))
        m = sample(EnsembleSpec.th(N, K, 1, seed), i)
        for alpha, eta in itertools.product((1e-6, 0.1, 1.0), (0, 1)):
            fe = LinearFrontEnd(alpha, eta)
            a, b = gain_closed_form(m, fe), gain_direct(m, fe)
            worst_g = max(worst_g, float(np.max(np.abs(a.G - b.G))))
            worst_c = max(worst_c, float(np.max(np.abs(a.noise_cov - b.noise_cov))))
    yield Check("gain_closed_form_vs_direct", worst_g, 0.0, 1e-10, worst_g < 1e-10)
    yield Check("noise_cov_closed_form_vs_direct", worst_c, 0.0, 1e-10, worst_c < 1e-10)
    worst = 0.0
    for beta in np.linspace(0.1, 4.0, 20):
        for gamma in np.logspace(-2, 4, 20):
            worst = max(worst, abs(capacity.linear_th_ns1(beta, gamma)
                                   - capacity.sumf_th_knownS(beta, gamma, 1)))
    yield Check("linear_equals_sumf_one_pulse", worst, 0.0, 1e-12, worst <= 1e-12)


def entropy_suite(seed: int = 9):
    for var in (0.25, 1.0, 7.0):
        h = capacity.mixture_entropy(capacity.GaussianMixture([1.0], [var]))
        yield _within(f"single_gaussian_entropy_var{var:g}", h,
                      math.log2(math.pi * math.e * var), 1e-8)
    h = capacity.mixture_entropy(capacity.GaussianMixture([0.3, 0.7], [0.5, 40.0]))
    lo, hi = capacity.entropy_bounds(capacity.GaussianMixture([0.3, 0.7], [0.5, 40.0]))
    yield Check("entropy_sandwich_example", h, lo, hi - lo, bool(lo <= h <= hi))
    worst = 0.0
    for beta, gamma, Ns in itertools.product((0.5, 1, 2), (1, 10, 100), (1, 2)):
        q = capacity.mixture_kurtosis(capacity.mixture_pz(beta, gamma, Ns))
        worst = max(worst, abs(q - capacity.kurtosis_pz(beta, gamma, Ns)))
    yield Check("kurtosis_quadrature_vs_closed_form", worst, 0.0, 1e-6, worst < 1e-6)


def slopes_suite():
    for beta in (0.5, 1.0, 2.0):
        s_inf, _, _ = capacity.high_snr_parameters("c_opt_th_ns1", beta)
        target = -math.expm1(-beta)
        yield _within(f"S_inf_c_opt_th_ns1_beta{beta:g}", s_inf, target, 0.01 * target)
        _, s0 = capacity.wideband_parameters("c_opt_th_ns1", beta)
        yield _within(f"S0_c_opt_th_ns1_beta{beta:g}", s0, 2 * beta / (1 + beta),
                      0.01 * 2 * beta / (1 + beta))
        eta, _ = capacity.wideband_parameters("c_opt_th_ns1", beta)
        yield _within(f"eta_min_c_opt_th_ns1_beta{beta:g}", eta, math.log(2), 1e-3)
    s_inf, _, _ = capacity.high_snr_parameters("sumf_th_star", 1.0, 1)
    yield _within("S_inf_sumf_th_star_beta1", s_inf, math.exp(-1), 0.02 * math.exp(-1))
    yield _within("mmse_ds_beta2_gamma1e6", capacity.mmse_ds(2.0, 1e6), 2.0, 1e-3)


SUITES = {
    "moments": moments_suite,
    "rank": rank_suite,
    "receivers": receivers_suite,
    "entropy": entropy_suite,
    "slopes": slopes_suite,
}


def run_suite(name: str):
    """Yield ``(suite, Check)`` pairs; ``name="all"`` runs every suite."""
    names = list(SUITES) if name == "all" else [name]
    for n in names:
        if n not in SUITES:
            raise ValueError(f"unknown suite {n!r}; choose from {list(SUITES) + ['all']}")
        for check in SUITES[n]():
            yield n, check

