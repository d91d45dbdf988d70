"""Acceptance criteria 1 to 10, each at its stated tolerance.

Criterion ``k`` uses seed ``k``. Each test records one PASS/FAIL line, which
is printed immediately and repeated in the terminal summary.
"""

import itertools
import math
import time

import numpy as np
import pytest

from thspeff import capacity as cap
from thspeff import montecarlo as mc
from thspeff.ensembles import EnsembleSpec, sample
from thspeff.laws import expected_moment_finite, poisson_moment, rank_upper_bound
from thspeff.receivers import LinearFrontEnd, gain_closed_form, gain_direct, occupancy

LN2 = math.log(2.0)
LOADS = (0.5, 1.0, 2.0)


def within(name, observed, expected, tol):
    delta = abs(observed - expected)
    return name, bool(delta <= tol), f"observed {observed:.6g}, expected {expected:.6g}, tol {tol:.3g}"


def timed(checks, start, limit, name="runtime"):
    elapsed = time.perf_counter() - start
    checks.append((name, elapsed < limit, f"{elapsed:.1f}s vs {limit}s"))


def test_criterion_1_moment_convergence(report):
    start = time.perf_counter()
    exp = mc.Experiment(EnsembleSpec.th(200, 100, 1), "N", (200,), 1000, {"esd_moments"}, seed=1)
    res = mc.run(exp)
    checks = []
    for L in (2, 3, 4):
        r = res[f"m{L}"]
        checks.append(within(f"mean m{L}", r.mean[0], poisson_moment(0.5, L), 3 * r.stderr[0]))
    checks.append(within("finite N=2 K=2 L=2", expected_moment_finite(2, 2, 2), 1.5, 0.0))
    timed(checks, start, 60)
    report(1, "moment convergence to Poisson moments", checks)


def test_criterion_2_rank_law(report):
    start = time.perf_counter()
    grid = tuple(round(0.2 * i, 10) for i in range(1, 11))
    checks = []
    res1 = mc.run(mc.Experiment(EnsembleSpec.th(50, 50, 1), "beta", grid, 500, {"rank"}, seed=2))
    for b, m in zip(grid, res1["rank"].mean):
        checks.append(within(f"Ns=1 beta={b}", m, -math.expm1(-b), 0.02))
    res2 = mc.run(mc.Experiment(EnsembleSpec.th(50, 50, 2), "beta", grid, 500, {"rank"}, seed=2))
    for b, m, s in zip(grid, res2["rank"].mean, res2["rank"].std):
        bound = float(rank_upper_bound(b, 2))
        checks.append((f"Ns=2 beta={b}", bool(m <= bound + 2 * s),
                       f"mean {m:.4f}, bound {bound:.4f}, 2 sigma {2 * s:.4f}"))
    timed(checks, start, 60)
    report(2, "normalized rank law", checks)


def test_criterion_3_optimum_decoding_against_simulation(report):
    start = time.perf_counter()
    spec = EnsembleSpec.th(50, 25, 1)
    checks = []
    for ebn0 in np.arange(-1.5, 20.0 + 1e-9, 0.5):
        emp = mc.empirical_capacity_at_ebn0(spec, float(ebn0), 100, seed=3)
        ref = cap.capacity_at_ebn0("c_opt_th_ns1", 0.5, float(ebn0))
        checks.append(within(f"Eb/N0={ebn0:.1f} dB", emp.mean, ref, 0.05))
    timed(checks, start, 120)
    report(3, "optimum-decoding closed form vs simulation", checks)


def test_criterion_4_wideband_parameters(report):
    start = time.perf_counter()
    checks = []
    for beta in LOADS:
        for name, Ns in [("c_opt_th_ns1", None), ("sumf_th_knownS", 1), ("sumf_th_knownS", 2),
                         ("linear_th_ns1", None)]:
            eta, _ = cap.wideband_parameters(name, beta, Ns)
            checks.append(within(f"eta_min {name} Ns={Ns} beta={beta}", eta, LN2, 1e-3))
        _, s0 = cap.wideband_parameters("c_opt_th_ns1", beta)
        target = 2 * beta / (1 + beta)
        checks.append(within(f"S0 c_opt_th_ns1 beta={beta}", s0, target, 0.01 * target))
        target = 2 * beta / (1 + 2 * beta)
        for name, Ns in [("sumf_th_knownS", 1), ("sumf_th_knownS", 2), ("linear_th_ns1", None),
                         ("sumf_ds", None)]:
            _, s0 = cap.wideband_parameters(name, beta, Ns)
            checks.append(within(f"S0 {name} Ns={Ns} beta={beta}", s0, target, 0.01 * target))
    timed(checks, start, 30)
    report(4, "minimum energy per bit and wideband slope", checks)


def test_criterion_5_high_snr_slopes(report):
    start = time.perf_counter()
    checks = []
    for beta in LOADS:
        s, _, _ = cap.high_snr_parameters("c_opt_th_ns1", beta)
        target = -math.expm1(-beta)
        checks.append(within(f"c_opt_th_ns1 beta={beta}", s, target, 0.01 * target))
        for Ns in (1, 2):
            s, _, _ = cap.high_snr_parameters("sumf_th_knownS", beta, Ns)
            target = beta * math.exp(-Ns * Ns * beta)
            checks.append(within(f"sumf_th_knownS Ns={Ns} beta={beta}", s, target, 0.02 * target))
        s, _, _ = cap.high_snr_parameters("sumf_th_star", beta, 1)
        target = beta * math.exp(-beta)
        checks.append(within(f"sumf_th_star Ns=1 beta={beta}", s, target, 0.02 * target))
    checks.append(within("mmse_ds beta=2 gamma=1e6", cap.mmse_ds(2.0, 1e6), 2.0, 1e-3))
    timed(checks, start, 60)
    report(5, "high-SNR slopes", checks)


def test_criterion_6_receiver_algebra(report):
    start = time.perf_counter()
    rng = np.random.default_rng(6)
    worst_gain = worst_noise = 0.0
    for i in range(100):
        N = int(rng.integers(1, 17))
        K = int(rng.integers(1, 2 * N + 1))
        m = sample(EnsembleSpec.th(N, K, 1, 6), i)
        for alpha, eta in itertools.product((1e-6, 0.1, 1.0), (0, 1)):
            fe = LinearFrontEnd(alpha, eta)
            a, b = gain_closed_form(m, fe), gain_direct(m, fe)
            # The direct route forms W^T W from the solved front end.
            worst_gain = max(worst_gain, float(np.max(np.abs(a.G - b.G))))
            worst_noise = max(worst_noise, float(np.max(np.abs(a.noise_cov - b.noise_cov))))
    checks = [("gain", worst_gain < 1e-10, f"max |delta| {worst_gain:.3g}"),
              ("noise covariance", worst_noise < 1e-10, f"max |delta| {worst_noise:.3g}")]
    timed(checks, start, 30)
    report(6, "linear receiver closed forms vs direct solve", checks)


def test_criterion_7_linear_equals_known_signature_matched_filter(report):
    start = time.perf_counter()
    worst = 0.0
    for beta in np.linspace(0.1, 4.0, 20):
        for gamma in np.logspace(-2, 4, 20):
            worst = max(worst, abs(cap.linear_th_ns1(beta, gamma)
                                   - cap.sumf_th_knownS(beta, gamma, 1)))
    checks = [("20x20 grid", worst <= 1e-12, f"max |delta| {worst:.3g}")]
    N, gamma, trials = 200, 10.0, 100_000
    spec = EnsembleSpec.th(N, N, 1, 7)
    interferers = np.array([occupancy(sample(spec, 0, t))[0] - 1 for t in range(trials)])
    mi = np.log2(1 + gamma / (1 + interferers * gamma))
    sigma = mi.std(ddof=1) / math.sqrt(trials)
    checks.append(within("Monte Carlo via interferer count", mi.mean(),
                         cap.sumf_th_knownS(1.0, gamma, 1), 3 * sigma))
    timed(checks, start, 60)
    report(7, "linear receiver equals known-signature matched filter", checks)


def test_criterion_8_dense_limit_universality(report):
    start = time.perf_counter()
    checks = []
    exp = mc.Experiment(EnsembleSpec.th(128, 128, 64), "N", (128,), 20, seed=8)
    for gamma in (1.0, 10.0, 100.0):
        r = mc.empirical_sumf_mi(exp, gamma)
        target = cap.sumf_ds(1.0, gamma)
        checks.append(within(f"gamma={gamma:g}", r.mean[0], target, 0.02 * target))
    timed(checks, start, 60)
    report(8, "many-pulse matched filter approaches direct sequence", checks)


def test_criterion_9_mixture_entropy(report):
    start = time.perf_counter()
    checks = []
    for var in (0.25, 1.0, 7.0):
        h = cap.mixture_entropy(cap.GaussianMixture([1.0], [var]))
        checks.append(within(f"single Gaussian var={var}", h, math.log2(math.pi * math.e * var), 1e-8))
    rng = np.random.default_rng(9)
    violations = 0
    for _ in range(50):
        size = int(rng.integers(1, 7))
        mix = cap.GaussianMixture(rng.dirichlet(np.ones(size)), 10 ** rng.uniform(-2, 3, size))
        lo, hi = cap.entropy_bounds(mix)
        # One-component mixtures meet both bounds exactly; allow float rounding only.
        violations += not lo - 1e-12 <= cap.mixture_entropy(mix) <= hi + 1e-12
    checks.append(("sandwich on 50 mixtures", violations == 0, f"{violations} violations"))
    worst = 0.0
    for beta, gamma, Ns in itertools.product(LOADS, (1.0, 10.0, 100.0), (1, 2)):
        q = cap.mixture_kurtosis(cap.mixture_pz(beta, gamma, Ns))
        worst = max(worst, abs(q - cap.kurtosis_pz(beta, gamma, Ns)))
    checks.append(("kurtosis quadrature vs closed form", worst < 1e-6, f"max |delta| {worst:.3g}"))
    gamma = 10 ** 1.3
    z = mc.interference_samples(EnsembleSpec.th(100, 100, 1), gamma, 1_000_000, seed=9)
    target = cap.kurtosis_pz(1.0, gamma, 1)
    checks.append(within("empirical kurtosis", mc.complex_kurtosis(z), target, 0.05 * target))
    timed(checks, start, 120)
    report(9, "Gaussian-mixture entropy engine", checks)


def test_criterion_10_variance_decay(report):
    start = time.perf_counter()
    checks = []
    table = mc.variance_decay_check(2, [0.5, 1.0], trials=2000, seed=10)
    for row in table.rows:
        if row.ratio_to_4N is not None:
            checks.append((f"Var(m2) ratio beta={row.beta}", bool(row.passed),
                           f"ratio {row.ratio_to_4N:.3f} vs [2.5, 6]"))
    zero = mc.variance_decay_check(1, [0.5, 1.0], trials=2000, seed=10)
    checks.append(within("Var(m1)", max(r.variance for r in zero.rows), 0.0, 0.0))
    timed(checks, start, 60)
    report(10, "variance decay of empirical moments", checks)
