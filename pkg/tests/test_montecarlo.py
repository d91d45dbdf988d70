import math

import numpy as np
import pytest

from thspeff import capacity as cap
from thspeff import montecarlo as mc
from thspeff.ensembles import EnsembleSpec, sample
from thspeff.errors import MonteCarloError
from thspeff.laws import rank_upper_bound
from thspeff.spectra import logdet_capacity


def small_experiment(**over):
    base = dict(ensemble=EnsembleSpec.th(20, 10, 2), axis="beta", grid=(0.3, 0.6, 1.2),
                trials=40, statistics={"esd_moments", "logdet", "sumf_sinr"}, seed=99, gamma=3.0)
    base.update(over)
    return mc.Experiment(**base)


def as_arrays(res):
    return {k: (v.x.tobytes(), v.mean.tobytes(), v.std.tobytes()) for k, v in res.items()}


def test_results_do_not_depend_on_thread_count(monkeypatch):
    exp = small_experiment()
    one = as_arrays(mc.run(exp, threads=1))
    four = as_arrays(mc.run(exp, threads=4))
    monkeypatch.setenv("THSPEFF_THREADS", "3")
    env = as_arrays(mc.run(exp))
    assert one == four == env


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("THSPEFF_THREADS", "2")
    assert mc.worker_count() == 2
    monkeypatch.setenv("THSPEFF_THREADS", "zero")
    with pytest.raises(ValueError):
        mc.worker_count()


def test_snr_axis_reuses_matrices():
    exp = mc.Experiment(EnsembleSpec.th(16, 8, 1), "gamma", (1.0, 10.0, 100.0), 30,
                        {"logdet"}, seed=4)
    res = mc.run(exp)["logdet"]
    spec = EnsembleSpec.th(16, 8, 1, 4)
    for i, g in enumerate(exp.grid):
        direct = np.mean([logdet_capacity(sample(spec, 0, t), g) for t in range(30)])
        assert res.mean[i] == pytest.approx(direct, rel=1e-14)
    assert np.all(np.diff(res.mean) > 0)


def test_grid_points_are_independent_of_grid_extent():
    a = mc.run(small_experiment(grid=(0.3, 0.6)))["m2"]
    b = mc.run(small_experiment(grid=(0.3, 0.6, 1.2, 2.4)))["m2"]
    assert np.array_equal(a.mean, b.mean[:2])


def test_first_moment_is_load_and_std_is_reported():
    res = mc.run(small_experiment())
    assert np.allclose(res["m1"].mean, [6 / 20, 12 / 20, 24 / 20])
    assert np.all(res["m1"].std < 1e-12)
    assert res["m2"].empirical and np.all(res["m2"].trials == 40)
    assert np.allclose(res["m2"].stderr, res["m2"].std / math.sqrt(40))


def test_reported_stderr_halves_when_trials_quadruple():
    def point(trials):
        exp = mc.Experiment(EnsembleSpec.th(30, 30, 1), "N", (30,), trials, {"esd_moments"}, seed=7)
        return mc.run(exp)["m2"].stderr[0]

    assert point(100) / point(400) == pytest.approx(2.0, rel=0.2)


def test_spread_of_means_halves_when_trials_quadruple():
    # 200 replications put the ratio's own noise near 7%, well inside the 20% band.
    def spread(trials, reps=200):
        means = [mc.run(mc.Experiment(EnsembleSpec.th(30, 30, 1), "N", (30,), trials,
                                      {"esd_moments"}, seed=1000 + r), threads=1)["m2"].mean[0]
                 for r in range(reps)]
        return np.std(means, ddof=1)

    assert spread(25) / spread(100) == pytest.approx(2.0, rel=0.2)


def test_experiment_validation():
    with pytest.raises(ValueError):
        small_experiment(axis="time")
    with pytest.raises(ValueError):
        small_experiment(grid=(1.0, 0.5))
    with pytest.raises(ValueError):
        small_experiment(gamma=None)
    with pytest.raises(ValueError):
        small_experiment(statistics={"kurtosis"})
    with pytest.raises(ValueError):
        mc.Experiment(EnsembleSpec.th(4, 4), "ebn0_db", (1.0,), 2, {"logdet"})


def test_numerical_failures_are_wrapped(monkeypatch):
    from thspeff.errors import FactorizationError

    def broken(m, gamma):
        raise FactorizationError("boom")

    monkeypatch.setattr(mc, "logdet_capacity", broken)
    with pytest.raises(MonteCarloError):
        mc.run(small_experiment(trials=2), threads=1)


def test_ns_fraction_scales_pulses():
    exp = small_experiment(axis="N", grid=(16, 32), ns_fraction=0.5)
    assert [exp.spec_at(i).Ns for i in range(2)] == [8, 16]
    assert exp.spec_at(1).K == 16


def test_rank_upper_bound_dominates_two_pulse_rank():
    grid = (0.4, 0.8, 1.2, 1.6, 2.0)
    for Ns in (1, 2):
        exp = mc.Experiment(EnsembleSpec.th(50, 50, Ns), "beta", grid, 200, {"rank"}, seed=21)
        res = mc.run(exp)["rank"]
        bound = rank_upper_bound(np.array(grid), Ns)
        assert np.all(res.mean <= bound + 2 * res.std)


def test_single_user_matched_filter_is_interference_free():
    exp = mc.Experiment(EnsembleSpec.th(8, 1, 1), "N", (8,), 5, seed=2)
    res = mc.empirical_sumf_mi(exp, gamma=10.0)
    assert res.mean[0] == pytest.approx(math.log2(11) / 8, rel=1e-14)
    per_user = res.mean[0] * 8
    assert per_user == pytest.approx(math.log2(1 + 10.0), rel=1e-14)


def test_one_pulse_matched_filter_matches_series():
    exp = mc.Experiment(EnsembleSpec.th(200, 200, 1), "N", (200,), 300, seed=12)
    res = mc.empirical_sumf_mi(exp, gamma=10.0)
    series = cap.sumf_th_knownS(1.0, 10.0, 1)
    assert abs(res.mean[0] - series) <= 3 * res.stderr[0]


def test_empirical_capacity_at_fixed_ebn0():
    spec = EnsembleSpec.th(30, 15, 1)
    p = mc.empirical_capacity_at_ebn0(spec, 6.0, 40, seed=3)
    assert p.gamma > 0 and p.trials == 40
    assert 10 * math.log10(spec.beta * p.gamma / p.mean) == pytest.approx(6.0, abs=1e-8)
    assert mc.empirical_capacity_at_ebn0(spec, -1.7, 10, seed=3).gamma == 0.0


def test_interference_samples_are_reproducible_and_gaussian_without_users():
    spec = EnsembleSpec.th(50, 50, 1)
    a = mc.interference_samples(spec, 10.0, 5000, seed=8)
    b = mc.interference_samples(spec, 10.0, 5000, seed=8)
    assert np.array_equal(a, b)
    z = mc.interference_samples(spec, 0.0, 200000, seed=8)
    assert mc.complex_kurtosis(z) == pytest.approx(2.0, abs=0.03)
    assert np.mean(np.abs(a) ** 2) == pytest.approx(1 + 49 / 50 * 10, rel=0.05)


def test_histogram_is_a_density():
    exp = mc.Experiment(EnsembleSpec.th(100, 100, 1), "gamma", (10.0,), 50000, frozenset(), seed=5)
    h = mc.interference_histogram(exp, 10.0, bins=61)
    width = np.diff(h.edges)
    assert np.sum(h.density * width) <= 1.0
    assert np.sum(h.mixture_density * width) == pytest.approx(1.0, abs=0.01)
    assert np.sum(h.gaussian_density * width) == pytest.approx(1.0, abs=0.01)
    assert h.kurtosis_limit == pytest.approx(cap.kurtosis_pz(1.0, 10.0, 1))


def test_variance_decay_third_moment():
    table = mc.variance_decay_check(3, [0.5], trials=2000, seed=31)
    assert table.passed
    with pytest.raises(ValueError):
        mc.variance_decay_check(2, [1.0], Ns=2)
