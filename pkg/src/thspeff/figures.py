"""Curve sets for every figure the CLI can reproduce.

Each builder returns a list of :class:`Curve`. Analytic curves against
``Eb/N0`` use the parametric map ``gamma -> (beta gamma / C, C)`` on a dense
SNR grid; curves against the load at a fixed ``Eb/N0`` solve for the SNR
point by point. Monte Carlo curves carry per-point dispersion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import capacity, montecarlo
from .ensembles import EnsembleSpec
from .laws import MarchenkoPasturLaw, PoissonLaw, mp_density, rank_upper_bound
from .sweep import SweepResult

EBN0_RANGE = (-2.0, 50.0, 0.5)
BETA_RANGE = (0.05, 3.0, 0.05)
GAMMA_POINTS_PER_DECADE = 20


@dataclass(frozen=True)
class FigureConfig:
    """User overrides; ``None`` selects the figure's own default."""

    beta: float | None = None
    ns: int | None = None
    n: int | None = None
    trials: int | None = None
    seed: int = 0
    grid: tuple[float, float, float] | None = None
    ebn0_db: float | None = None


@dataclass(frozen=True, eq=False)
class Curve:
    name: str
    result: SweepResult
    x_label: str
    y_label: str
    params: dict = field(default_factory=dict)


def grid_values(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive arithmetic grid, rounded to kill accumulation error."""
    if step <= 0 or hi < lo:
        raise ValueError("grid needs lo <= hi and step > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def _gamma_grid():
    return np.logspace(-8, 8, 16 * GAMMA_POINTS_PER_DECADE + 1)


EBN0_LABEL = "Eb/N0 (dB)"
CAP_LABEL = "C or I (b/s/Hz)"


def _analytic_ebn0(name, formula, beta, lo, hi, Ns=None, tag=""):
    curve = capacity.ebn0_curve(formula, beta, _gamma_grid(), Ns, tag=tag)
    keep = (curve.x >= lo) & (curve.x <= hi)
    gammas = curve.metadata["gamma"][keep]
    s_inf, _, converged = capacity.high_snr_parameters(formula, beta, Ns)
    meta = {**curve.metadata, "gamma_min": float(gammas.min()), "gamma_max": float(gammas.max()),
            "S_inf": s_inf, "S_inf_converged": converged}
    del meta["gamma"]
    result = SweepResult("ebn0_db", curve.x[keep], curve.mean[keep], metadata=meta)
    return Curve(name, result, EBN0_LABEL, CAP_LABEL, {"beta": beta, "Ns": Ns})


def _analytic_beta(name, formula, betas, ebn0_db, Ns=None, tag="", domain=None):
    betas = np.asarray([b for b in betas if domain is None or domain(b)])
    y = np.array([capacity.capacity_at_ebn0(formula, float(b), ebn0_db, Ns) for b in betas])
    meta = {"formula": name, "kind": "analytic", "ebn0_db": ebn0_db, "Ns": Ns, "tag": tag}
    return Curve(name, SweepResult("beta", betas, y, metadata=meta), "beta", CAP_LABEL,
                 {"ebn0_db": ebn0_db, "Ns": Ns})


def _empirical_opt_ebn0(name, beta, Ns, N, trials, seed, lo, hi, tag):
    # Simulated optimum-decoding marks: SNR points chosen on the one-pulse closed
    # form, abscissa reported as the Eb/N0 of the simulated mean itself.
    K = max(1, int(round(beta * N)))
    grid = tuple(grid_values(max(lo, -1.5), min(hi, 20.0), 1.5))
    exp = montecarlo.Experiment(EnsembleSpec.th(N, K, Ns), "ebn0_db", grid, trials,
                                {"logdet"}, seed=seed, reference="c_opt_th_ns1")
    res = montecarlo.run(exp)["logdet"]
    gammas = np.array([exp.gamma_at(i) for i in range(len(grid))])
    x = 10 * np.log10((K / N) * gammas / res.mean)
    meta = {**res.metadata, "tag": tag, "gamma_min": float(gammas.min()),
            "gamma_max": float(gammas.max())}
    result = SweepResult("ebn0_db", x, res.mean, res.std, res.trials, meta)
    return Curve(name, result, EBN0_LABEL, "C (b/s/Hz)", {"beta": K / N, "Ns": Ns, "N": N})


def _empirical_opt_beta(name, betas, ebn0_db, Ns, N, trials, seed, tag):
    xs, means, stds = [], [], []
    for i, b in enumerate(betas):
        K = max(1, int(round(b * N)))
        p = montecarlo.empirical_capacity_at_ebn0(EnsembleSpec.th(N, K, Ns), ebn0_db, trials, seed, i)
        xs.append(K / N)
        means.append(p.mean)
        stds.append(p.std)
    meta = {"kind": "empirical", "ensemble": "TH", "N": N, "Ns": Ns, "seed": seed,
            "trials": trials, "ebn0_db": ebn0_db, "tag": tag}
    result = SweepResult("beta", xs, means, stds, np.full(len(xs), trials), meta)
    return Curve(name, result, "beta", "C (b/s/Hz)", {"ebn0_db": ebn0_db, "Ns": Ns, "N": N})


def _ebn0_range(cfg):
    lo, hi, _ = cfg.grid or EBN0_RANGE
    return lo, hi


def _betas(cfg, default=BETA_RANGE):
    return grid_values(*(cfg.grid or default))


# ---------------------------------------------------------------- figure builders


def fig_lsd(cfg: FigureConfig) -> list[Curve]:
    """Limiting eigenvalue laws: MP density plus atom, Poisson point masses."""
    beta = cfg.beta or 0.5
    law = MarchenkoPasturLaw(beta)
    x = np.linspace(0.0, law.upper, 401)
    tag = "lsd: limiting spectral laws"
    pois = PoissonLaw(beta)
    k = np.arange(min(pois.k_max, 12) + 1)
    out = [
        Curve("mp_density", SweepResult("lambda", x, mp_density(law, x),
                                        metadata={"kind": "analytic", "tag": tag}),
              "lambda", "density", {"beta": beta}),
        Curve("mp_atom", SweepResult("lambda", [0.0], [law.atom],
                                     metadata={"kind": "analytic", "tag": tag}),
              "lambda", "mass", {"beta": beta}),
        Curve("poisson_masses", SweepResult("lambda", k, pois.weights[: k.size],
                                            metadata={"kind": "analytic", "tag": tag}),
              "lambda", "mass", {"beta": beta}),
    ]
    return out


def fig2(cfg: FigureConfig) -> list[Curve]:
    """Optimum decoding against Eb/N0."""
    beta = cfg.beta or 0.5
    N = cfg.n or 50
    trials = cfg.trials or montecarlo.DEFAULT_TRIALS["logdet"]
    lo, hi = _ebn0_range(cfg)
    tag = "fig2: optimum decoding vs Eb/N0"
    curves = [
        _analytic_ebn0("c_opt_th_ns1", "c_opt_th_ns1", beta, lo, hi, tag=tag),
        _analytic_ebn0("c_opt_ds", "c_opt_ds", beta, lo, hi, tag=tag),
        _analytic_ebn0("orthogonal", "orthogonal", beta, lo, hi, tag=tag),
        _empirical_opt_ebn0("empirical_th_ns1", beta, 1, N, trials, cfg.seed, lo, hi, tag),
        _empirical_opt_ebn0("empirical_th_ns2", beta, cfg.ns or 2, N, trials, cfg.seed, lo, hi, tag),
    ]
    return curves


def fig3(cfg: FigureConfig) -> list[Curve]:
    """Normalized rank against load."""
    N = cfg.n or 50
    trials = cfg.trials or montecarlo.DEFAULT_TRIALS["rank"]
    betas = _betas(cfg, (0.1, 2.0, 0.1))
    dense = grid_values(betas[0], betas[-1], min(0.01, betas[-1] - betas[0] or 0.01))
    tag = "fig3: normalized rank vs load"
    ns2 = cfg.ns or 2
    meta = {"kind": "analytic", "tag": tag}
    curves = [
        Curve("rank_th_ns1", SweepResult("beta", dense, -np.expm1(-dense), metadata=meta),
              "beta", "normalized rank"),
        Curve("rank_ds", SweepResult("beta", dense, np.minimum(1.0, dense), metadata=meta),
              "beta", "normalized rank"),
        Curve(f"rank_bound_ns{ns2}", SweepResult("beta", dense, rank_upper_bound(dense, ns2),
                                                 metadata={**meta, "kind": "bound"}),
              "beta", "normalized rank", {"Ns": ns2}),
    ]
    for label, spec in (("th_ns1", EnsembleSpec.th(N, N, 1)),
                        (f"th_ns{ns2}", EnsembleSpec.th(N, N, ns2)),
                        ("ds", EnsembleSpec.ds(N, N))):
        exp = montecarlo.Experiment(spec, "beta", tuple(betas), trials, {"rank"}, seed=cfg.seed)
        res = montecarlo.run(exp)["rank"]
        loads = np.array([exp.spec_at(i).beta for i in range(len(betas))])
        result = SweepResult("beta", loads, res.mean, res.std, res.trials, {**res.metadata, "tag": tag})
        curves.append(Curve(f"empirical_{label}", result, "beta", "normalized rank", {"N": N}))
    return curves


def fig4(cfg: FigureConfig) -> list[Curve]:
    """Interference-plus-noise histogram at the matched-filter output."""
    beta = cfg.beta or 1.0
    Ns = cfg.ns or 1
    N = cfg.n or 200
    gamma_db = 13.0
    gamma = 10 ** (gamma_db / 10)
    samples = cfg.trials or 10**6
    K = max(1, int(round(beta * N)))
    exp = montecarlo.Experiment(EnsembleSpec.th(N, K, Ns), "gamma", (gamma,), samples,
                                frozenset(), seed=cfg.seed)
    h = montecarlo.interference_histogram(exp, gamma)
    tag = "fig4: interference-plus-noise density"
    base = {"beta": K / N, "Ns": Ns, "N": N, "gamma_db": gamma_db, "samples": samples,
            "kurtosis_empirical": h.kurtosis, "kurtosis_limit": h.kurtosis_limit}
    meta_e = {"kind": "empirical", "seed": cfg.seed, "tag": tag}
    meta_a = {"kind": "analytic", "tag": tag}
    return [
        Curve("histogram", SweepResult("x", h.centers, h.density, metadata=meta_e),
              "Re Z", "density", base),
        Curve("mixture_pdf", SweepResult("x", h.centers, h.mixture_density, metadata=meta_a),
              "Re Z", "density", base),
        Curve("gaussian_pdf", SweepResult("x", h.centers, h.gaussian_density, metadata=meta_a),
              "Re Z", "density", base),
    ]


def fig5(cfg: FigureConfig) -> list[Curve]:
    """Matched filter against Eb/N0."""
    beta = cfg.beta or 1.0
    lo, hi = _ebn0_range(cfg)
    tag = "fig5: matched-filter bank vs Eb/N0"
    pulses = (1, 2, 5) if cfg.ns is None else (cfg.ns,)
    curves = [_analytic_ebn0(f"sumf_th_knownS_ns{n}", "sumf_th_knownS", beta, lo, hi, n, tag)
              for n in pulses]
    curves += [_analytic_ebn0(f"sumf_th_star_ns{n}", "sumf_th_star", beta, lo, hi, n, tag)
               for n in pulses]
    curves += [
        _analytic_ebn0("sumf_ds", "sumf_ds", beta, lo, hi, tag=tag),
        _analytic_ebn0("sumf_th_dense_limit", "sumf_th_dense_limit", beta, lo, hi, tag=tag),
        _analytic_ebn0("orthogonal", "orthogonal", beta, lo, hi, tag=tag),
    ]
    return curves


def fig6(cfg: FigureConfig) -> list[Curve]:
    """Matched filter against load at fixed Eb/N0."""
    ebn0 = 10.0 if cfg.ebn0_db is None else cfg.ebn0_db
    betas = _betas(cfg)
    tag = "fig6: matched-filter bank vs load"
    pulses = (1, 2) if cfg.ns is None else (cfg.ns,)
    curves = [_analytic_beta("sumf_ds", "sumf_ds", betas, ebn0, tag=tag)]
    curves += [_analytic_beta(f"sumf_th_knownS_ns{n}", "sumf_th_knownS", betas, ebn0, n, tag)
               for n in pulses]
    curves += [_analytic_beta(f"sumf_th_star_ns{n}", "sumf_th_star", betas, ebn0, n, tag)
               for n in pulses]
    curves.append(_analytic_beta("orthogonal", "orthogonal", betas, ebn0, tag=tag))
    return curves


def fig7(cfg: FigureConfig) -> list[Curve]:
    """Linear receivers against Eb/N0."""
    beta = cfg.beta or 0.9
    lo, hi = _ebn0_range(cfg)
    tag = "fig7: linear receivers vs Eb/N0"
    curves = [_analytic_ebn0("mmse_ds", "mmse_ds", beta, lo, hi, tag=tag)]
    if beta < 1:
        curves.append(_analytic_ebn0("deco_ds", "deco_ds", beta, lo, hi, tag=tag))
    curves += [
        _analytic_ebn0("linear_th_ns1", "linear_th_ns1", beta, lo, hi, tag=tag),
        _analytic_ebn0("orthogonal", "orthogonal", beta, lo, hi, tag=tag),
    ]
    return curves


def fig8(cfg: FigureConfig) -> list[Curve]:
    """Linear receivers against load at fixed Eb/N0."""
    ebn0 = 10.0 if cfg.ebn0_db is None else cfg.ebn0_db
    betas = _betas(cfg)
    tag = "fig8: linear receivers vs load"
    eta = 10 ** (ebn0 / 10)
    return [
        _analytic_beta("mmse_ds", "mmse_ds", betas, ebn0, tag=tag),
        # The decorrelator needs beta < 1 and Eb/N0 above ln2 / (1 - beta).
        _analytic_beta("deco_ds", "deco_ds", betas, ebn0, tag=tag,
                       domain=lambda b: b < 1 and eta > math.log(2) / (1 - b)),
        _analytic_beta("linear_th_ns1", "linear_th_ns1", betas, ebn0, tag=tag),
        _analytic_beta("orthogonal", "orthogonal", betas, ebn0, tag=tag),
    ]


def mmse_ds_limit(beta: float) -> float:
    """High-SNR limit ``beta log2(beta / (beta - 1))`` of the DS MMSE curve for ``beta > 1``."""
    if beta <= 1:
        return math.inf
    return beta * math.log2(beta / (beta - 1.0))


def fig9(cfg: FigureConfig) -> list[Curve]:
    """DS MMSE and TH linear receivers against load for several Eb/N0 values."""
    betas = _betas(cfg)
    tag = "fig9: linear receivers vs load, several Eb/N0"
    levels = (10.0, 30.0, 50.0) if cfg.ebn0_db is None else (cfg.ebn0_db,)
    curves = []
    for e in levels:
        curves.append(_analytic_beta(f"mmse_ds_{e:g}dB", "mmse_ds", betas, e, tag=tag))
        curves.append(_analytic_beta(f"linear_th_ns1_{e:g}dB", "linear_th_ns1", betas, e, tag=tag))
    above = betas[betas > 1]
    curves.append(Curve("mmse_ds_limit", SweepResult(
        "beta", above, [mmse_ds_limit(float(b)) for b in above],
        metadata={"kind": "analytic", "tag": tag}), "beta", CAP_LABEL))
    return curves


def fig10(cfg: FigureConfig) -> list[Curve]:
    """Synopsis of optimum and linear receivers against Eb/N0."""
    beta = cfg.beta or 1.0
    N = cfg.n or 50
    trials = cfg.trials or montecarlo.DEFAULT_TRIALS["logdet"]
    lo, hi = _ebn0_range(cfg)
    tag = "fig10: optimum vs linear receivers"
    ns2 = cfg.ns or 2
    return [
        _analytic_ebn0("c_opt_ds", "c_opt_ds", beta, lo, hi, tag=tag),
        _analytic_ebn0("sumf_ds", "sumf_ds", beta, lo, hi, tag=tag),
        _analytic_ebn0("c_opt_th_ns1", "c_opt_th_ns1", beta, lo, hi, tag=tag),
        _analytic_ebn0("linear_th_ns1", "linear_th_ns1", beta, lo, hi, tag=tag),
        _analytic_ebn0("sumf_th_star_ns1", "sumf_th_star", beta, lo, hi, 1, tag),
        _analytic_ebn0(f"sumf_th_star_ns{ns2}", "sumf_th_star", beta, lo, hi, ns2, tag),
        _empirical_opt_ebn0(f"empirical_th_ns{ns2}", beta, ns2, N, trials, cfg.seed, lo, hi, tag),
    ]


def fig11(cfg: FigureConfig) -> list[Curve]:
    """All receivers against load at fixed Eb/N0."""
    ebn0 = 10.0 if cfg.ebn0_db is None else cfg.ebn0_db
    betas = _betas(cfg)
    tag = "fig11: all receivers vs load"
    return [
        _analytic_beta("c_opt_ds", "c_opt_ds", betas, ebn0, tag=tag),
        _analytic_beta("c_opt_th_ns1", "c_opt_th_ns1", betas, ebn0, tag=tag),
        _analytic_beta("mmse_ds", "mmse_ds", betas, ebn0, tag=tag),
        _analytic_beta("sumf_ds", "sumf_ds", betas, ebn0, tag=tag),
        _analytic_beta("sumf_th_knownS_ns1", "sumf_th_knownS", betas, ebn0, 1, tag),
        _analytic_beta("sumf_th_star_ns1", "sumf_th_star", betas, ebn0, 1, tag),
        _analytic_beta("orthogonal", "orthogonal", betas, ebn0, tag=tag),
    ]


def fig_opt_beta(cfg: FigureConfig) -> list[Curve]:
    """Optimum decoding against load at fixed Eb/N0, with simulated two-pulse marks."""
    ebn0 = 10.0 if cfg.ebn0_db is None else cfg.ebn0_db
    betas = _betas(cfg)
    N = cfg.n or 50
    trials = cfg.trials or montecarlo.DEFAULT_TRIALS["logdet"]
    tag = "opt-beta: optimum decoding vs load"
    ns2 = cfg.ns or 2
    marks = grid_values(0.2, min(3.0, float(betas[-1])), 0.2)
    return [
        _analytic_beta("c_opt_th_ns1", "c_opt_th_ns1", betas, ebn0, tag=tag),
        _analytic_beta("c_opt_ds", "c_opt_ds", betas, ebn0, tag=tag),
        _analytic_beta("orthogonal", "orthogonal", betas, ebn0, tag=tag),
        _empirical_opt_beta(f"empirical_th_ns{ns2}", marks, ebn0, ns2, N, trials, cfg.seed, tag),
    ]


FIGURES = {
    "lsd": fig_lsd,
    "2": fig2,
    "3": fig3,
    "4": fig4,
    "5": fig5,
    "6": fig6,
    "7": fig7,
    "8": fig8,
    "9": fig9,
    "10": fig10,
    "11": fig11,
    "opt-beta": fig_opt_beta,
}


def build(figure_id: str, cfg: FigureConfig | None = None) -> list[Curve]:
    try:
        builder = FIGURES[str(figure_id)]
    except KeyError:
        raise ValueError(f"unknown figure {figure_id!r}; choose from {list(FIGURES)}") from None
    return builder(cfg or FigureConfig())
