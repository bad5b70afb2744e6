"""Monte Carlo harness tying the closed forms to simulation: first-hitting
time estimation with censoring, the stagnation demos, the frozen-bests
counterexample, stationary-moment checks, and the improvement-probability
constants.

Every experiment is exactly reproducible from its configuration and master
seed; trials are independent units of work and aggregation order is fixed, so
thread counts never change results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import batch, moments, stagnation
from .core import ObjectiveFn, PsoParams, get_objective

__all__ = [
    "ExperimentConfig",
    "FhtEstimate",
    "estimate_fht",
    "wilson_interval",
    "StagnationDemoReport",
    "stagnation_demo_two_particles",
    "CounterexampleReport",
    "counterexample_demo",
    "StationaryMomentReport",
    "stationary_moment_check",
    "ImprovementProbabilityReport",
    "improvement_probability_check",
    "PbestNullSequenceReport",
    "pbest_null_sequence_check",
]

_WILSON_Z = 1.959963984540054  # two-sided 95%


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully-specified batch of independent trials."""

    params: PsoParams
    objective: str
    trials: int
    budget: int
    master_seed: int
    init: str = "random"                  # "random" | "explicit"
    positions: tuple = ()                 # explicit init, length m (1-D) or m*n
    velocities: tuple = ()
    require_nonneg_gbest: bool = False
    sampled_statistics: tuple = ()        # optional eval checkpoints for the survival curve

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.budget < self.params.m:
            raise ValueError("budget must be >= m")
        if self.init not in ("random", "explicit"):
            raise ValueError(f"unknown init mode {self.init!r}")
        if self.init == "explicit" and (len(self.positions) == 0 or len(self.velocities) == 0):
            raise ValueError("explicit init requires positions and velocities")

    def objective_fn(self) -> ObjectiveFn:
        return get_objective(self.objective)

    def init_arrays(self):
        m, n = self.params.m, self.params.n
        X = np.asarray(self.positions, dtype=np.float64).reshape(m, n)
        V = np.asarray(self.velocities, dtype=np.float64).reshape(m, n)
        return X, V


def wilson_interval(successes: int, n: int, z: float = _WILSON_Z):
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # the interval always contains the point estimate; guard against rounding
    return min(p, max(0.0, center - half)), max(p, min(1.0, center + half))


@dataclass(frozen=True)
class FhtEstimate:
    """Aggregated hit-or-censored outcomes of an FHT experiment."""

    trials: int
    budget: int
    hits: int
    censored: int
    mean_over_hits: float | None
    median_over_hits: float | None
    survival_curve: list            # [(evals, fraction_not_hit)], non-increasing
    wilson_low: float
    wilson_high: float
    hit_evals: np.ndarray           # (trials,) int64, -1 for censored
    final_gbest_values: np.ndarray  # (trials,)
    entered_position_ball: np.ndarray | None = None

    def lines(self):
        out = [
            f"trials = {self.trials}",
            f"budget = {self.budget}",
            f"hits = {self.hits}",
            f"censored = {self.censored}",
            f"hit_probability_wilson95 = [{self.wilson_low:.6f}, {self.wilson_high:.6f}]",
        ]
        if self.hits:
            out.append(f"mean_evals_over_hits = {self.mean_over_hits:.6g}")
            out.append(f"median_evals_over_hits = {self.median_over_hits:.6g}")
        else:
            out.append("mean_evals_over_hits = n/a (no hits)")
        return out


def estimate_fht(config: ExperimentConfig, threads: int = 1,
                 position_ball_radius: float | None = None) -> FhtEstimate:
    """Run `config.trials` independent trials with split random streams.

    Censored trials are excluded from the hit-time statistics and reported
    separately; no imputation.  With threads > 1 the trial range is split into
    contiguous blocks whose results are concatenated in block order, so the
    outcome is identical for any thread count.
    """
    f = config.objective_fn()
    pos, vel = (config.init_arrays() if config.init == "explicit" else (None, None))

    def run_block(offset, count):
        return batch.run_fht_batch(
            config.params, f, count, config.budget, config.master_seed,
            trial_offset=offset, init=config.init, positions=pos, velocities=vel,
            require_nonneg_gbest=config.require_nonneg_gbest,
            position_ball_radius=position_ball_radius)

    threads = max(1, min(threads, config.trials))
    if threads == 1:
        results = [run_block(0, config.trials)]
    else:
        bounds = np.linspace(0, config.trials, threads + 1).astype(int)
        blocks = [(int(a), int(b - a)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda ab: run_block(*ab), blocks))
    hit_evals = np.concatenate([r.hit_evals for r in results])
    final_g = np.concatenate([r.final_gbest_value for r in results])
    entered = (np.concatenate([r.entered_position_ball for r in results])
               if position_ball_radius is not None else None)

    hit_mask = hit_evals >= 0
    hits = int(hit_mask.sum())
    times = hit_evals[hit_mask]
    if config.sampled_statistics:
        points = sorted(int(e) for e in config.sampled_statistics)
    else:
        points = sorted(set(times.tolist())) + [config.budget]
    curve = [(int(e), float(np.mean(~hit_mask | (hit_evals > e)))) for e in points]
    lo, hi = wilson_interval(hits, config.trials)
    return FhtEstimate(
        trials=config.trials,
        budget=config.budget,
        hits=hits,
        censored=config.trials - hits,
        mean_over_hits=float(times.mean()) if hits else None,
        median_over_hits=float(np.median(times)) if hits else None,
        survival_curve=curve,
        wilson_low=lo,
        wilson_high=hi,
        hit_evals=hit_evals,
        final_gbest_values=final_g,
        entered_position_ball=entered,
    )


# ---------------------------------------------------------------------------
# two-particle stagnation demo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StagnationDemoReport:
    trials: int
    steps: int
    ball_radius: float
    n_entered_ball: int
    mean_sum_abs_v: np.ndarray    # (2,) per particle
    se_sum_abs_v: np.ndarray      # (2,)
    velocity_sum_bound: float
    d_rows: list                  # (t, retained, mean |D_t|, se, bound)
    verdict: stagnation.StagnationVerdict
    min_position: float

    def lines(self):
        out = [
            f"trials = {self.trials}",
            f"steps = {self.steps}",
            f"entered_ball_radius_{self.ball_radius:g} = {self.n_entered_ball}",
            f"min_position_seen = {self.min_position:.6g}",
        ]
        for i in range(2):
            out.append(f"mean_sum_abs_v_particle{i + 1} = {self.mean_sum_abs_v[i]:.6g} "
                       f"(se {self.se_sum_abs_v[i]:.2g}, bound {self.velocity_sum_bound:.6g})")
        for t, kept, mean_d, se_d, bound in self.d_rows:
            out.append(f"mean_abs_d_t{t} = {mean_d:.6g} (se {se_d:.2g}, bound {bound:.6g}, "
                       f"retained {kept}/{self.trials})")
        out.append(f"kappa = {self.verdict.kappa:.9g}")
        out.append(f"lambda = {self.verdict.lam:.9g}")
        out.append(f"position_threshold_printed = {self.verdict.position_threshold:.6g}")
        for name, ok in self.verdict.conditions_met.items():
            out.append(f"condition_{name} = {int(ok)}")
        out.append(f"all_conditions_met_printed = {int(self.verdict.all_met)}")
        out.append("note = printed position threshold rejects the canonical 184/185 start "
                   "although the swarm stagnates empirically; both readings reported")
        return out


def stagnation_demo_two_particles(params: PsoParams, init: stagnation.TwoParticleInit,
                                  trials: int, steps: int, master_seed: int,
                                  ball_radius: float | None = None,
                                  d_sample_times=(10, 50, 200)) -> StagnationDemoReport:
    """Monte Carlo check of the two-particle stagnation bounds.

    Runs the swarm from the explicit two-particle start; the cognitive pull
    vanishes identically while each particle improves monotonically, so the
    analysed social-only dynamics are exact (the demo is conventionally run
    with phi1 = 0 to make this explicit).  Distance-bound comparisons retain
    only trials whose sign prerequisites held through the sample time.
    """
    if ball_radius is None:
        ball_radius = params.epsilon
    f = get_objective("sphere")
    res = batch.run_two_particle_demo(
        params, f, [init.x1, init.x2], [init.v1, init.v2],
        trials, steps, master_seed, ball_radius, d_sample_times)
    k = float(stagnation.kappa(params.omega, params.phi2))
    rows = []
    for t in sorted(res.d_abs_at):
        keep = res.valid_at[t]
        vals = res.d_abs_at[t][keep]
        bound = stagnation.d_abs_expectation_bound(t, init, k)
        se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else np.inf
        rows.append((t, int(keep.sum()), float(vals.mean()), se, bound))
    mean_v = res.sum_abs_v.mean(axis=0)
    se_v = res.sum_abs_v.std(axis=0, ddof=1) / np.sqrt(trials)
    return StagnationDemoReport(
        trials=trials,
        steps=steps,
        ball_radius=ball_radius,
        n_entered_ball=int(res.entered_ball.sum()),
        mean_sum_abs_v=mean_v,
        se_sum_abs_v=se_v,
        velocity_sum_bound=stagnation.velocity_sum_bound(params, init),
        d_rows=rows,
        verdict=stagnation.check_two_particle_stagnation(params, init),
        min_position=float(res.min_position.min()),
    )


# ---------------------------------------------------------------------------
# frozen-bests counterexample demo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CounterexampleReport:
    trials: int
    steps: int
    window: int
    pbest2_updates_total: int
    particle1_ever_moved: bool
    gap_sq_always_one: bool
    empirical_var_mean: float
    empirical_var_se: float
    oracle_var: float
    closed_form_var: float

    def lines(self):
        return [
            f"trials = {self.trials}",
            f"steps = {self.steps}",
            f"pbest_updates_particle2_total = {self.pbest2_updates_total}",
            f"particle1_ever_moved = {int(self.particle1_ever_moved)}",
            f"final_gap_squared_equals_one = {int(self.gap_sq_always_one)}",
            f"empirical_position_variance = {self.empirical_var_mean:.6g} "
            f"(se {self.empirical_var_se:.2g}, window last {self.window} steps)",
            f"oracle_fixed_point_variance = {self.oracle_var:.6g}",
            f"closed_form_variance = {self.closed_form_var:.6g}",
            "note = a nonzero variance floor proportional to the bests' squared gap "
            "contradicts unconditional mean-square convergence to the global best",
        ]


def counterexample_demo(trials: int = 100, steps: int = 1_000_000,
                        window: int = 100_000, master_seed: int = 0,
                        params: PsoParams | None = None) -> CounterexampleReport:
    """Runs the three-valued objective from the frozen configuration: the
    leader sits at the optimum with zero velocity; the follower's personal
    best can almost surely never improve, so its position follows the
    fixed-attractor recurrence with bests (1, 0) exactly and its long-run
    variance matches the oracle fixed point instead of shrinking to zero.
    """
    if params is None:
        params = PsoParams(omega=0.4, phi1=1.5, phi2=1.5, delta=0.0,
                           alpha=1.0, epsilon=1e-2, m=2, n=1)
    f = get_objective("counterexample")
    res = batch.run_counterexample_batch(params, f, trials, steps, window, master_seed)
    oracle = batch_oracle_variance(params, 1.0, 0.0)
    return CounterexampleReport(
        trials=trials,
        steps=steps,
        window=window,
        pbest2_updates_total=int(res.pbest_updates[:, 1].sum()),
        particle1_ever_moved=bool(res.particle1_moved.any()),
        gap_sq_always_one=bool(np.all(res.gap_sq_final == 1.0)),
        empirical_var_mean=float(res.window_var.mean()),
        empirical_var_se=float(res.window_var.std(ddof=1) / np.sqrt(trials)),
        oracle_var=oracle,
        closed_form_var=moments.variance_limit(params, 1.0, 0.0),
    )


def batch_oracle_variance(params: PsoParams, p_best: float, g_best: float) -> float:
    """Stationary variance from the exact moment fixed point."""
    s = moments.stationary_moments(params, p_best, g_best)
    return float(s[0] - s[3] * s[3])


# ---------------------------------------------------------------------------
# stationary moments of the fixed-attractor recurrence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StationaryMomentReport:
    trials: int
    burn_in: int
    horizon: int
    empirical_mean: float
    se_mean: float
    empirical_var: float
    se_var: float
    mid_window_var: float
    closed_form_mean: float
    closed_form_var: float
    oracle_mean: float
    oracle_var: float

    def lines(self):
        return [
            f"trials = {self.trials}",
            f"burn_in = {self.burn_in}",
            f"horizon = {self.horizon}",
            f"empirical_mean = {self.empirical_mean:.6g} (se {self.se_mean:.3g})",
            f"empirical_var = {self.empirical_var:.6g} (se {self.se_var:.3g})",
            f"mid_window_var = {self.mid_window_var:.6g}",
            f"closed_form_mean = {self.closed_form_mean:.6g}",
            f"closed_form_var = {self.closed_form_var:.6g}",
            f"oracle_mean = {self.oracle_mean:.6g}",
            f"oracle_var = {self.oracle_var:.6g}",
        ]


def stationary_moment_check(params: PsoParams, p_best: float, g_best: float,
                            trials: int, burn_in: int, horizon: int,
                            master_seed: int) -> StationaryMomentReport:
    """Ensemble mean/variance of the fixed-attractor recurrence at the horizon
    versus the closed-form limits and the exact oracle fixed point.

    The mid-window variance is reported alongside the final one so burn-in
    sufficiency is visible in the report.
    """
    total = burn_in + horizon
    mid = burn_in + horizon // 2
    snaps = batch.run_fixed_attractor_ensemble(
        params, p_best, g_best, trials, total, master_seed, checkpoints=(mid,))
    x_end = snaps[total]
    x_mid = snaps[mid]
    var = float(x_end.var(ddof=1))
    limits = moments.moment_limits(params, p_best, g_best)
    stat = moments.stationary_moments(params, p_best, g_best)
    return StationaryMomentReport(
        trials=trials,
        burn_in=burn_in,
        horizon=horizon,
        empirical_mean=float(x_end.mean()),
        se_mean=float(x_end.std(ddof=1) / np.sqrt(trials)),
        empirical_var=var,
        se_var=float(var * np.sqrt(2.0 / (trials - 1))),
        mid_window_var=float(x_mid.var(ddof=1)),
        closed_form_mean=limits.mean_limit,
        closed_form_var=limits.var_limit,
        oracle_mean=float(stat[3]),
        oracle_var=float(stat[0] - stat[3] * stat[3]),
    )


# ---------------------------------------------------------------------------
# improvement-probability constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ImprovementProbabilityReport:
    samples: int
    eps_prime: float
    analytic_noise_tail: float    # Pr(noise < -0.4999 delta), exact interval measure
    y_tail_freq: float            # empirical Pr(|Y - G| >= 0.4899 delta + eps')
    y_tail_bound: float           # 25/36
    compound_freq: float          # empirical Pr(G - delta <= X <= G - delta/100 + eps')
    compound_threshold: float     # 3e-5
    sigma_y_sq: float
    sigma_y_sq_bound: float       # delta^2 / 6

    def lines(self):
        return [
            f"samples = {self.samples}",
            f"eps_prime = {self.eps_prime:.6g}",
            f"analytic_noise_tail = {self.analytic_noise_tail:.6g} (exact 1e-4)",
            f"y_tail_freq = {self.y_tail_freq:.6g} (chebyshev bound {self.y_tail_bound:.6g})",
            f"compound_freq = {self.compound_freq:.6g} (threshold {self.compound_threshold:.6g})",
            f"sigma_y_squared = {self.sigma_y_sq:.6g} (bound {self.sigma_y_sq_bound:.6g})",
        ]


def noise_tail_probability(tail_fraction: float = 0.4999) -> float:
    """Exact measure of {noise < -tail_fraction * delta} under the uniform
    noise law on [-delta/2, delta/2]; independent of delta."""
    return max(0.0, 0.5 - tail_fraction)


def improvement_probability_check(params: PsoParams, trials: int, master_seed: int,
                                  g_value: float = 1.0, burn_in: int = 2000,
                                  target_samples: int = 10_000_000,
                                  eps_prime: float | None = None) -> ImprovementProbabilityReport:
    """Empirical verification of the improvement-event constants on the
    fixed-attractor recurrence with both bests at g_value.

    eps_prime defaults to delta/1000, well inside the admissible range
    eps' <= (1 - 0.4899) delta.
    """
    f1 = float(moments.f_one(params.omega, params.phi1, params.phi2))
    if f1 <= 1.0 / 3.0:
        raise ValueError(f"improvement analysis requires f(1) > 1/3, got {f1}")
    if params.delta <= 0:
        raise ValueError("requires a noisy update rule (delta > 0)")
    if eps_prime is None:
        eps_prime = params.delta / 1000.0
    keep = max(1, int(np.ceil(target_samples / trials)))
    counts = batch.run_improvement_counts(params, g_value, trials, burn_in, keep,
                                          master_seed, eps_prime)
    return ImprovementProbabilityReport(
        samples=counts.samples,
        eps_prime=eps_prime,
        analytic_noise_tail=noise_tail_probability(),
        y_tail_freq=counts.y_tail_hits / counts.samples,
        y_tail_bound=25.0 / 36.0,
        compound_freq=counts.compound_hits / counts.samples,
        compound_threshold=3.0 / 100000.0,
        sigma_y_sq=float(moments.sigma_y_squared(params.omega, params.phi1,
                                                 params.phi2, params.delta)),
        sigma_y_sq_bound=params.delta ** 2 / 6.0,
    )


# ---------------------------------------------------------------------------
# personal-best gap decay
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PbestNullSequenceReport:
    trials: int
    horizon: int
    median_initial_gap_sq: float
    median_ratio_at: dict      # t -> median gap_sq(t) / gap_sq(0)

    def lines(self):
        out = [
            f"trials = {self.trials}",
            f"horizon = {self.horizon}",
            f"median_initial_gap_sq = {self.median_initial_gap_sq:.6g}",
        ]
        for t in sorted(self.median_ratio_at):
            out.append(f"median_gap_ratio_t{t} = {self.median_ratio_at[t]:.6g}")
        return out


def pbest_null_sequence_check(params: PsoParams, trials: int, horizon: int,
                              master_seed: int, checkpoints=()) -> PbestNullSequenceReport:
    """Decay of max_i (G_t - P_t^(i))^2 on the nonnegative-axis objective with
    all-positive position initialisation.

    No convergence rate is available analytically, so this is a trend check:
    the report carries median gap ratios at the checkpoints and the horizon.
    """
    f = get_objective("sphere_plus")
    res = batch.run_pbest_gap_batch(params, f, trials, horizon, master_seed, checkpoints)
    floor = np.maximum(res.initial_gap_sq, 1e-300)
    ratios = {t: float(np.median(g / floor)) for t, g in res.gap_sq_at.items()}
    return PbestNullSequenceReport(
        trials=trials,
        horizon=horizon,
        median_initial_gap_sq=float(np.median(res.initial_gap_sq)),
        median_ratio_at=ratios,
    )
