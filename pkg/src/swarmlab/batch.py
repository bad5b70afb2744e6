"""Vectorised multi-trial simulation kernels.

Trials run in lockstep on (trials, m, n) arrays.  Draw coordinates and update
arithmetic mirror :mod:`swarmlab.engine` exactly, so a batch trial is bit
identical to the scalar engine run with the same master seed and trial index;
tests enforce this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ObjectiveFn,
    PsoParams,
    PURPOSE_INIT_V,
    PURPOSE_INIT_X,
    PURPOSE_NOISE,
    PURPOSE_R,
    PURPOSE_S,
    step_uniform,
    stream_base,
)

__all__ = [
    "BatchSwarm",
    "FhtBatchResult",
    "run_fht_batch",
    "TwoParticleBatchResult",
    "run_two_particle_demo",
    "CounterexampleBatchResult",
    "run_counterexample_batch",
    "run_fixed_attractor_ensemble",
    "ImprovementCounts",
    "run_improvement_counts",
    "PbestGapResult",
    "run_pbest_gap_batch",
]

_MAX_INIT_ATTEMPTS = 10_000


class BatchSwarm:
    """Swarm state for `trials` independent runs advanced synchronously."""

    def __init__(self, params: PsoParams, objective: ObjectiveFn, trials: int,
                 master_seed: int, trial_offset: int = 0, init: str = "random",
                 positions=None, velocities=None, require_nonneg_gbest: bool = False):
        m, n = params.m, params.n
        self.params = params
        self.objective = objective
        self.trials = trials
        self._rows = np.arange(trials)
        self._base_r = stream_base(master_seed, PURPOSE_R, trials, m, n, trial_offset)
        self._base_s = stream_base(master_seed, PURPOSE_S, trials, m, n, trial_offset)
        self._base_d = (stream_base(master_seed, PURPOSE_NOISE, trials, m, n, trial_offset)
                        if params.delta > 0 else None)
        if init == "random":
            base_x = stream_base(master_seed, PURPOSE_INIT_X, trials, m, n, trial_offset)
            base_v = stream_base(master_seed, PURPOSE_INIT_V, trials, m, n, trial_offset)
            X = np.empty((trials, m, n))
            V = np.empty((trials, m, n))
            need = np.ones(trials, dtype=bool)
            attempt = 0
            while need.any():
                if attempt >= _MAX_INIT_ATTEMPTS:
                    raise RuntimeError("initialisation rejection did not terminate")
                a = self.params.alpha
                cx = a * (2.0 * step_uniform(base_x, attempt) - 1.0)
                cv = a * (2.0 * step_uniform(base_v, attempt) - 1.0)
                X[need] = cx[need]
                V[need] = cv[need]
                if require_nonneg_gbest:
                    need = need & ~(X >= 0).any(axis=(1, 2))
                else:
                    need[:] = False
                attempt += 1
        elif init == "explicit":
            X0 = np.asarray(positions, dtype=np.float64)
            V0 = np.asarray(velocities, dtype=np.float64)
            if X0.ndim == 1:
                X0 = X0[:, None]
            if V0.ndim == 1:
                V0 = V0[:, None]
            if X0.shape not in ((m, n), (trials, m, n)) or V0.shape != X0.shape:
                raise ValueError(f"explicit init must have shape ({m}, {n}) "
                                 f"or ({trials}, {m}, {n})")
            X = np.broadcast_to(X0, (trials, m, n)).copy()
            V = np.broadcast_to(V0, (trials, m, n)).copy()
        else:
            raise ValueError(f"unknown init mode {init!r}")
        self.X = X
        self.V = V
        values = objective.batch_evaluate(X)
        self.P = X.copy()
        self.fP = values.copy()
        gi = np.argmin(self.fP, axis=1)
        self.G = self.P[self._rows, gi]
        self.fG = self.fP[self._rows, gi]
        self.values = values
        self.t = 0
        self.eval_count = params.m

    def step(self) -> np.ndarray:
        """Advance every trial one step; returns the fresh (trials, m) values."""
        p = self.params
        R = step_uniform(self._base_r, self.t)
        S = step_uniform(self._base_s, self.t)
        V = (p.omega * self.V
             + p.phi1 * R * (self.P - self.X)
             + p.phi2 * S * (self.G[:, None, :] - self.X))
        if self._base_d is not None:
            D = p.delta * (step_uniform(self._base_d, self.t) - 0.5)
            V = V + D
        X = self.X + V
        values = self.objective.batch_evaluate(X)
        improved = values < self.fP
        self.P = np.where(improved[:, :, None], X, self.P)
        self.fP = np.where(improved, values, self.fP)
        gi = np.argmin(self.fP, axis=1)
        self.G = self.P[self._rows, gi]
        self.fG = self.fP[self._rows, gi]
        self.X = X
        self.V = V
        self.values = values
        self.t += 1
        self.eval_count += p.m
        return values


@dataclass(frozen=True)
class FhtBatchResult:
    hit_evals: np.ndarray          # (trials,) int64; -1 when censored
    final_gbest_value: np.ndarray  # (trials,)
    entered_position_ball: np.ndarray | None
    budget: int


def run_fht_batch(params: PsoParams, objective: ObjectiveFn, trials: int, budget: int,
                  master_seed: int, *, trial_offset: int = 0, init: str = "random",
                  positions=None, velocities=None, require_nonneg_gbest: bool = False,
                  position_ball_radius: float | None = None) -> FhtBatchResult:
    """First-hitting-time runs: step until every trial has an evaluated value
    within epsilon of the optimum or the next sweep would exceed the budget.

    A hit records the eval_count after the sweep that produced it (the initial
    m evaluations count as the first sweep).  Optionally tracks whether any
    particle ever entered the position-space ball of the given radius.
    """
    if budget < params.m:
        raise ValueError("budget must cover at least the initial evaluations")
    swarm = BatchSwarm(params, objective, trials, master_seed, trial_offset,
                       init=init, positions=positions, velocities=velocities,
                       require_nonneg_gbest=require_nonneg_gbest)
    opt = objective.optimum_value
    track = position_ball_radius is not None
    entered = np.zeros(trials, dtype=bool) if track else None

    def ball_update(X):
        r2 = np.sum(X * X, axis=2)
        entered[:] = entered | (r2 <= position_ball_radius ** 2).any(axis=1)

    hit_evals = np.full(trials, -1, dtype=np.int64)
    final_g = np.empty(trials)
    inside = (np.abs(swarm.values - opt) < params.epsilon).any(axis=1)
    hit_evals[inside] = swarm.eval_count
    final_g[inside] = swarm.fG[inside]
    if track:
        ball_update(swarm.X)
    while (hit_evals < 0).any() and swarm.eval_count + params.m <= budget:
        values = swarm.step()
        if track:
            ball_update(swarm.X)
        fresh = (hit_evals < 0) & (np.abs(values - opt) < params.epsilon).any(axis=1)
        hit_evals[fresh] = swarm.eval_count
        final_g[fresh] = swarm.fG[fresh]
    censored = hit_evals < 0
    final_g[censored] = swarm.fG[censored]
    return FhtBatchResult(hit_evals=hit_evals, final_gbest_value=final_g,
                          entered_position_ball=entered, budget=budget)


@dataclass(frozen=True)
class TwoParticleBatchResult:
    entered_ball: np.ndarray        # (trials,) bool
    sum_abs_v: np.ndarray           # (trials, 2) running sum of |V_t| incl. t=0
    d_abs_at: dict                  # t -> (trials,) |D_t|
    valid_at: dict                  # t -> (trials,) sign prerequisites held through t
    min_position: np.ndarray        # (trials,)
    steps: int


def run_two_particle_demo(params: PsoParams, objective: ObjectiveFn, x0, v0,
                          trials: int, steps: int, master_seed: int,
                          ball_radius: float, d_sample_times=(10, 50, 200)) -> TwoParticleBatchResult:
    """Two-particle runs from an explicit start, tracking the statistics the
    stagnation bounds speak about: ball entries, absolute velocity sums, and
    the inter-particle distance at sample times (with the sign prerequisites
    monitored so bound comparisons can condition on them).
    """
    if params.m != 2 or params.n != 1:
        raise ValueError("two-particle demo requires m=2, n=1")
    swarm = BatchSwarm(params, objective, trials, master_seed, init="explicit",
                       positions=np.asarray(x0, dtype=np.float64),
                       velocities=np.asarray(v0, dtype=np.float64))
    sample_set = set(int(t) for t in d_sample_times)
    entered = (np.abs(swarm.X[:, :, 0]) <= ball_radius).any(axis=1)
    sum_abs_v = np.abs(swarm.V[:, :, 0])
    valid = (swarm.X[:, :, 0] >= 0).all(axis=1) & (swarm.V[:, :, 0] <= 0).all(axis=1)
    min_pos = swarm.X[:, :, 0].min(axis=1)
    d_abs_at = {}
    valid_at = {}
    if 0 in sample_set:
        d_abs_at[0] = np.abs(swarm.X[:, 1, 0] - swarm.X[:, 0, 0])
        valid_at[0] = valid.copy()
    for _ in range(steps):
        swarm.step()
        x = swarm.X[:, :, 0]
        v = swarm.V[:, :, 0]
        entered |= (np.abs(x) <= ball_radius).any(axis=1)
        sum_abs_v += np.abs(v)
        valid &= (x >= 0).all(axis=1) & (v <= 0).all(axis=1)
        np.minimum(min_pos, x.min(axis=1), out=min_pos)
        if swarm.t in sample_set:
            d_abs_at[swarm.t] = np.abs(x[:, 1] - x[:, 0])
            valid_at[swarm.t] = valid.copy()
    return TwoParticleBatchResult(entered_ball=entered, sum_abs_v=sum_abs_v,
                                  d_abs_at=d_abs_at, valid_at=valid_at,
                                  min_position=min_pos, steps=steps)


@dataclass(frozen=True)
class CounterexampleBatchResult:
    pbest_updates: np.ndarray     # (trials, m) strict-improvement counts
    particle1_moved: np.ndarray   # (trials,) bool
    gap_sq_final: np.ndarray      # (trials,) final (G - P_2)^2
    window_mean: np.ndarray       # (trials,) particle-2 position mean over window
    window_var: np.ndarray        # (trials,) particle-2 position variance over window
    steps: int
    window: int


def run_counterexample_batch(params: PsoParams, objective: ObjectiveFn,
                             trials: int, steps: int, window: int,
                             master_seed: int) -> CounterexampleBatchResult:
    """Runs from the frozen-bests configuration: particle 1 at the optimum
    with zero velocity, particle 2 at the second special point.

    Accumulates particle-2 position statistics over the trailing window so the
    long-run variance can be compared with the fixed-attractor oracle without
    storing trajectories.
    """
    if params.m != 2 or params.n != 1:
        raise ValueError("counterexample demo requires m=2, n=1")
    if window > steps:
        raise ValueError("window cannot exceed steps")
    swarm = BatchSwarm(params, objective, trials, master_seed, init="explicit",
                       positions=np.array([[0.0], [1.0]]),
                       velocities=np.zeros((2, 1)))
    updates = np.zeros((trials, params.m), dtype=np.int64)
    s1 = np.zeros(trials)
    s2 = np.zeros(trials)
    start = steps - window
    for t in range(steps):
        prev = swarm.fP.copy()
        values = swarm.step()
        updates += values < prev
        if t >= start:
            x2 = swarm.X[:, 1, 0]
            s1 += x2
            s2 += x2 * x2
    mean = s1 / window
    var = s2 / window - mean * mean
    return CounterexampleBatchResult(
        pbest_updates=updates,
        particle1_moved=(swarm.X[:, 0, 0] != 0.0) | (swarm.V[:, 0, 0] != 0.0),
        gap_sq_final=(swarm.G[:, 0] - swarm.P[:, 1, 0]) ** 2,
        window_mean=mean,
        window_var=var,
        steps=steps,
        window=window,
    )


def _attractor_bases(params: PsoParams, trials: int, master_seed: int):
    base_r = stream_base(master_seed, PURPOSE_R, trials, 1, 1)[:, 0, 0]
    base_s = stream_base(master_seed, PURPOSE_S, trials, 1, 1)[:, 0, 0]
    base_d = (stream_base(master_seed, PURPOSE_NOISE, trials, 1, 1)[:, 0, 0]
              if params.delta > 0 else None)
    base_x = stream_base(master_seed, PURPOSE_INIT_X, trials, 1, 1)[:, 0, 0]
    return base_r, base_s, base_d, base_x


def _attractor_init(params: PsoParams, p_best: float, g_best: float, base_x):
    s = params.phi1 + params.phi2
    center = (params.phi1 * p_best + params.phi2 * g_best) / s if s > 0 else 0.0
    x0 = center + params.alpha * (2.0 * step_uniform(base_x, 0) - 1.0)
    x1 = center + params.alpha * (2.0 * step_uniform(base_x, 1) - 1.0)
    return x0, x1


def _attractor_step(params: PsoParams, p_best: float, g_best: float,
                    x_prev, x_cur, base_r, base_s, base_d, t):
    R = step_uniform(base_r, t)
    S = step_uniform(base_s, t)
    x_next = ((1.0 + params.omega - (params.phi1 * R + params.phi2 * S)) * x_cur
              - params.omega * x_prev
              + params.phi1 * R * p_best + params.phi2 * S * g_best)
    noise = None
    if base_d is not None:
        noise = params.delta * (step_uniform(base_d, t) - 0.5)
        x_next = x_next + noise
    return x_next, noise


def run_fixed_attractor_ensemble(params: PsoParams, p_best: float, g_best: float,
                                 trials: int, steps: int, master_seed: int,
                                 checkpoints=()) -> dict:
    """Directly simulates the fixed-attractor recurrence over independent
    chains; returns {t: positions (trials,)} snapshots at the checkpoints
    (always including the final step).
    """
    base_r, base_s, base_d, base_x = _attractor_bases(params, trials, master_seed)
    x_prev, x_cur = _attractor_init(params, p_best, g_best, base_x)
    wanted = set(int(t) for t in checkpoints) | {steps}
    out = {}
    for t in range(steps):
        x_next, _ = _attractor_step(params, p_best, g_best, x_prev, x_cur,
                                    base_r, base_s, base_d, t)
        x_prev, x_cur = x_cur, x_next
        if t + 1 in wanted:
            out[t + 1] = x_cur.copy()
    return out


@dataclass(frozen=True)
class ImprovementCounts:
    samples: int
    compound_hits: int     # g - delta <= X_t <= g - delta/100 + eps_prime
    y_tail_hits: int       # |Y_t - g| >= 0.4899 delta + eps_prime
    final_positions: np.ndarray


def run_improvement_counts(params: PsoParams, g_value: float, trials: int,
                           burn_in: int, keep_steps: int, master_seed: int,
                           eps_prime: float) -> ImprovementCounts:
    """Event counting for the improvement-probability analysis on the
    fixed-attractor recurrence with both bests at g_value (noisy rule).
    """
    if params.delta <= 0:
        raise ValueError("improvement counting requires delta > 0")
    base_r, base_s, base_d, base_x = _attractor_bases(params, trials, master_seed)
    x_prev, x_cur = _attractor_init(params, g_value, g_value, base_x)
    d = params.delta
    lo = g_value - d
    hi = g_value - d / 100.0 + eps_prime
    y_thresh = 0.4899 * d + eps_prime
    compound = 0
    y_tail = 0
    samples = 0
    for t in range(burn_in + keep_steps):
        x_next, noise = _attractor_step(params, g_value, g_value, x_prev, x_cur,
                                        base_r, base_s, base_d, t)
        x_prev, x_cur = x_cur, x_next
        if t >= burn_in:
            y = x_cur - noise
            compound += int(((x_cur >= lo) & (x_cur <= hi)).sum())
            y_tail += int((np.abs(y - g_value) >= y_thresh).sum())
            samples += trials
    return ImprovementCounts(samples=samples, compound_hits=compound,
                             y_tail_hits=y_tail, final_positions=x_cur.copy())


@dataclass(frozen=True)
class PbestGapResult:
    initial_gap_sq: np.ndarray   # (trials,) max_i (G_0 - P_0^i)^2
    gap_sq_at: dict              # t -> (trials,) max_i (G_t - P_t^i)^2


def run_pbest_gap_batch(params: PsoParams, objective: ObjectiveFn, trials: int,
                        steps: int, master_seed: int, checkpoints=()) -> PbestGapResult:
    """Tracks max_i (G_t - P_t^(i))^2 under all-nonnegative position
    initialisation (positions uniform on [0, alpha], velocities on
    [-alpha, alpha]).
    """
    m, n = params.m, params.n
    if n != 1:
        raise ValueError("gap tracking is one-dimensional")
    base_x = stream_base(master_seed, PURPOSE_INIT_X, trials, m, n)
    base_v = stream_base(master_seed, PURPOSE_INIT_V, trials, m, n)
    X0 = params.alpha * step_uniform(base_x, 0)
    V0 = params.alpha * (2.0 * step_uniform(base_v, 0) - 1.0)
    swarm = BatchSwarm(params, objective, trials, master_seed, init="explicit",
                       positions=X0, velocities=V0)

    def gap():
        return ((swarm.G[:, None, 0] - swarm.P[:, :, 0]) ** 2).max(axis=1)

    initial = gap()
    wanted = set(int(t) for t in checkpoints) | {steps}
    out = {}
    for _ in range(steps):
        swarm.step()
        if swarm.t in wanted:
            out[swarm.t] = gap()
    return PbestGapResult(initial_gap_sq=initial, gap_sq_at=out)
