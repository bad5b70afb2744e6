import numpy as np
import pytest

from swarmlab import experiments, moments
from swarmlab.core import make_params
from swarmlab.experiments import ExperimentConfig, wilson_interval
from swarmlab.stagnation import TwoParticleInit


def _noisy_params(**kw):
    base = dict(omega=0.4, phi1=1.5, phi2=1.5, delta=0.01, alpha=1.0,
                epsilon=0.01, m=3, n=1)
    base.update(kw)
    return make_params(**base)


class TestExperimentConfig:
    def test_validation(self):
        p = _noisy_params()
        with pytest.raises(ValueError):
            ExperimentConfig(params=p, objective="sphere", trials=0, budget=100,
                             master_seed=1)
        with pytest.raises(ValueError):
            ExperimentConfig(params=p, objective="sphere", trials=1, budget=1,
                             master_seed=1)
        with pytest.raises(ValueError):
            ExperimentConfig(params=p, objective="sphere", trials=1, budget=100,
                             master_seed=1, init="explicit")


class TestWilson:
    def test_contains_point_estimate(self):
        for k, n in [(0, 10), (3, 10), (10, 10), (97, 100)]:
            lo, hi = wilson_interval(k, n)
            assert lo <= k / n <= hi
            assert 0.0 <= lo <= hi <= 1.0


class TestEstimateFht:
    def test_initial_inside_ball_hits_with_m_evals(self):
        p = _noisy_params(m=2, epsilon=0.5)
        cfg = ExperimentConfig(params=p, objective="sphere", trials=10, budget=1000,
                               master_seed=4, init="explicit",
                               positions=(0.1, 3.0), velocities=(0.0, 0.0))
        est = experiments.estimate_fht(cfg)
        assert est.hits == 10 and est.censored == 0
        assert np.all(est.hit_evals == 2)
        assert est.mean_over_hits == 2.0 and est.median_over_hits == 2.0

    def test_prop1_configuration_censors(self):
        p = make_params(0.5, 1.5, 1.5, 0, 1, 0.5, 1, 1)
        cfg = ExperimentConfig(params=p, objective="sphere", trials=20, budget=5000,
                               master_seed=4, init="explicit",
                               positions=(0.9,), velocities=(-0.05,))
        est = experiments.estimate_fht(cfg, position_ball_radius=0.5)
        assert est.hits == 0 and est.censored == 20
        assert est.mean_over_hits is None

    def test_noisy_positive_axis_hits(self):
        cfg = ExperimentConfig(params=_noisy_params(), objective="sphere_plus",
                               trials=25, budget=100_000, master_seed=11,
                               require_nonneg_gbest=True)
        est = experiments.estimate_fht(cfg)
        assert est.hits == 25
        assert est.wilson_low > 0.8

    def test_survival_curve_non_increasing_and_anchored(self):
        cfg = ExperimentConfig(params=_noisy_params(), objective="sphere_plus",
                               trials=30, budget=30_000, master_seed=5,
                               require_nonneg_gbest=True)
        est = experiments.estimate_fht(cfg)
        fracs = [f for _, f in est.survival_curve]
        assert all(a >= b for a, b in zip(fracs, fracs[1:]))
        assert est.survival_curve[-1][0] == cfg.budget

    def test_requested_survival_checkpoints(self):
        cfg = ExperimentConfig(params=_noisy_params(), objective="sphere_plus",
                               trials=20, budget=30_000, master_seed=5,
                               require_nonneg_gbest=True,
                               sampled_statistics=(3, 30, 300, 3000))
        est = experiments.estimate_fht(cfg)
        assert [e for e, _ in est.survival_curve] == [3, 30, 300, 3000]

    def test_threads_do_not_change_results(self):
        cfg = ExperimentConfig(params=_noisy_params(), objective="sphere_plus",
                               trials=16, budget=20_000, master_seed=8,
                               require_nonneg_gbest=True)
        a = experiments.estimate_fht(cfg, threads=1)
        b = experiments.estimate_fht(cfg, threads=3)
        assert np.array_equal(a.hit_evals, b.hit_evals)
        assert np.array_equal(a.final_gbest_values, b.final_gbest_values)

    def test_censored_fraction_non_increasing_in_budget(self):
        p = _noisy_params(delta=0.005, epsilon=0.002)
        censored = []
        for budget in (300, 3000, 30_000):
            cfg = ExperimentConfig(params=p, objective="sphere_plus", trials=40,
                                   budget=budget, master_seed=13,
                                   require_nonneg_gbest=True)
            censored.append(experiments.estimate_fht(cfg).censored)
        assert censored[0] >= censored[1] >= censored[2]


class TestStagnationDemo:
    def test_quick_run_respects_bounds(self):
        params = make_params(0.07, 0.0, 1.5, 0, 200, 0.5, 2, 1)
        init = TwoParticleInit(184.0, 185.0, -1.0, -1.0)
        rep = experiments.stagnation_demo_two_particles(
            params, init, trials=200, steps=2000, master_seed=6)
        assert rep.n_entered_ball == 0
        assert rep.min_position > 100.0
        for i in range(2):
            assert rep.mean_sum_abs_v[i] + 3 * rep.se_sum_abs_v[i] < rep.velocity_sum_bound
        for t, kept, mean_d, se_d, bound in rep.d_rows:
            assert kept == 200  # sign prerequisites hold throughout here
            assert mean_d <= bound + 3 * se_d
        assert not rep.verdict.all_met  # printed threshold rejects 184/185

    def test_cognitive_term_vanishes_identically(self):
        # while both particles improve monotonically their own best equals
        # their position, so any phi1 gives the same trajectories as phi1 = 0
        init = TwoParticleInit(184.0, 185.0, -1.0, -1.0)
        reps = []
        for phi1 in (0.0, 1.5):
            params = make_params(0.07, phi1, 1.5, 0, 200, 0.5, 2, 1)
            reps.append(experiments.stagnation_demo_two_particles(
                params, init, trials=50, steps=500, master_seed=9))
        assert np.array_equal(reps[0].mean_sum_abs_v, reps[1].mean_sum_abs_v)
        assert reps[0].d_rows == reps[1].d_rows
        assert reps[0].min_position == reps[1].min_position


class TestCounterexampleDemo:
    def test_quick_run(self):
        rep = experiments.counterexample_demo(trials=20, steps=30_000, window=10_000,
                                              master_seed=2)
        assert rep.pbest2_updates_total == 0
        assert not rep.particle1_ever_moved
        assert rep.gap_sq_always_one
        assert rep.oracle_var == pytest.approx(rep.closed_form_var, rel=1e-9)
        assert rep.empirical_var_mean == pytest.approx(rep.oracle_var, rel=0.10)


class TestStationaryMomentCheck:
    def test_noise_floor_case(self):
        p = _noisy_params(delta=0.1, m=1)
        rep = experiments.stationary_moment_check(p, 0.0, 0.0, trials=20_000,
                                                  burn_in=2000, horizon=1000,
                                                  master_seed=3)
        assert abs(rep.empirical_mean) < 4 * rep.se_mean
        assert rep.empirical_var == pytest.approx(rep.oracle_var, rel=0.05)
        assert rep.oracle_var == pytest.approx(rep.closed_form_var, rel=1e-9)
        # burn-in sanity: both windows see the stationary value
        assert rep.mid_window_var == pytest.approx(rep.empirical_var, rel=0.1)

    def test_degenerate_attractor_collapses(self):
        p = make_params(0.4, 1.5, 1.5, 0, 1, 0.01, 1, 1)
        rep = experiments.stationary_moment_check(p, 2.0, 2.0, trials=2000,
                                                  burn_in=2000, horizon=500,
                                                  master_seed=3)
        assert rep.empirical_mean == pytest.approx(2.0, abs=1e-6)
        assert rep.empirical_var < 1e-12
        assert rep.closed_form_var == 0.0

    def test_gap_case_matches_oracle(self):
        p = make_params(0.4, 1.5, 1.5, 0, 1, 0.01, 1, 1)
        rep = experiments.stationary_moment_check(p, 0.0, 1.0, trials=40_000,
                                                  burn_in=2000, horizon=1000,
                                                  master_seed=14)
        assert rep.empirical_mean == pytest.approx(0.5, abs=4 * rep.se_mean)
        assert rep.empirical_var == pytest.approx(rep.oracle_var, rel=0.05)


class TestImprovementProbability:
    def test_constants(self):
        p = _noisy_params(m=1)
        rep = experiments.improvement_probability_check(
            p, trials=2000, master_seed=7, target_samples=2_000_000)
        assert rep.analytic_noise_tail == pytest.approx(1e-4, abs=1e-15)
        assert rep.samples >= 2_000_000
        assert rep.y_tail_freq <= rep.y_tail_bound
        sigma = np.sqrt(rep.compound_freq * (1 - rep.compound_freq) / rep.samples)
        assert rep.compound_freq >= rep.compound_threshold - 3 * sigma
        assert rep.sigma_y_sq <= rep.sigma_y_sq_bound

    def test_rejects_unstable_or_noiseless(self):
        with pytest.raises(ValueError):
            experiments.improvement_probability_check(
                _noisy_params(phi1=0.2, phi2=0.2, m=1), trials=10, master_seed=1)
        with pytest.raises(ValueError):
            experiments.improvement_probability_check(
                _noisy_params(delta=0.0, m=1), trials=10, master_seed=1)


class TestPbestNullSequence:
    def test_gap_decays_basic(self):
        p = make_params(0.4, 1.5, 1.5, 0, 1, 0.01, 3, 1)
        rep = experiments.pbest_null_sequence_check(p, trials=20, horizon=5000,
                                                    master_seed=10,
                                                    checkpoints=(1000,))
        assert rep.median_ratio_at[5000] < 1e-4
        assert rep.median_ratio_at[5000] <= rep.median_ratio_at[1000]

    def test_gap_decays_noisy(self):
        p = _noisy_params()
        rep = experiments.pbest_null_sequence_check(p, trials=20, horizon=5000,
                                                    master_seed=10)
        assert rep.median_ratio_at[5000] < 1e-4

    def test_single_particle_gap_identically_zero(self):
        p = make_params(0.4, 1.5, 1.5, 0, 1, 0.01, 1, 1)
        rep = experiments.pbest_null_sequence_check(p, trials=10, horizon=100,
                                                    master_seed=10)
        assert rep.median_initial_gap_sq == 0.0
        assert rep.median_ratio_at[100] == 0.0
