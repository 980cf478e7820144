import math
from dataclasses import replace

import numpy as np
import pytest

from cascade_source import (
    ChannelPair,
    StoppingRule,
    batch_summary,
    normalizer_concentration_check,
    run_batch,
    run_trajectory,
    scaling_study,
    variance_transition_profile,
)
from cascade_source.config import build_config


def make_config(**overrides):
    raw = dict(
        dimension=1,
        radius=10,
        trials=8,
        master_seed=123,
        channel=dict(kind="gaussian", mu=2.0),
        rule=dict(kind="t_plus"),
    )
    raw.update(overrides)
    return build_config(raw)


class TestRunTrajectory:
    def test_degenerate_prior_stops_immediately(self):
        cfg = make_config(radius=0)
        rec = run_trajectory(cfg, trial_id=0)
        assert rec.stop_time == 0
        assert rec.squared_error == 0.0
        assert rec.infection_cost == 1
        assert not rec.truncated

    def test_fixed_horizon_zero(self):
        cfg = make_config(rule=dict(kind="fixed_horizon", horizon=0))
        rec = run_trajectory(cfg, trial_id=1)
        assert rec.stop_time == 0
        assert len(rec.variance_trajectory) == 2  # prior + one frame

    def test_total_loss_identity(self):
        cfg = make_config(trials=5)
        for rec in run_batch(cfg):
            assert rec.total_loss == rec.squared_error + rec.infection_cost

    def test_determinism(self):
        cfg = make_config()
        a = run_trajectory(cfg, trial_id=3)
        b = run_trajectory(cfg, trial_id=3)
        assert a.source == b.source
        assert a.stop_time == b.stop_time
        assert a.squared_error == b.squared_error
        assert a.variance_trajectory == b.variance_trajectory

    def test_truncation_flagged(self):
        # Uninformative channel with a variance-threshold that can never
        # trigger within a tiny t_max: 1d threshold is 2 forever.
        cfg = make_config(
            radius=30,
            t_max=2,
            channel=dict(kind="gaussian", mu=0.0, allow_equal=True),
        )
        rec = run_trajectory(cfg, trial_id=0)
        assert rec.truncated
        assert rec.stop_time == cfg.t_max


class TestRunBatch:
    def test_empty(self):
        cfg = make_config(trials=0)
        assert run_batch(cfg) == []
        assert batch_summary([])["trials"] == 0

    def test_repeatable(self):
        cfg = make_config()
        a = run_batch(cfg)
        b = run_batch(cfg)
        assert [r.to_dict() for r in a] == [r.to_dict() for r in b]

    def test_workers_invariant(self):
        cfg = make_config(trials=6)
        seq = run_batch(cfg)
        par = run_batch(replace(cfg, workers=3))
        assert [r.to_dict() for r in seq] == [r.to_dict() for r in par]

    def test_summary_order_independent(self):
        cfg = make_config()
        recs = run_batch(cfg)
        assert batch_summary(recs) == batch_summary(list(reversed(recs)))

    def test_no_truncation_with_generous_horizon(self):
        cfg = make_config(radius=50, trials=40)
        summary = batch_summary(run_batch(cfg))
        assert summary["truncation_rate"] == 0.0


class TestScalingStudy:
    def test_single_k(self):
        rows = scaling_study(
            1, [20], ChannelPair.gaussian(2.0), StoppingRule(kind="t_plus"), 10, 1
        )
        assert len(rows) == 1
        assert rows[0].n == 41
        assert rows[0].ratio > 0

    def test_non_increasing_grid_rejected(self):
        with pytest.raises(ValueError):
            scaling_study(
                1, [20, 20], ChannelPair.gaussian(2.0), StoppingRule(kind="t_plus"), 5, 1
            )

    def test_mean_t_nondecreasing_small(self):
        rows = scaling_study(
            1, [20, 200, 2000], ChannelPair.gaussian(2.0),
            StoppingRule(kind="t_plus"), 30, 7,
        )
        means = [r.mean_T for r in rows]
        assert means == sorted(means)


class TestVarianceProfile:
    def test_requires_fixed_horizon(self):
        cfg = make_config()
        with pytest.raises(ValueError):
            variance_transition_profile(cfg)

    def test_degenerate_channel_constant(self):
        cfg = make_config(
            radius=6,
            trials=5,
            channel=dict(kind="gaussian", mu=0.0, allow_equal=True),
            rule=dict(kind="fixed_horizon", horizon=4),
        )
        rows = variance_transition_profile(cfg)
        prior = rows[0]["mean"]
        for row in rows:
            assert row["mean"] == pytest.approx(prior, abs=1e-9)
            assert row["q50"] == pytest.approx(prior, abs=1e-9)

    def test_point_mass_prior_all_zero(self):
        cfg = make_config(radius=0, trials=3, rule=dict(kind="fixed_horizon", horizon=3))
        rows = variance_transition_profile(cfg)
        assert all(row["mean"] == 0.0 for row in rows)

    def test_row_zero_is_prior(self):
        cfg = make_config(trials=4, rule=dict(kind="fixed_horizon", horizon=2))
        rows = variance_transition_profile(cfg)
        assert rows[0]["t"] == 0
        # 1d radius-10 uniform prior variance k(k+1)/3
        assert rows[0]["mean"] == pytest.approx(10 * 11 / 3)


class TestNormalizerCheck:
    def test_degenerate_channel_zero_exceedance(self):
        cfg = make_config(
            radius=8,
            trials=10,
            channel=dict(kind="gaussian", mu=0.0, allow_equal=True),
            rule=dict(kind="fixed_horizon", horizon=3),
        )
        report = normalizer_concentration_check(cfg, eps=0.5)
        assert all(row["exceedance"] == 0.0 for row in report["rows"])

    def test_eps_too_small_rejected(self):
        cfg = make_config()
        with pytest.raises(ValueError):
            normalizer_concentration_check(cfg, eps=1e-6)


class TestOrthogonality:
    def test_three_term_decomposition_small(self):
        # E||v(0)-v0||^2 = E||v(t)-v0||^2 + E||v(t)-v(0)||^2 within MC
        # noise; compact version of the acceptance run.
        cfg = make_config(
            radius=15,
            trials=200,
            channel=dict(kind="gaussian", mu=1.0),
            rule=dict(kind="fixed_horizon", horizon=3),
        )
        from cascade_source import get_window, uniform_prior, update, WorldState, next_frame
        from cascade_source.harness import trial_streams

        diffs = []
        window = get_window(cfg.dimension, cfg.window_radius())
        for i in range(cfg.trials):
            world_rng, _ = trial_streams(cfg.master_seed, i)
            state = uniform_prior(window, cfg.radius)
            src_idx = int(world_rng.integers(state.n))
            source = np.asarray(state.support[src_idx], float)
            world = WorldState(source=tuple(state.support[src_idx]), window=window)
            v0_hat = state.mean()  # prior mean (time "0" = no data yet)
            for _ in range(4):
                state = update(state, next_frame(world, cfg.channel, world_rng), cfg.channel)
            vt_hat = state.mean()
            lhs = float(((v0_hat - source) ** 2).sum())
            rhs = float(((vt_hat - source) ** 2).sum()) + float(((vt_hat - v0_hat) ** 2).sum())
            diffs.append(lhs - rhs)
        diffs = np.array(diffs)
        se = diffs.std(ddof=1) / math.sqrt(len(diffs))
        assert abs(diffs.mean()) < 3 * se
