"""Acceptance gate: one test per release criterion.

Each test prints a single "[acceptance] ..." PASS/FAIL line so the gate
can be scanned from the pytest -v output. Tolerances are pinned here and
nowhere else; Monte Carlo criteria use 3 standard errors.
"""

import json
import math
import statistics
from dataclasses import replace
from pathlib import Path

import numpy as np
import tomli

from cascade_source import (
    ChannelPair,
    StoppingRule,
    WorldState,
    get_window,
    next_frame,
    normalizer_concentration_check,
    run_batch,
    run_trajectory,
    scaling_study,
    uniform_prior,
    update,
    variance_transition_profile,
)
from cascade_source import lattice
from cascade_source.cli import main as cli_main
from cascade_source.config import build_config
from cascade_source.harness import trial_streams
from conftest import batch_log_weights
from test_channels import discrete_moment_oracle, gaussian_moment_oracle

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def report(num, name, ok):
    print(f"[acceptance] criterion {num} ({name}): {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {num} ({name}) failed"


def test_criterion_1_lattice_oracle():
    ok = True
    for d in (1, 2, 3):
        bfs = lattice.bfs_sphere_sizes(d, 12)
        for t in range(13):
            ok = ok and lattice.sphere_size(d, t) == bfs[t]
            ok = ok and lattice.ball_size(d, t) == sum(bfs[: t + 1])
            ok = ok and lattice.growth(d, t) == sum(
                sum(bfs[: s + 1]) for s in range(t + 1)
            )
    for d in (2, 3, 4):
        for t in range(d, 31):
            lo, up = lattice.sphere_bounds(d, t)
            ok = ok and lo <= lattice.sphere_size(d, t) <= up
    report(1, "lattice oracle equivalence", ok)


def test_criterion_2_posterior_correctness():
    rng = np.random.default_rng(20260823)
    ch_pool = [
        ChannelPair.gaussian(1.0),
        ChannelPair.gaussian(0.5),
        ChannelPair.discrete((0.8, 0.2), (0.2, 0.8)),
    ]
    worst_weight = 0.0
    worst_norm = 0.0
    for trial in range(100):
        d = int(rng.integers(1, 3))
        k = int(rng.integers(1, 11 if d == 1 else 7))
        t_steps = int(rng.integers(1, 9))
        ch = ch_pool[trial % len(ch_pool)]
        window = get_window(d, k + t_steps)
        state = uniform_prior(window, k, accelerated=bool(trial % 2))
        source = tuple(int(c) for c in state.support[rng.integers(state.n)])
        world = WorldState(source=source, window=window)
        frames = []
        for _ in range(t_steps):
            frame = next_frame(world, ch, rng)
            frames.append(frame)
            state = update(state, frame, ch)
            worst_norm = max(worst_norm, abs(state.probabilities().sum() - 1.0))
        oracle = batch_log_weights(frames, ch, state.support)
        inc = state.log_weights - state.log_weights[0] + oracle[0]
        worst_weight = max(worst_weight, float(np.max(np.abs(inc - oracle))))
    ok = worst_weight <= 1e-9 and worst_norm <= 1e-12
    report(2, "posterior incremental = batch", ok)


def test_criterion_3_martingale_orthogonality():
    ch = ChannelPair.gaussian(1.0)
    k = 20
    rng = np.random.default_rng(31415)
    window = get_window(1, k + 8)
    state = uniform_prior(window, k)
    world = WorldState(source=(3,), window=window)
    for _ in range(2):
        state = update(state, next_frame(world, ch, rng), ch)
    base_mean = state.mean()

    # one-step martingale: E[mean(t+1) | F_t] = mean(t)
    means = []
    for sub in rng.spawn(10_000):
        probs = state.probabilities()
        src = tuple(int(c) for c in state.support[sub.choice(state.n, p=probs)])
        hyp = WorldState(source=src, window=window, time=state.time + 1)
        clone = update(state, next_frame(hyp, ch, sub), ch)
        means.append(clone.mean()[0])
    means = np.array(means)
    se_m = means.std(ddof=1) / math.sqrt(means.size)
    martingale_ok = abs(means.mean() - base_mean[0]) < 3 * se_m

    # three-term orthogonality at t = 5 over 1000 trials
    diffs = []
    for i in range(1000):
        world_rng, _ = trial_streams(99, i)
        st = uniform_prior(window, k)
        src_idx = int(world_rng.integers(st.n))
        source = np.asarray(st.support[src_idx], float)
        w = WorldState(source=tuple(st.support[src_idx]), window=window)
        prior_mean = st.mean()
        for _ in range(5):
            st = update(st, next_frame(w, ch, world_rng), ch)
        vt = st.mean()
        lhs = float(((prior_mean - source) ** 2).sum())
        rhs = float(((vt - source) ** 2).sum()) + float(((vt - prior_mean) ** 2).sum())
        diffs.append(lhs - rhs)
    diffs = np.array(diffs)
    se_o = diffs.std(ddof=1) / math.sqrt(diffs.size)
    ortho_ok = abs(diffs.mean()) < 3 * se_o

    report(3, "martingale + orthogonality (3 SE)", martingale_ok and ortho_ok)


def test_criterion_4_normalizer_concentration():
    cfg = build_config(
        dict(
            dimension=2,
            radius=70,  # n = 9941, about 1e4
            trials=500,
            master_seed=404,
            channel=dict(kind="gaussian", mu=0.5),
            rule=dict(kind="t_plus"),
            t_max=2,
            eps=0.5,
        )
    )
    small_t = lattice.growth_inverse(2, 0.1 * math.log(cfg.n))
    report_dict = normalizer_concentration_check(cfg, eps=0.5, horizon=small_t)
    ok = True
    for row in report_dict["rows"]:
        if not row["bound_applies"]:
            continue
        p = row["exceedance"]
        se = math.sqrt(max(p * (1 - p), 1e-12) / report_dict["trials"])
        ok = ok and p <= row["bound"] + 3 * se
    report(4, "normalizer concentration bound", ok)


def test_criterion_5_variance_transition():
    base = dict(
        dimension=2,
        radius=20,
        trials=300,
        master_seed=505,
        channel=dict(kind="gaussian", mu=1.0),
    )
    cfg_plus = build_config(dict(base, rule=dict(kind="t_plus")))
    stops = [r.stop_time for r in run_batch(cfg_plus)]
    med_T = int(statistics.median(stops))

    horizon = max(2 * med_T, 2)
    cfg_prof = build_config(
        dict(base, rule=dict(kind="fixed_horizon", horizon=horizon), t_max=horizon + 1)
    )
    rows = variance_transition_profile(cfg_prof)
    prior = rows[0]["q50"]
    early_ok = all(row["q50"] >= 0.5 * prior for row in rows if row["t"] <= 2)
    late_ok = all(row["q50"] <= 0.05 * prior for row in rows if row["t"] >= 2 * med_T)
    report(5, "variance transition profile", early_ok and late_ok)


def test_criterion_6_stop_time_scaling():
    ch = ChannelPair.gaussian(2.0)
    rule = StoppingRule(kind="t_plus")
    ok = True
    for d, grid in [(1, [50, 500, 5000, 50000]), (2, [7, 22, 70])]:
        rows = scaling_study(d, grid, ch, rule, trials=200, master_seed=606)
        means = [r.mean_T for r in rows]
        ratios = [r.ratio for r in rows]
        ok = ok and means == sorted(means)
        ok = ok and max(ratios) / min(ratios) <= 2.5
    report(6, "stop-time scaling band <= 2.5", ok)


def test_criterion_7_rule_ordering():
    n = lattice.ball_size(1, 30)
    r = lattice.growth_inverse(1, 6 * math.log(n))
    base = dict(
        dimension=1,
        radius=30,
        trials=0,
        master_seed=707,
        channel=dict(kind="gaussian", mu=2.0),
    )
    cfg_r = build_config(dict(base, rule=dict(kind="t_r", r=r, rollouts=500)))
    cfg_p = build_config(dict(base, rule=dict(kind="t_plus")))
    wins = 0
    for i in range(200):
        tr = run_trajectory(cfg_r, trial_id=i)
        tp = run_trajectory(cfg_p, trial_id=i)
        assert tr.source == tp.source
        wins += tr.stop_time <= tp.stop_time
    report(7, "T_r <= T_plus in >= 95% of pairs", wins >= 190)


def test_criterion_8_golden_determinism(tmp_path):
    def run(cmd, toml_name, out_dir, workers):
        raw = tomli.loads((CONFIGS / toml_name).read_text())
        raw["output_dir"] = str(out_dir)
        raw["workers"] = workers
        cfg_path = tmp_path / f"{out_dir.name}.json"
        cfg_path.write_text(json.dumps(raw))
        assert cli_main([cmd, str(cfg_path)]) == 0

    run("simulate", "golden_simulate.toml", tmp_path / "sim_a", 1)
    run("simulate", "golden_simulate.toml", tmp_path / "sim_b", 1)
    run("simulate", "golden_simulate.toml", tmp_path / "sim_c", 3)
    run("scaling", "golden_scaling.toml", tmp_path / "sc_a", 1)
    run("scaling", "golden_scaling.toml", tmp_path / "sc_b", 2)

    sim = [(tmp_path / f"sim_{x}" / "results.jsonl").read_bytes() for x in "abc"]
    sc = [(tmp_path / f"sc_{x}" / "scaling.csv").read_bytes() for x in "ab"]
    ok = sim[0] == sim[1] == sim[2] and sc[0] == sc[1] and len(sim[0]) > 0
    report(8, "golden configs byte-identical", ok)


def test_criterion_9_channel_moments():
    ok = True
    for mu in (0.5, 1.0, 2.0):
        m = ChannelPair.gaussian(mu).moments()
        oracle = gaussian_moment_oracle(mu)
        got = (m.alpha, m.lambda0, m.lambda1, m.kl01, m.kl10)
        ok = ok and all(abs(g - o) <= 1e-6 * abs(o) for g, o in zip(got, oracle))
    for q0, q1 in [
        ((0.9, 0.1), (0.1, 0.9)),
        ((0.5, 0.3, 0.2), (0.2, 0.3, 0.5)),
        ((0.45, 0.05, 0.5), (0.05, 0.45, 0.5)),
    ]:
        m = ChannelPair.discrete(q0, q1).moments()
        oracle = discrete_moment_oracle(q0, q1)
        got = (m.alpha, m.lambda0, m.lambda1, m.kl01, m.kl10)
        ok = ok and all(abs(g - o) <= 1e-6 * abs(o) for g, o in zip(got, oracle))
    report(9, "channel moments vs oracles (rel 1e-6)", ok)
