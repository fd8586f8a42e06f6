"""End-to-end training runs; enable with --runslow."""
from dataclasses import replace

import numpy as np
import pytest

from platoonsim.core.controllers import build_controller
from platoonsim.core.ddpg import train
from platoonsim.core.domain import CaseSpec, CaseWindow, RunConfig, Strategy, VelocityProfile
from platoonsim.core.evaluation import compare_report, run_case
from platoonsim.core.profiles import synth_stop_and_go


@pytest.mark.slow
def test_hybrid_beats_both_baselines_on_held_out_cases():
    config = RunConfig()
    cases = config.evaluation.cases
    reward = {s: [[] for _ in cases] for s in Strategy}
    abs_ev = {s: [[] for _ in cases] for s in Strategy}

    for seed in (0, 1, 2):
        s = config.profile
        profile = synth_stop_and_go(s.duration, config.platoon.dt, s.v_mean, s.amp, s.period, s.noise_sigma,
                                    seed=seed, v_max=config.platoon.v_max)
        ddpg_cfg = replace(config.ddpg, seed=seed)
        result = train(config.platoon, config.reward, profile, ddpg_cfg,
                       held_out=[(w.start_s, w.end_s) for w in cases])
        actor = result.networks.actor

        def make(strategy):
            return build_controller(strategy, actor, config.cacc, config.platoon, config.reward, config.hybrid)

        comparison = compare_report(cases, list(Strategy), profile, make, config.platoon, config.reward, seed=seed)
        for row in comparison.report:
            i = [w.name for w in cases].index(row.case)
            reward[Strategy(row.strategy)][i].append(row.metrics.sum_reward)
            abs_ev[Strategy(row.strategy)][i].append(row.metrics.sum_abs_ev)

    wins = 0
    for i in range(len(cases)):
        hcfs = np.median(reward[Strategy.HCFS][i])
        better_reward = hcfs >= np.median(reward[Strategy.CACC][i]) and hcfs >= np.median(reward[Strategy.DDPG][i])
        tighter = np.median(abs_ev[Strategy.HCFS][i]) <= 0.7 * np.median(abs_ev[Strategy.CACC][i])
        wins += better_reward and tighter
    assert wins >= 2


@pytest.mark.slow
def test_trained_policy_holds_a_constant_velocity_leader():
    config = RunConfig()
    profile = VelocityProfile(dt=config.platoon.dt, v=np.full(3001, 15.0))
    ddpg_cfg = replace(config.ddpg, episodes=300)
    actor = train(config.platoon, config.reward, profile, ddpg_cfg).networks.actor

    controller = build_controller(Strategy.DDPG, actor, config.cacc, config.platoon, config.reward, config.hybrid)
    spec = CaseSpec(CaseWindow("steady", 0.0, 60.0, 4), Strategy.DDPG)
    run = run_case(spec, profile, controller, config.platoon, config.reward)
    assert not run.collision
    tail = run.rows[-len(run.rows) // 3:]
    assert max(abs(row.e_v_lead) for row in tail) < 0.5
