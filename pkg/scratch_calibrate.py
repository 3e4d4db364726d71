"""Scratch: probe learner/GT margins across scenario seeds (not shipped)."""
import sys
import time

import numpy as np

from beamsched.env import NetworkEnv, PayoffWeights
from beamsched.experiment import (
    resolve_scheduled_ues,
    run_block_trial,
    trial_training_samples,
)
from beamsched.env import running_average_reward
from beamsched.qlearning import PowerLevels
from beamsched.scenario import default_config
from dataclasses import replace
from beamsched.channel import AntennaConfig


def final_means(config, strategy, beta, trials, base_seed=1, p_q=10, i_q=10, ue=1):
    env = NetworkEnv(config)
    sched = resolve_scheduled_ues(config, ue)
    levels = PowerLevels(config.p_max_w, p_q)
    weights = PayoffWeights.uniform(config.n_bs, 1.0, beta)
    finals = []
    for trial in range(trials):
        seed = base_seed + trial
        samples = None
        if strategy == "learner":
            samples = trial_training_samples(env, sched, levels, 100, seed)
        outcomes, _ = run_block_trial(env, strategy, sched, levels, i_q, weights, seed,
                                      training_samples=samples)
        net, _ = running_average_reward(outcomes)
        finals.append(net[-1])
    finals = np.array(finals)
    return finals.mean(), finals.std(ddof=1) / np.sqrt(trials)


def probe(seed, trials=50):
    config = default_config(seed)
    W = config.radio.bandwidth_hz
    rows = []
    for beta in (0.0, 0.1 * W):
        lm, ls = final_means(config, "learner", beta, trials)
        gm, gs = final_means(config, "gt", beta, trials)
        gap = (lm - gm) / abs(gm) if gm != 0 else float("inf")
        comb = np.hypot(ls, gs)
        rows.append((beta, lm, gm, gap, (lm - gm) / comb if comb > 0 else float("inf")))
    # high-SINR parity: theta=10, msr=40, beta=0.1W
    sharp = replace(config, bs_antenna=AntennaConfig(beamwidth_deg=10.0, msr_db=40.0))
    lm, ls = final_means(sharp, "learner", 0.1 * W, trials)
    gm, gs = final_means(sharp, "gt", 0.1 * W, trials)
    rows.append(("sharp", lm, gm, (lm - gm) / abs(gm), None))
    return rows


if __name__ == "__main__":
    seeds = [int(s) for s in sys.argv[1:]] or [11]
    for seed in seeds:
        t0 = time.time()
        rows = probe(seed, trials=50)
        dt = time.time() - t0
        print(f"scenario seed {seed}  ({dt:.1f}s)")
        for row in rows:
            beta, lm, gm, gap, sig = row
            tag = "beta=%r" % (beta,)
            sigtxt = "" if sig is None else f"  gap/SE={sig:.1f}"
            print(f"  {tag:>18}: learner={lm:.4g} gt={gm:.4g} gap={gap:+.1%}{sigtxt}")
