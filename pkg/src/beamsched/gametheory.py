"""Non-cooperative best-response baseline: each BS greedily sets the
power maximizing its own payoff given the interference it measured in the
previous slot, with Euclidean projection onto [0, p_max].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import NetworkEnv, PayoffWeights, serving_link_coefficient
from .qlearning import PowerLevels


@dataclass
class GtState:
    """Per-BS iteration state: current powers and last equivalent gains."""

    powers_w: np.ndarray
    gains: np.ndarray


def equivalent_gain(serving_coefficient: float, interference_w, noise_power_w: float):
    """SINR per transmitted watt on the serving link, given the measured
    interference-plus-noise at the scheduled UE."""
    if noise_power_w <= 0.0:
        raise ValueError("noise power must be positive")
    return serving_coefficient / (np.asarray(interference_w, dtype=float) + noise_power_w)


def gt_power_update(
    throughput_weight: float,
    power_weight: float,
    bandwidth_hz: float,
    gain: float,
    p_max_w: float,
) -> float:
    """Best-response power: clip(tw*W/pw - 1/gain, 0, p_max).

    A zero power weight removes the penalty entirely, so the best response
    is peak power (the limit of the formula).  A non-positive gain yields
    zero power (the limit from the other side).
    """
    if power_weight == 0.0:
        return p_max_w
    if gain <= 0.0:
        return 0.0
    target = throughput_weight * bandwidth_hz / power_weight - 1.0 / gain
    return float(min(max(target, 0.0), p_max_w))


def run_block_gt(
    env: NetworkEnv,
    scheduled_ues,
    realization,
    weights: PayoffWeights,
    n_slots: int,
    power_levels: PowerLevels,
    rng,
):
    """Run one block of parallel best-response power adaptation.

    Slot 1 transmits a uniformly random level from the learner's grid (no
    measurement exists yet); every later slot applies the best response to
    the previous slot's measured interference.  ``rng`` may be a single
    generator or one generator per BS.
    """
    cfg = env.config
    sched = tuple(int(u) for u in scheduled_ues)
    n_bs = cfg.n_bs
    if isinstance(rng, np.random.Generator):
        init = rng.integers(power_levels.n_levels, size=n_bs)
    else:
        init = [r.integers(power_levels.n_levels) for r in rng]
    state = GtState(
        powers_w=power_levels.levels[np.asarray(init, dtype=int)].copy(),
        gains=np.zeros(n_bs),
    )

    coeffs = np.array(
        [serving_link_coefficient(cfg, realization, i, sched[i]) for i in range(n_bs)]
    )
    outcomes = []
    for _ in range(n_slots):
        outcome = env.step(sched, state.powers_w, realization, weights)
        outcomes.append(outcome)
        state.gains = equivalent_gain(
            coeffs, outcome.interference_w, cfg.radio.noise_power_w
        )
        state.powers_w = np.array(
            [
                gt_power_update(
                    weights.throughput[i],
                    weights.power[i],
                    cfg.radio.bandwidth_hz,
                    state.gains[i],
                    cfg.p_max_w,
                )
                for i in range(n_bs)
            ]
        )
    return outcomes
