"""Frame-level utility maximization via drift-plus-penalty: virtual
throughput and energy queues, the per-frame auxiliary-variable solve, and
the mapping of queue backlogs into per-block payoff weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import NetworkEnv, PayoffWeights, serving_link_coefficient
from .gametheory import run_block_gt
from .qlearning import (
    STREAM_GT_INIT,
    STREAM_LYAP_CHANNEL,
    STREAM_POLICY,
    STREAM_TRAIN_CHANNEL,
    STREAM_TRAIN_POWER,
    PowerLevels,
    QLearningAgent,
    run_block,
    run_training_phase,
)


@dataclass(frozen=True)
class PowerUtility:
    """Fairness utility U(x) = x**exponent with exponent in (0, 1):
    strictly increasing and strictly concave on x > 0."""

    exponent: float = 0.6

    def __post_init__(self):
        if not 0.0 < self.exponent < 1.0:
            raise ValueError("utility exponent must lie in (0, 1)")

    def __call__(self, x):
        return np.power(x, self.exponent)

    def derivative(self, x):
        return self.exponent * np.power(x, self.exponent - 1.0)


@dataclass
class VirtualQueues:
    """Backlogs enforcing the long-term constraints: per-UE throughput
    queues (bits) and per-BS energy queues (joule).  Never negative."""

    throughput_bits: np.ndarray
    energy_j: np.ndarray

    @classmethod
    def zeros(cls, n_ue: int, n_bs: int) -> "VirtualQueues":
        return cls(np.zeros(n_ue), np.zeros(n_bs))


@dataclass(frozen=True)
class LyapunovConfig:
    """Driver knobs: utility/backlog trade-off v, per-BS average power
    budget and the frame horizon."""

    v: float
    p_avg_w: float
    n_frames: int
    utility: PowerUtility = field(default_factory=PowerUtility)

    def __post_init__(self):
        if self.v <= 0.0:
            raise ValueError("trade-off constant must be positive")
        if self.p_avg_w <= 0.0:
            raise ValueError("average power budget must be positive")
        if self.n_frames < 0:
            raise ValueError("frame horizon must be non-negative")


def solve_auxiliary(v: float, backlog: float, upper: float, utility: PowerUtility = PowerUtility()) -> float:
    """Maximize v*U(x) - backlog*x over the box [0, upper].

    For the power-law utility the unconstrained stationary point is
    (c*v/backlog)**(1/(1-c)); the concave objective makes clipping to the
    box exact.  A zero backlog leaves the objective increasing, so the
    upper end is optimal.
    """
    if v <= 0.0:
        raise ValueError("trade-off constant must be positive")
    if upper < 0.0 or backlog < 0.0:
        raise ValueError("backlog and box bound must be non-negative")
    if upper == 0.0:
        return 0.0
    if backlog == 0.0:
        return float(upper)
    c = utility.exponent
    stationary = (c * v / backlog) ** (1.0 / (1.0 - c))
    return float(min(stationary, upper))


def gamma_upper_bound(
    config, realization, bs_index: int, ue_index: int, p_max_w: float
) -> float:
    """Most bits one frame could carry to this UE: peak power on the direct
    link with no interference (a valid upper bound on any realizable rate)."""
    g_free = (
        serving_link_coefficient(config, realization, bs_index, ue_index)
        / config.radio.noise_power_w
    )
    return config.frame.frame_s * config.radio.bandwidth_hz * math.log2(1.0 + g_free * p_max_w)


def frame_weights(
    queues: VirtualQueues, bs_index: int, scheduled_ue: int, slots_per_block: int
):
    """Per-block payoff weights for one BS: the scheduled UE's throughput
    backlog and the BS's energy backlog, each scaled by the block length."""
    return (
        float(queues.throughput_bits[scheduled_ue] * slots_per_block),
        float(queues.energy_j[bs_index] * slots_per_block),
    )


def update_throughput_queue(backlog, target_bits, realized_bits):
    """max(backlog + target - realized, 0)."""
    return np.maximum(np.asarray(backlog) + target_bits - realized_bits, 0.0)


def update_energy_queue(backlog, consumed_j, budget_j):
    """max(backlog + consumed - budget, 0)."""
    return np.maximum(np.asarray(backlog) + consumed_j - budget_j, 0.0)


@dataclass(frozen=True)
class FrameRecord:
    """State and outcome of one frame, with the queue values that shaped
    its weights (pre-update)."""

    frame: int
    throughput_target_bits: np.ndarray  # per UE
    realized_bits: np.ndarray  # per UE
    throughput_backlog: np.ndarray  # per UE
    energy_backlog: np.ndarray  # per BS
    throughput_weight: np.ndarray  # per BS
    power_weight: np.ndarray  # per BS
    energy_j: np.ndarray  # per BS
    utility: float  # cumulative utility through this frame


@dataclass
class LyapunovTrace:
    frames: list
    queues: VirtualQueues

    @property
    def utility_series(self) -> np.ndarray:
        return np.array([f.utility for f in self.frames])


def _schedule_for_block(config, scheduled_ues, block_counter: int):
    if scheduled_ues == "round_robin":
        return tuple(
            members[block_counter % len(members)] for members in config.geometry.ues_of_bs
        )
    return tuple(int(u) for u in scheduled_ues)


def run_lyapunov(
    env: NetworkEnv,
    strategy: str,
    lyap: LyapunovConfig,
    scheduled_ues,
    power_levels: PowerLevels,
    n_states: int,
    training_frames: int,
    trial_seed: int,
) -> LyapunovTrace:
    """Drive the chosen per-block strategy for ``lyap.n_frames`` frames.

    Each frame: redraw fading, bound and solve the per-UE throughput
    targets, map queue backlogs into payoff weights, run the frame's
    blocks, then absorb realized bits and energy into the queues.  The
    learner keeps its Q-tables across frames; quantizers are trained once
    before the first frame.  Reported utility is the sum over UEs of
    U(average bits per frame so far).
    """
    if strategy not in ("learner", "gt"):
        raise ValueError(f"unknown strategy {strategy!r}")
    cfg = env.config
    n_bs, n_ue = cfg.n_bs, cfg.n_ue
    n_b = cfg.frame.slots_per_block
    blocks = cfg.frame.blocks_per_frame

    if scheduled_ues == "round_robin":
        counts = {len(m) for m in cfg.geometry.ues_of_bs}
        if len(counts) != 1:
            raise ValueError("round-robin scheduling needs equal UE counts per BS")

    agents = None
    gt_rng = np.random.default_rng((trial_seed, STREAM_GT_INIT))
    if strategy == "learner":
        sets = {
            _schedule_for_block(cfg, scheduled_ues, b)
            for b in range(max(1, blocks * max(1, lyap.n_frames)))
        }
        quantizers: list[dict] = [dict() for _ in range(n_bs)]
        for set_id, sched in enumerate(sorted(sets)):
            per_bs = run_training_phase(
                env,
                sched,
                power_levels,
                n_states,
                training_frames,
                (trial_seed, STREAM_TRAIN_CHANNEL, set_id),
                np.random.default_rng((trial_seed, STREAM_TRAIN_POWER, set_id)),
            )
            for i in range(n_bs):
                quantizers[i][sched[i]] = per_bs[i]
        agents = [
            QLearningAgent(
                power_levels,
                quantizers[i],
                learning_rate=cfg.learning.learning_rate,
                discount=cfg.learning.discount,
                epsilon=cfg.learning.epsilon,
                rng=np.random.default_rng((trial_seed, STREAM_POLICY, i)),
            )
            for i in range(n_bs)
        ]

    queues = VirtualQueues.zeros(n_ue, n_bs)
    cumulative_bits = np.zeros(n_ue)
    records = []
    block_counter = 0
    for k in range(lyap.n_frames):
        realization = env.redraw_channel((trial_seed, STREAM_LYAP_CHANNEL), k)

        targets = np.zeros(n_ue)
        for i in range(n_bs):
            for u in cfg.geometry.ues_of_bs[i]:
                upper = gamma_upper_bound(cfg, realization, i, u, cfg.p_max_w)
                targets[u] = solve_auxiliary(
                    lyap.v, float(queues.throughput_bits[u]), upper, lyap.utility
                )

        backlog_t = queues.throughput_bits.copy()
        backlog_e = queues.energy_j.copy()
        realized = np.zeros(n_ue)
        energy = np.zeros(n_bs)
        frame_tw = np.zeros(n_bs)
        frame_pw = np.zeros(n_bs)
        for b in range(blocks):
            sched = _schedule_for_block(cfg, scheduled_ues, block_counter)
            tw, pw = zip(
                *(frame_weights(queues, i, sched[i], n_b) for i in range(n_bs))
            )
            weights = PayoffWeights(np.array(tw), np.array(pw))
            if b == 0:
                frame_tw, frame_pw = weights.throughput, weights.power
            if strategy == "learner":
                outcomes = run_block(env, agents, sched, realization, weights, n_b)
            else:
                outcomes = run_block_gt(
                    env, sched, realization, weights, n_b, power_levels, gt_rng
                )
            for out in outcomes:
                energy += cfg.frame.slot_s * out.powers_w
                for i in range(n_bs):
                    realized[sched[i]] += out.throughput_bits[i]
            block_counter += 1

        queues.throughput_bits = update_throughput_queue(
            queues.throughput_bits, targets, realized
        )
        queues.energy_j = update_energy_queue(
            queues.energy_j, energy, cfg.frame.frame_s * lyap.p_avg_w
        )
        if np.any(queues.throughput_bits < 0.0) or np.any(queues.energy_j < 0.0):
            raise RuntimeError("virtual queue went negative")

        cumulative_bits += realized
        utility = float(np.sum(lyap.utility(cumulative_bits / (k + 1))))
        records.append(
            FrameRecord(
                frame=k,
                throughput_target_bits=targets,
                realized_bits=realized,
                throughput_backlog=backlog_t,
                energy_backlog=backlog_e,
                throughput_weight=frame_tw,
                power_weight=frame_pw,
                energy_j=energy,
                utility=utility,
            )
        )
    return LyapunovTrace(frames=records, queues=queues)
