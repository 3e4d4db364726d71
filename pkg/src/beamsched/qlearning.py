"""Independent per-BS tabular Q-learning: discrete power actions,
percentile interference states, epsilon-greedy selection and the
one-cell value update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .env import NetworkEnv, PayoffWeights, SlotOutcome

# rng stream tags, combined with the trial seed
STREAM_TRAIN_CHANNEL = 0
STREAM_TRAIN_POWER = 1
STREAM_EXEC_CHANNEL = 2
STREAM_POLICY = 3
STREAM_GT_INIT = 4
STREAM_RANDOM = 5
STREAM_LYAP_CHANNEL = 6


@dataclass(frozen=True)
class PowerLevels:
    """Uniform grid of n_levels transmit powers from 0 to p_max inclusive."""

    p_max_w: float
    n_levels: int
    levels: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n_levels < 2:
            raise ValueError("at least two power levels are required")
        if self.p_max_w <= 0.0:
            raise ValueError("peak power must be positive")
        levels = np.linspace(0.0, self.p_max_w, self.n_levels)
        object.__setattr__(self, "levels", levels)
        levels.flags.writeable = False


@dataclass(frozen=True)
class InterferenceQuantizer:
    """Maps a measured interference power to one of n_states indices.

    Boundaries are empirical percentile cut points; intervals are left-open
    and right-closed, so a measurement equal to a boundary falls in the
    lower state.  Out-of-range measurements clamp to the end states.
    """

    boundaries: np.ndarray
    n_states: int

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if b.shape != (self.n_states - 1,):
            raise ValueError("a quantizer with n states needs n-1 boundaries")
        if np.any(np.diff(b) < 0.0):
            raise ValueError("boundaries must be non-decreasing")
        object.__setattr__(self, "boundaries", b)
        b.flags.writeable = False

    @classmethod
    def from_samples(cls, samples, n_states: int) -> "InterferenceQuantizer":
        """Nearest-rank percentile boundaries at fractions j/n_states, built
        so every state captures a nearly equal share of the sample."""
        if n_states < 1:
            raise ValueError("at least one state is required")
        s = np.sort(np.asarray(samples, dtype=float))
        n = s.shape[0]
        if n < n_states:
            raise ValueError(f"need at least {n_states} samples, got {n}")
        ranks = [math.ceil(n * j / n_states) for j in range(1, n_states)]
        return cls(boundaries=s[[r - 1 for r in ranks]], n_states=n_states)

    def state(self, interference_w: float) -> int:
        """State index in 0..n_states-1."""
        return int(np.searchsorted(self.boundaries, interference_w, side="left"))


class Experience(NamedTuple):
    """One slot's learning quadruple."""

    state: int
    action: int
    reward: float
    next_state: int


def select_action(q: np.ndarray, state: int, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over one table column; greedy ties break to the
    lowest action index."""
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(q.shape[0]))
    return int(np.argmax(q[:, state]))


def update_q(q: np.ndarray, exp: Experience, learning_rate: float, discount: float) -> None:
    """In-place one-cell update:
    Q(a,s) <- (1-lr) Q(a,s) + lr (r + discount * max_a' Q(a', s'))."""
    target = exp.reward + discount * q[:, exp.next_state].max()
    q[exp.action, exp.state] = (1.0 - learning_rate) * q[exp.action, exp.state] + learning_rate * target


class QLearningAgent:
    """One BS's learner.

    Keeps one Q-table per associated UE (selected by the scheduled UE),
    all initialized to ones.  The agent owns its rng so that identically
    seeded agents in symmetric positions act identically.
    """

    def __init__(
        self,
        power_levels: PowerLevels,
        quantizers,  # mapping ue index -> InterferenceQuantizer
        *,
        learning_rate: float,
        discount: float,
        epsilon: float,
        rng: np.random.Generator,
    ):
        self.power_levels = power_levels
        self.quantizers = dict(quantizers)
        self.learning_rate = learning_rate
        self.discount = discount
        self.epsilon = epsilon
        self.rng = rng
        self.tables = {
            ue: np.ones((power_levels.n_levels, quant.n_states))
            for ue, quant in self.quantizers.items()
        }

    def reset(self):
        for table in self.tables.values():
            table[:] = 1.0

    def random_action(self) -> int:
        return int(self.rng.integers(self.power_levels.n_levels))

    def select(self, ue: int, state: int) -> int:
        return select_action(self.tables[ue], state, self.epsilon, self.rng)

    def quantize(self, ue: int, interference_w: float) -> int:
        return self.quantizers[ue].state(interference_w)

    def update(self, ue: int, exp: Experience):
        update_q(self.tables[ue], exp, self.learning_rate, self.discount)


def collect_interference_samples(
    env: NetworkEnv,
    scheduled_ues,
    power_levels: PowerLevels,
    n_frames: int,
    channel_seed,
    power_rng: np.random.Generator,
) -> np.ndarray:
    """Interference observed at each scheduled UE while every BS draws a
    uniformly random power level each slot, over ``n_frames`` frames of
    i.i.d. fading.  Returns an array of shape (frames*slots, n_bs)."""
    if n_frames < 1:
        raise ValueError("training needs at least one frame")
    cfg = env.config
    sched = tuple(int(u) for u in scheduled_ues)
    slots = cfg.frame.blocks_per_frame * cfg.frame.slots_per_block
    out = np.empty((n_frames * slots, cfg.n_bs))
    for f in range(n_frames):
        realization = env.redraw_channel(channel_seed, f)
        channel = env.coupling(realization, sched)
        cross = channel.copy()
        np.fill_diagonal(cross, 0.0)
        draws = power_rng.integers(power_levels.n_levels, size=(slots, cfg.n_bs))
        powers = power_levels.levels[draws]
        out[f * slots : (f + 1) * slots] = powers @ cross.T
    return out


def build_quantizers(samples: np.ndarray, n_states: int):
    """Per-BS quantizers from a (n_samples, n_bs) training record."""
    return [
        InterferenceQuantizer.from_samples(samples[:, i], n_states)
        for i in range(samples.shape[1])
    ]


def run_training_phase(
    env: NetworkEnv,
    scheduled_ues,
    power_levels: PowerLevels,
    n_states: int,
    n_frames: int,
    channel_seed,
    power_rng: np.random.Generator,
):
    """Estimate each scheduled UE's interference distribution under random
    power draws and derive the per-BS percentile quantizers."""
    samples = collect_interference_samples(
        env, scheduled_ues, power_levels, n_frames, channel_seed, power_rng
    )
    return build_quantizers(samples, n_states)


def run_block(
    env: NetworkEnv,
    agents,
    scheduled_ues,
    realization,
    weights: PayoffWeights,
    n_slots: int,
):
    """Run one scheduling block of epsilon-greedy power selection.

    The first slot's action is uniformly random (no prior observation
    exists); the state it induces seeds the chain and value updates start
    from the second slot.  Returns the list of SlotOutcomes.
    """
    sched = tuple(int(u) for u in scheduled_ues)
    outcomes: list[SlotOutcome] = []
    states = [None] * len(agents)
    for _ in range(n_slots):
        actions = [
            agent.random_action() if states[i] is None else agent.select(sched[i], states[i])
            for i, agent in enumerate(agents)
        ]
        powers = np.array(
            [agent.power_levels.levels[a] for agent, a in zip(agents, actions)]
        )
        outcome = env.step(sched, powers, realization, weights)
        for i, agent in enumerate(agents):
            next_state = agent.quantize(sched[i], outcome.interference_w[i])
            if states[i] is not None:
                agent.update(
                    sched[i],
                    Experience(states[i], actions[i], float(outcome.reward[i]), next_state),
                )
            states[i] = next_state
        outcomes.append(outcome)
    return outcomes
