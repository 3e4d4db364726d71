"""Shared radio environment: topology, frame clock, per-frame fading
redraws, slot execution and payoff accounting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import (
    AntennaConfig,
    ChannelRealization,
    FadingParams,
    Geometry,
    RadioConstants,
    antenna_gain,
    geometric_coupling,
    sample_nakagami,
)


@dataclass(frozen=True)
class FrameStructure:
    """Frame = blocks_per_frame blocks, block = slots_per_block slots."""

    blocks_per_frame: int
    slots_per_block: int
    slot_s: float

    def __post_init__(self):
        if self.blocks_per_frame < 1 or self.slots_per_block < 1:
            raise ValueError("frame structure counts must be >= 1")
        if self.slot_s <= 0.0:
            raise ValueError("slot duration must be positive")

    @property
    def block_s(self) -> float:
        return self.slots_per_block * self.slot_s

    @property
    def frame_s(self) -> float:
        return self.blocks_per_frame * self.slots_per_block * self.slot_s


@dataclass(frozen=True)
class LearningParams:
    epsilon: float = 0.05
    discount: float = 0.9
    learning_rate: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("exploration rate must lie in [0, 1]")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount factor must lie in [0, 1)")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning rate must lie in (0, 1]")


@dataclass(frozen=True)
class PayoffWeights:
    """Per-BS weights of the slot reward
    reward_i = throughput_weight_i * bits_i - power_weight_i * slot_s * p_i.

    Both weights may be zero simultaneously (degenerate frames under the
    queue-driven weight mapping yield all-zero rewards).
    """

    throughput: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        tw = np.asarray(self.throughput, dtype=float)
        pw = np.asarray(self.power, dtype=float)
        if tw.shape != pw.shape:
            raise ValueError("weight arrays must have matching shapes")
        if np.any(tw < 0.0) or np.any(pw < 0.0):
            raise ValueError("payoff weights must be non-negative")
        object.__setattr__(self, "throughput", tw)
        object.__setattr__(self, "power", pw)

    @classmethod
    def uniform(cls, n_bs: int, throughput: float, power: float) -> "PayoffWeights":
        return cls(np.full(n_bs, float(throughput)), np.full(n_bs, float(power)))


@dataclass(frozen=True)
class SlotOutcome:
    """Joint result of one slot, indexed by serving BS."""

    scheduled_ues: tuple
    powers_w: np.ndarray
    sinr: np.ndarray
    interference_w: np.ndarray
    throughput_bits: np.ndarray
    reward: np.ndarray

    @property
    def network_reward(self) -> float:
        return float(self.reward.sum())


@dataclass(frozen=True)
class NetworkConfig:
    """Immutable scenario: geometry, antennas, fading, radio constants,
    frame structure, power cap and learner defaults."""

    geometry: Geometry
    bs_antenna: AntennaConfig
    ue_antenna: AntennaConfig
    fading: FadingParams
    radio: RadioConstants
    frame: FrameStructure
    p_max_w: float
    learning: LearningParams = LearningParams()
    name: str = "scenario"

    def __post_init__(self):
        if self.p_max_w <= 0.0:
            raise ValueError("peak transmit power must be positive")

    @property
    def n_bs(self) -> int:
        return self.geometry.n_bs

    @property
    def n_ue(self) -> int:
        return self.geometry.n_ue


def _seed_tuple(seed) -> tuple:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


def serving_link_coefficient(
    config: NetworkConfig, realization: ChannelRealization, bs_index: int, ue_index: int
) -> float:
    """Received power per transmitted watt on the direct link from a BS to
    one of its UEs, with the beam pointed at that UE (no interference)."""
    g_bs = antenna_gain(config.bs_antenna, 0.0)
    g_ue = antenna_gain(config.ue_antenna, 0.0)
    d = config.geometry.distance_m[ue_index, bs_index]
    return g_bs * g_ue * realization.h[ue_index, bs_index] ** 2 * d ** (-config.radio.pathloss_exp)


class NetworkEnv:
    """Executes slots for a fixed scenario.

    One environment instance is owned by a single trial driver; distinct
    trials use distinct instances with independent seed streams.
    """

    def __init__(self, config: NetworkConfig):
        self.config = config
        self._geom_cache = {}
        self._channel_cache = None

    def redraw_channel(self, seed, frame_index: int) -> ChannelRealization:
        """Fresh i.i.d. fading matrix, deterministic under (seed, frame_index)."""
        rng = np.random.default_rng(_seed_tuple(seed) + (int(frame_index),))
        h = sample_nakagami(
            self.config.fading, rng, size=(self.config.n_ue, self.config.n_bs)
        )
        return ChannelRealization(h=h, frame_index=int(frame_index))

    def _geometric(self, sched: tuple) -> np.ndarray:
        cached = self._geom_cache.get(sched)
        if cached is None:
            cached = geometric_coupling(
                self.config.geometry,
                self.config.bs_antenna,
                self.config.ue_antenna,
                sched,
                self.config.radio.pathloss_exp,
            )
            self._geom_cache[sched] = cached
        return cached

    def coupling(self, realization: ChannelRealization, scheduled_ues) -> np.ndarray:
        """Channel coefficients [i, l]: BS l's power into the UE scheduled by
        BS i, fading included.  Cached for repeated slots of one block."""
        sched = tuple(int(u) for u in scheduled_ues)
        cached = self._channel_cache
        if cached is not None and cached[0] is realization and cached[1] == sched:
            return cached[2]
        h2 = realization.h[list(sched), :] ** 2
        channel = self._geometric(sched) * h2
        self._channel_cache = (realization, sched, channel)
        return channel

    def step(
        self,
        scheduled_ues,
        powers_w,
        realization: ChannelRealization,
        weights: PayoffWeights,
    ) -> SlotOutcome:
        """Execute one slot under the joint power profile."""
        cfg = self.config
        powers = np.asarray(powers_w, dtype=float)
        if powers.shape != (cfg.n_bs,):
            raise ValueError("one transmit power per BS is required")
        if np.any(powers < 0.0):
            raise ValueError("transmit powers must be non-negative")
        if np.any(powers > cfg.p_max_w):
            raise ValueError(f"transmit powers must not exceed {cfg.p_max_w} W")

        channel = self.coupling(realization, scheduled_ues)
        signal = powers * np.diag(channel)
        cross = channel.copy()
        np.fill_diagonal(cross, 0.0)
        interference = cross @ powers
        sinr = signal / (interference + cfg.radio.noise_power_w)

        t_s = cfg.frame.slot_s
        throughput = t_s * cfg.radio.bandwidth_hz * np.log2(1.0 + sinr)
        reward = weights.throughput * throughput - weights.power * t_s * powers
        return SlotOutcome(
            scheduled_ues=tuple(int(u) for u in scheduled_ues),
            powers_w=powers.copy(),
            sinr=sinr,
            interference_w=interference,
            throughput_bits=throughput,
            reward=reward,
        )


def running_average_reward(outcomes):
    """Running per-slot averages of the network reward and per-BS rewards.

    Returns ``(network, per_bs)`` where network[t] is the mean network
    reward over slots 0..t and per_bs[t, i] the same for BS i.
    """
    if not outcomes:
        raise ValueError("cannot average an empty slot history")
    per_slot = np.array([o.reward for o in outcomes])
    denom = np.arange(1, per_slot.shape[0] + 1)[:, None]
    per_bs = np.cumsum(per_slot, axis=0) / denom
    return per_bs.sum(axis=1), per_bs


def measure_interference(outcome: SlotOutcome, bs_index: int) -> float:
    """Received interference power (noise excluded) at the UE scheduled by
    the given BS."""
    if not 0 <= bs_index < len(outcome.interference_w):
        raise IndexError(f"BS index {bs_index} out of range")
    return float(outcome.interference_w[bs_index])
