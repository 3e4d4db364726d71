"""Link-level physics: keyhole antenna gains, Nakagami fading, thermal
noise and SINR for a joint transmit-power profile.

All link math is carried out in linear units (watts, linear gain); dB
appears only at I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BOLTZMANN_J_PER_K = 1.38e-23


def watts_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w * 1e3)


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) / 1e3


def solve_lobe_gains(beamwidth_deg: float, msr_db: float, total_gain: float = 360.0):
    """Split a total radiated gain budget into main- and side-lobe levels.

    The keyhole pattern radiates ``g_max`` over the beamwidth and ``g_min``
    over the rest of the circle.  The pair satisfies

        beamwidth * g_max + (360 - beamwidth) * g_min = total_gain
        g_max / g_min = 10**(msr_db / 10)

    Returns ``(g_max, g_min)`` in linear gain.
    """
    if not 0.0 < beamwidth_deg < 360.0:
        raise ValueError(f"beamwidth must lie in (0, 360) degrees, got {beamwidth_deg}")
    if total_gain <= 0.0:
        raise ValueError(f"total radiated gain must be positive, got {total_gain}")
    if msr_db < 0.0:
        raise ValueError(f"main-to-side-lobe ratio must be >= 0 dB, got {msr_db}")
    ratio = 10.0 ** (msr_db / 10.0)
    g_min = total_gain / (beamwidth_deg * ratio + 360.0 - beamwidth_deg)
    return ratio * g_min, g_min


@dataclass(frozen=True)
class AntennaConfig:
    """Keyhole antenna: constant main-lobe gain over the beamwidth,
    constant side-lobe gain elsewhere.

    ``total_gain`` is the pattern integral over 360 degrees, so an
    omnidirectional antenna with the default budget has unit linear gain.
    A beamwidth of 360 degrees is normalized to the omnidirectional flag.
    """

    beamwidth_deg: float
    msr_db: float = 0.0
    total_gain: float = 360.0
    omnidirectional: bool = False
    g_max: float = field(init=False)
    g_min: float = field(init=False)

    def __post_init__(self):
        if self.beamwidth_deg >= 360.0:
            object.__setattr__(self, "omnidirectional", True)
            object.__setattr__(self, "beamwidth_deg", 360.0)
        if self.omnidirectional:
            if self.total_gain <= 0.0:
                raise ValueError("total radiated gain must be positive")
            g = self.total_gain / 360.0
            g_max = g_min = g
        else:
            g_max, g_min = solve_lobe_gains(self.beamwidth_deg, self.msr_db, self.total_gain)
        object.__setattr__(self, "g_max", g_max)
        object.__setattr__(self, "g_min", g_min)

    @classmethod
    def omni(cls, total_gain: float = 360.0) -> "AntennaConfig":
        return cls(beamwidth_deg=360.0, msr_db=0.0, total_gain=total_gain, omnidirectional=True)


def normalize_angle_deg(theta_deg: float) -> float:
    """Wrap an angle to (-180, 180] degrees."""
    t = theta_deg % 360.0
    if t > 180.0:
        t -= 360.0
    return t


def antenna_gain(config: AntennaConfig, theta_deg: float) -> float:
    """Linear gain at angular offset ``theta_deg`` from boresight.

    The main lobe is inclusive of its edge: |theta| <= beamwidth/2 maps to
    the main-lobe gain.
    """
    if config.omnidirectional:
        return config.total_gain / 360.0
    t = normalize_angle_deg(theta_deg)
    if abs(t) <= 0.5 * config.beamwidth_deg:
        return config.g_max
    return config.g_min


@dataclass(frozen=True)
class FadingParams:
    """Nakagami-m small-scale fading.

    ``m`` is the shape (>= 0.5) and ``omega`` the mean square amplitude
    E[h^2] (> 0).  Amplitudes are drawn as sqrt(G) with
    G ~ Gamma(shape=m, scale=omega/m).
    """

    m: float
    omega: float

    def __post_init__(self):
        if self.m < 0.5:
            raise ValueError(f"Nakagami shape must be >= 0.5, got {self.m}")
        if self.omega <= 0.0:
            raise ValueError(f"Nakagami spread must be positive, got {self.omega}")


def sample_nakagami(params: FadingParams, rng: np.random.Generator, size=None):
    """Draw Nakagami-m amplitude(s); scalar if ``size`` is None."""
    g = rng.gamma(shape=params.m, scale=params.omega / params.m, size=size)
    return np.sqrt(g)


def noise_power_dbm(noise_figure_db: float, temperature_k: float, bandwidth_hz: float) -> float:
    """Receiver noise power over the band, in dBm:
    10*lg(kB*T0*1e3) + NF + 10*lg(W)."""
    if bandwidth_hz <= 0.0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth_hz}")
    if temperature_k <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature_k}")
    return (
        10.0 * math.log10(BOLTZMANN_J_PER_K * temperature_k * 1e3)
        + noise_figure_db
        + 10.0 * math.log10(bandwidth_hz)
    )


@dataclass(frozen=True)
class RadioConstants:
    """Band, noise and propagation constants shared by all links."""

    bandwidth_hz: float
    noise_figure_db: float
    temperature_k: float
    pathloss_exp: float
    center_freq_hz: float = 37e9  # informational
    noise_power_w: float = field(init=False)

    def __post_init__(self):
        if self.bandwidth_hz <= 0.0:
            raise ValueError("bandwidth must be positive")
        if self.temperature_k <= 0.0:
            raise ValueError("temperature must be positive")
        if self.pathloss_exp <= 0.0:
            raise ValueError("path-loss exponent must be positive")
        sigma2 = (
            BOLTZMANN_J_PER_K
            * self.temperature_k
            * self.bandwidth_hz
            * 10.0 ** (self.noise_figure_db / 10.0)
        )
        object.__setattr__(self, "noise_power_w", sigma2)


@dataclass(frozen=True)
class Geometry:
    """Planar site layout plus fixed UE-to-BS association.

    BS antennas sit at ``bs_height_m``; UE antennas at ground level, so the
    link distance is sqrt(height^2 + planar^2) and never drops below the
    antenna height.
    """

    bs_xy: np.ndarray  # (n_bs, 2) meters
    ue_xy: np.ndarray  # (n_ue, 2) meters
    bs_height_m: float
    serving_bs: tuple  # length n_ue, UE index -> serving BS index
    distance_m: np.ndarray = field(init=False)  # (n_ue, n_bs) 3-D distances
    azimuth_deg: np.ndarray = field(init=False)  # (n_ue, n_bs) bearing BS -> UE
    ues_of_bs: tuple = field(init=False)  # per BS, UE indices in file order

    def __post_init__(self):
        bs = np.asarray(self.bs_xy, dtype=float)
        ue = np.asarray(self.ue_xy, dtype=float)
        if bs.ndim != 2 or bs.shape[1] != 2:
            raise ValueError("bs_xy must have shape (n_bs, 2)")
        if ue.ndim != 2 or ue.shape[1] != 2:
            raise ValueError("ue_xy must have shape (n_ue, 2)")
        if self.bs_height_m <= 0.0:
            raise ValueError("BS antenna height must be positive")
        serving = tuple(int(b) for b in self.serving_bs)
        if len(serving) != ue.shape[0]:
            raise ValueError("one serving BS is required per UE")
        if any(not 0 <= b < bs.shape[0] for b in serving):
            raise ValueError("serving BS index out of range")
        members = tuple(
            tuple(j for j, b in enumerate(serving) if b == i) for i in range(bs.shape[0])
        )
        if any(len(m) == 0 for m in members):
            raise ValueError("every BS must serve at least one UE")

        delta = ue[:, None, :] - bs[None, :, :]  # (n_ue, n_bs, 2)
        planar = np.hypot(delta[..., 0], delta[..., 1])
        dist = np.sqrt(self.bs_height_m**2 + planar**2)
        azim = np.degrees(np.arctan2(delta[..., 1], delta[..., 0]))

        for name, value in (
            ("bs_xy", bs),
            ("ue_xy", ue),
            ("serving_bs", serving),
            ("distance_m", dist),
            ("azimuth_deg", azim),
            ("ues_of_bs", members),
        ):
            object.__setattr__(self, name, value)
        bs.flags.writeable = False
        ue.flags.writeable = False
        dist.flags.writeable = False
        azim.flags.writeable = False

    @property
    def n_bs(self) -> int:
        return self.bs_xy.shape[0]

    @property
    def n_ue(self) -> int:
        return self.ue_xy.shape[0]


@dataclass(frozen=True)
class ChannelRealization:
    """Small-scale fading amplitudes h[ue, bs], constant within one frame."""

    h: np.ndarray
    frame_index: int

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if np.any(h < 0.0):
            raise ValueError("fading amplitudes must be non-negative")
        object.__setattr__(self, "h", h)
        h.flags.writeable = False


def geometric_coupling(
    geometry: Geometry,
    bs_antenna: AntennaConfig,
    ue_antenna: AntennaConfig,
    scheduled_ues,
    pathloss_exp: float,
) -> np.ndarray:
    """Antenna-gain-times-path-loss coefficients between every BS and every
    scheduled UE (fading excluded).

    Entry [i, l] multiplies BS l's transmit power into received power at the
    UE scheduled by BS i.  Each transmitting BS points its main lobe at its
    own scheduled UE; each UE points at its serving BS (irrelevant when the
    UE antenna is omnidirectional).
    """
    n_bs = geometry.n_bs
    sched = tuple(int(u) for u in scheduled_ues)
    if len(sched) != n_bs:
        raise ValueError("exactly one scheduled UE per BS is required")
    for i, u in enumerate(sched):
        if geometry.serving_bs[u] != i:
            raise ValueError(f"UE {u} is not associated with BS {i}")

    coupling = np.empty((n_bs, n_bs))
    boresight = np.array([geometry.azimuth_deg[sched[l], l] for l in range(n_bs)])
    for i in range(n_bs):
        u = sched[i]
        for l in range(n_bs):
            bs_gain = antenna_gain(bs_antenna, geometry.azimuth_deg[u, l] - boresight[l])
            # bearing UE -> BS is the reverse of BS -> UE; the UE faces its
            # serving BS
            to_bs = geometry.azimuth_deg[u, l] + 180.0
            facing = geometry.azimuth_deg[u, i] + 180.0
            ue_gain = antenna_gain(ue_antenna, to_bs - facing)
            coupling[i, l] = bs_gain * ue_gain * geometry.distance_m[u, l] ** (-pathloss_exp)
    return coupling


def compute_sinrs(
    geometry: Geometry,
    bs_antenna: AntennaConfig,
    ue_antenna: AntennaConfig,
    realization: ChannelRealization,
    scheduled_ues,
    powers_w,
    pathloss_exp: float,
    noise_power_w: float,
    p_max_w: float,
):
    """SINR and received interference (watts) at each BS's scheduled UE.

    A BS transmitting zero power raises no beam and contributes no
    interference anywhere; its own UE sees SINR 0.
    Returns ``(sinr, interference_w)`` indexed by serving BS.
    """
    powers = np.asarray(powers_w, dtype=float)
    if powers.shape != (geometry.n_bs,):
        raise ValueError("one transmit power per BS is required")
    if np.any(powers < 0.0):
        raise ValueError("transmit powers must be non-negative")
    if np.any(powers > p_max_w):
        raise ValueError(f"transmit powers must not exceed {p_max_w} W")

    coupling = geometric_coupling(geometry, bs_antenna, ue_antenna, scheduled_ues, pathloss_exp)
    sched = [int(u) for u in scheduled_ues]
    h2 = realization.h[sched, :] ** 2
    channel = coupling * h2
    signal = powers * np.diag(channel)
    cross = channel.copy()
    np.fill_diagonal(cross, 0.0)
    interference = cross @ powers
    sinr = signal / (interference + noise_power_w)
    return sinr, interference
