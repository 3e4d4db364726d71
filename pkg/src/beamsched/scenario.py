"""Scenario files: schema validation, loading into NetworkConfig, and the
seeded generator for the bundled four-site layout.

A scenario is a JSON object:

    {
      "name": "...",
      "bs_positions": [[x, y], ...],          # meters
      "ue_positions": [[x, y], ...],
      "serving_bs": [0, 0, 0, 1, ...],        # one BS index per UE
      "bs_height_m": 20.0,
      "bs_antenna": {"beamwidth_deg": 30.0, "msr_db": 20.0, "total_gain": 360.0},
      "ue_antenna": {"omnidirectional": true, "total_gain": 360.0},
      "fading": {"m": 1e4, "omega": 100.0},
      "radio": {"bandwidth_hz": 4e8, "center_freq_hz": 3.7e10,
                "noise_figure_db": 1.5, "temperature_k": 290.0,
                "pathloss_exp": 4.0},
      "frame": {"blocks_per_frame": 1, "slots_per_block": 100, "slot_s": 1e-3},
      "p_max_w": 7.94,
      "learning": {"epsilon": 0.05, "discount": 0.9, "learning_rate": 0.1}
    }

Per-BS UE ordering follows file order; the bundled generator lists each
BS's cell-edge proxy first and its cell-center proxy last.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channel import AntennaConfig, FadingParams, Geometry, RadioConstants
from .env import FrameStructure, LearningParams, NetworkConfig


def _check_number(errors, data, path, key, *, positive=False, ge=None, lt=None, le=None):
    value = data.get(key)
    full = f"{path}.{key}" if path else key
    if value is None:
        errors.append(f"{full}: missing")
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{full}: expected a number, got {type(value).__name__}")
        return None
    if positive and value <= 0:
        errors.append(f"{full}: must be positive, got {value}")
    if ge is not None and value < ge:
        errors.append(f"{full}: must be >= {ge}, got {value}")
    if lt is not None and value >= lt:
        errors.append(f"{full}: must be < {lt}, got {value}")
    if le is not None and value > le:
        errors.append(f"{full}: must be <= {le}, got {value}")
    return value


def _check_positions(errors, data, key):
    value = data.get(key)
    if value is None:
        errors.append(f"{key}: missing")
        return None
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        errors.append(f"{key}: expected a list of [x, y] pairs")
        return None
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        errors.append(f"{key}: expected a non-empty list of [x, y] pairs")
        return None
    return arr


def _check_antenna(errors, data, path):
    section = data.get(path)
    if not isinstance(section, dict):
        errors.append(f"{path}: missing or not an object")
        return
    omni = section.get("omnidirectional", False)
    total = _check_number(errors, section, path, "total_gain", positive=True)
    if omni:
        return
    beamwidth = _check_number(errors, section, path, "beamwidth_deg", positive=True)
    _check_number(errors, section, path, "msr_db", ge=0.0)
    if beamwidth is not None and total is not None and beamwidth > 360.0:
        errors.append(f"{path}.beamwidth_deg: must be <= 360, got {beamwidth}")


def validate_scenario(data) -> list:
    """Check every schema and domain constraint; returns the full list of
    violations (empty when the scenario is valid)."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            return [f"not valid JSON: {exc}"]
    if not isinstance(data, dict):
        return ["scenario must be a JSON object"]

    errors: list[str] = []
    bs = _check_positions(errors, data, "bs_positions")
    ue = _check_positions(errors, data, "ue_positions")
    serving = data.get("serving_bs")
    if serving is None:
        errors.append("serving_bs: missing")
    elif ue is not None:
        if not isinstance(serving, list) or len(serving) != ue.shape[0]:
            errors.append("serving_bs: need exactly one BS index per UE")
        elif bs is not None:
            bad = [b for b in serving if not isinstance(b, int) or not 0 <= b < bs.shape[0]]
            if bad:
                errors.append(f"serving_bs: indices out of range: {bad}")
            else:
                empty = sorted(set(range(bs.shape[0])) - set(serving))
                if empty:
                    errors.append(f"serving_bs: BS without any associated UE: {empty}")

    _check_number(errors, data, "", "bs_height_m", positive=True)
    _check_antenna(errors, data, "bs_antenna")
    _check_antenna(errors, data, "ue_antenna")

    fading = data.get("fading")
    if not isinstance(fading, dict):
        errors.append("fading: missing or not an object")
    else:
        _check_number(errors, fading, "fading", "m", ge=0.5)
        _check_number(errors, fading, "fading", "omega", positive=True)

    radio = data.get("radio")
    if not isinstance(radio, dict):
        errors.append("radio: missing or not an object")
    else:
        _check_number(errors, radio, "radio", "bandwidth_hz", positive=True)
        _check_number(errors, radio, "radio", "noise_figure_db")
        _check_number(errors, radio, "radio", "temperature_k", positive=True)
        _check_number(errors, radio, "radio", "pathloss_exp", positive=True)

    frame = data.get("frame")
    if not isinstance(frame, dict):
        errors.append("frame: missing or not an object")
    else:
        _check_number(errors, frame, "frame", "blocks_per_frame", ge=1)
        _check_number(errors, frame, "frame", "slots_per_block", ge=1)
        _check_number(errors, frame, "frame", "slot_s", positive=True)

    _check_number(errors, data, "", "p_max_w", positive=True)

    learning = data.get("learning")
    if learning is not None:
        if not isinstance(learning, dict):
            errors.append("learning: not an object")
        else:
            _check_number(errors, learning, "learning", "epsilon", ge=0.0, le=1.0)
            _check_number(errors, learning, "learning", "discount", ge=0.0, lt=1.0)
            _check_number(errors, learning, "learning", "learning_rate", positive=True, le=1.0)
    return errors


def parse_scenario(data) -> NetworkConfig:
    """Build a NetworkConfig from scenario data, raising with the complete
    violation list if anything is invalid."""
    if isinstance(data, (str, bytes)):
        data = json.loads(data)
    errors = validate_scenario(data)
    if errors:
        raise ValueError("invalid scenario:\n" + "\n".join(f"  - {e}" for e in errors))

    def antenna(section) -> AntennaConfig:
        if section.get("omnidirectional", False):
            return AntennaConfig.omni(total_gain=section.get("total_gain", 360.0))
        return AntennaConfig(
            beamwidth_deg=section["beamwidth_deg"],
            msr_db=section.get("msr_db", 0.0),
            total_gain=section.get("total_gain", 360.0),
        )

    learning = data.get("learning", {})
    return NetworkConfig(
        geometry=Geometry(
            bs_xy=np.asarray(data["bs_positions"], dtype=float),
            ue_xy=np.asarray(data["ue_positions"], dtype=float),
            bs_height_m=float(data["bs_height_m"]),
            serving_bs=tuple(data["serving_bs"]),
        ),
        bs_antenna=antenna(data["bs_antenna"]),
        ue_antenna=antenna(data["ue_antenna"]),
        fading=FadingParams(m=float(data["fading"]["m"]), omega=float(data["fading"]["omega"])),
        radio=RadioConstants(
            bandwidth_hz=float(data["radio"]["bandwidth_hz"]),
            noise_figure_db=float(data["radio"]["noise_figure_db"]),
            temperature_k=float(data["radio"]["temperature_k"]),
            pathloss_exp=float(data["radio"]["pathloss_exp"]),
            center_freq_hz=float(data["radio"].get("center_freq_hz", 37e9)),
        ),
        frame=FrameStructure(
            blocks_per_frame=int(data["frame"]["blocks_per_frame"]),
            slots_per_block=int(data["frame"]["slots_per_block"]),
            slot_s=float(data["frame"]["slot_s"]),
        ),
        p_max_w=float(data["p_max_w"]),
        learning=LearningParams(
            epsilon=float(learning.get("epsilon", 0.05)),
            discount=float(learning.get("discount", 0.9)),
            learning_rate=float(learning.get("learning_rate", 0.1)),
        ),
        name=str(data.get("name", "scenario")),
    )


def load_scenario(path) -> NetworkConfig:
    text = Path(path).read_text()
    try:
        return parse_scenario(text)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def generate_default_scenario(seed: int = 11, ues_per_bs: int = 3) -> dict:
    """Four sites at the quarter points of a 100 m grid, three UEs per BS.

    Per BS the first listed UE sits a few meters from the grid center on
    the BS's side (the cell-edge proxy: every site's beam converges there),
    the last sits close to its own BS (the cell-center proxy), and any
    middle UEs are scattered over the cell.  After sampling, the trio is
    relabeled so position in the list matches the proxy rule exactly.
    """
    rng = np.random.default_rng(seed)
    center = np.array([50.0, 50.0])
    bs_positions = [[25.0, 25.0], [25.0, 75.0], [75.0, 25.0], [75.0, 75.0]]
    ue_positions = []
    serving = []
    for i, bs in enumerate(bs_positions):
        toward_bs = np.array(bs) - center
        toward_bs /= np.linalg.norm(toward_bs)
        base_angle = np.arctan2(toward_bs[1], toward_bs[0])

        candidates = []
        # cell-edge proxy: a few meters from the grid center, on this
        # site's side so it stays inside the cell
        r = rng.uniform(4.0, 9.0)
        ang = base_angle + rng.uniform(-np.pi / 3, np.pi / 3)
        candidates.append(center + r * np.array([np.cos(ang), np.sin(ang)]))
        # cell-center proxy: near the site itself
        r = rng.uniform(5.0, 15.0)
        ang = rng.uniform(0.0, 2.0 * np.pi)
        candidates.append(np.array(bs) + r * np.array([np.cos(ang), np.sin(ang)]))
        # remaining UEs: anywhere in the cell
        for _ in range(ues_per_bs - 2):
            r = rng.uniform(5.0, 24.0)
            ang = rng.uniform(0.0, 2.0 * np.pi)
            candidates.append(np.array(bs) + r * np.array([np.cos(ang), np.sin(ang)]))

        ordered = list(candidates)
        by_center = min(range(len(ordered)), key=lambda j: np.linalg.norm(ordered[j] - center))
        first = ordered.pop(by_center)
        by_bs = min(range(len(ordered)), key=lambda j: np.linalg.norm(ordered[j] - np.array(bs)))
        last = ordered.pop(by_bs)
        trio = [first] + ordered + [last]
        for pos in trio:
            ue_positions.append([round(float(pos[0]), 3), round(float(pos[1]), 3)])
            serving.append(i)

    return {
        "name": f"default-4bs-seed{seed}",
        "bs_positions": bs_positions,
        "ue_positions": ue_positions,
        "serving_bs": serving,
        "bs_height_m": 20.0,
        "bs_antenna": {"beamwidth_deg": 30.0, "msr_db": 20.0, "total_gain": 360.0},
        "ue_antenna": {"omnidirectional": True, "total_gain": 360.0},
        "fading": {"m": 1e4, "omega": 100.0},
        "radio": {
            "bandwidth_hz": 4e8,
            "center_freq_hz": 3.7e10,
            "noise_figure_db": 1.5,
            "temperature_k": 290.0,
            "pathloss_exp": 4.0,
        },
        "frame": {"blocks_per_frame": 1, "slots_per_block": 100, "slot_s": 1e-3},
        "p_max_w": 7.94,
        "learning": {"epsilon": 0.05, "discount": 0.9, "learning_rate": 0.1},
    }


def default_config(seed: int = 11) -> NetworkConfig:
    return parse_scenario(generate_default_scenario(seed))


def write_scenario(data: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path
