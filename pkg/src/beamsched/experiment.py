"""Experiment runner: multi-trial, multi-strategy sweeps over power
quantization, interference states, payoff weights and antenna settings,
with deterministic per-trial seeding and CSV/JSON emission.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channel import AntennaConfig
from .env import NetworkEnv, PayoffWeights, running_average_reward
from .gametheory import run_block_gt
from .lyapunov import LyapunovConfig, PowerUtility, run_lyapunov
from .qlearning import (
    STREAM_EXEC_CHANNEL,
    STREAM_GT_INIT,
    STREAM_POLICY,
    STREAM_RANDOM,
    STREAM_TRAIN_CHANNEL,
    STREAM_TRAIN_POWER,
    PowerLevels,
    QLearningAgent,
    build_quantizers,
    collect_interference_samples,
    run_block,
)
from .scenario import load_scenario

KNOWN_STRATEGIES = ("learner", "gt", "random")


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: a scenario, strategy arms, sweep axes and trial
    seeding (trial seed = base seed + trial index)."""

    scenario_path: str
    mode: str  # "block" | "lyapunov"
    strategies: tuple
    trials: int
    base_seed: int
    throughput_weight: float
    power_cost_weights: tuple
    power_levels_list: tuple
    interference_states_list: tuple
    antennas: tuple  # AntennaConfig per sweep entry, or None for the scenario's own
    scheduled_ue: object  # 1-based per-BS UE index, or "round_robin" (lyapunov only)
    training_frames: int
    lyapunov: LyapunovConfig | None


@dataclass
class ResultRecord:
    """Aggregated series for one sweep point and strategy: per-step mean
    and standard error across trials of the running-average network reward
    (block mode) or cumulative utility (lyapunov mode)."""

    strategy: str
    mode: str
    n_power_levels: int
    n_interference_states: int
    power_cost_weight: object
    msr_db: object
    beamwidth_deg: object
    scheduled_ue: object
    trials: int
    mean: np.ndarray
    stderr: np.ndarray

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def final_stderr(self) -> float:
        return float(self.stderr[-1])

    def coords(self) -> tuple:
        return (
            self.n_power_levels,
            self.n_interference_states,
            self.power_cost_weight,
            self.msr_db,
            self.beamwidth_deg,
            self.scheduled_ue,
        )


@dataclass
class ExperimentResult:
    records: list
    trace_rows: list  # per-slot rows (block) or per-frame rows (lyapunov)
    trace_fields: list


def validate_experiment_spec(data, base_dir=None) -> list:
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            return [f"not valid JSON: {exc}"]
    if not isinstance(data, dict):
        return ["experiment spec must be a JSON object"]
    errors = []
    scenario = data.get("scenario")
    if not isinstance(scenario, str):
        errors.append("scenario: missing or not a path string")
    else:
        path = Path(base_dir or ".") / scenario
        if not path.exists():
            errors.append(f"scenario: file not found: {path}")
    mode = data.get("mode", "block")
    if mode not in ("block", "lyapunov"):
        errors.append(f"mode: must be 'block' or 'lyapunov', got {mode!r}")
    strategies = data.get("strategies", ["learner", "gt"])
    if not isinstance(strategies, list) or not strategies:
        errors.append("strategies: must be a non-empty list")
    else:
        for s in strategies:
            if s not in KNOWN_STRATEGIES:
                errors.append(f"strategies: unknown strategy {s!r}")
    trials = data.get("trials", 50)
    if not isinstance(trials, int) or trials < 1:
        errors.append(f"trials: must be an integer >= 1, got {trials!r}")
    if not isinstance(data.get("seed", 1), int):
        errors.append("seed: must be an integer")

    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        errors.append("sweep: must be an object")
        sweep = {}
    for key, minimum in (("power_levels", 2), ("interference_states", 1)):
        values = sweep.get(key, [10])
        if not isinstance(values, list) or not values:
            errors.append(f"sweep.{key}: must be a non-empty list")
        elif any(not isinstance(v, int) or v < minimum for v in values):
            errors.append(f"sweep.{key}: entries must be integers >= {minimum}")
    weights = sweep.get("power_cost_weight", [0.0])
    if not isinstance(weights, list) or not weights:
        errors.append("sweep.power_cost_weight: must be a non-empty list")
    elif any(isinstance(w, bool) or not isinstance(w, (int, float)) or w < 0 for w in weights):
        errors.append("sweep.power_cost_weight: entries must be numbers >= 0")
    antennas = sweep.get("antennas")
    if antennas is not None:
        if not isinstance(antennas, list) or not antennas:
            errors.append("sweep.antennas: must be a non-empty list")
        else:
            for idx, a in enumerate(antennas):
                if not isinstance(a, dict) or "msr_db" not in a or "beamwidth_deg" not in a:
                    errors.append(
                        f"sweep.antennas[{idx}]: need an object with msr_db and beamwidth_deg"
                    )
    selector = sweep.get("scheduled_ue", 1)
    if selector == "round_robin":
        if mode != "lyapunov":
            errors.append("sweep.scheduled_ue: round_robin is only supported in lyapunov mode")
    elif not isinstance(selector, int) or selector < 1:
        errors.append("sweep.scheduled_ue: must be a 1-based integer index or 'round_robin'")

    if not isinstance(data.get("training_frames", 100), int) or data.get("training_frames", 100) < 1:
        errors.append("training_frames: must be an integer >= 1")
    lyap = data.get("lyapunov")
    if mode == "lyapunov":
        lyap = lyap or {}
        if not isinstance(lyap, dict):
            errors.append("lyapunov: must be an object")
        else:
            for key, default in (("v", 1e9), ("p_avg_w", None), ("n_frames", 50)):
                value = lyap.get(key, default)
                if value is None:
                    continue
                if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                    errors.append(f"lyapunov.{key}: must be a positive number")
            exponent = lyap.get("utility_exponent", 0.6)
            if not isinstance(exponent, (int, float)) or not 0 < exponent < 1:
                errors.append("lyapunov.utility_exponent: must lie in (0, 1)")
    return errors


def parse_experiment_spec(data, base_dir=None) -> ExperimentSpec:
    if isinstance(data, (str, bytes)):
        data = json.loads(data)
    errors = validate_experiment_spec(data, base_dir)
    if errors:
        raise ValueError(
            "invalid experiment spec:\n" + "\n".join(f"  - {e}" for e in errors)
        )
    sweep = data.get("sweep", {})
    antennas = sweep.get("antennas")
    antenna_cfgs = (
        tuple(
            AntennaConfig(
                beamwidth_deg=float(a["beamwidth_deg"]),
                msr_db=float(a["msr_db"]),
                total_gain=float(a.get("total_gain", 360.0)),
            )
            for a in antennas
        )
        if antennas
        else (None,)
    )
    scenario_path = str(Path(base_dir or ".") / data["scenario"])
    mode = data.get("mode", "block")
    lyap = None
    if mode == "lyapunov":
        section = data.get("lyapunov", {})
        scenario = load_scenario(scenario_path)
        lyap = LyapunovConfig(
            v=float(section.get("v", 1e9)),
            p_avg_w=float(section.get("p_avg_w", 0.5 * scenario.p_max_w)),
            n_frames=int(section.get("n_frames", 50)),
            utility=PowerUtility(float(section.get("utility_exponent", 0.6))),
        )
    return ExperimentSpec(
        scenario_path=scenario_path,
        mode=mode,
        strategies=tuple(data.get("strategies", ["learner", "gt"])),
        trials=int(data.get("trials", 50)),
        base_seed=int(data.get("seed", 1)),
        throughput_weight=float(data.get("throughput_weight", 1.0)),
        power_cost_weights=tuple(float(w) for w in sweep.get("power_cost_weight", [0.0])),
        power_levels_list=tuple(sweep.get("power_levels", [10])),
        interference_states_list=tuple(sweep.get("interference_states", [10])),
        antennas=antenna_cfgs,
        scheduled_ue=sweep.get("scheduled_ue", 1),
        training_frames=int(data.get("training_frames", 100)),
        lyapunov=lyap,
    )


def load_experiment_spec(path) -> ExperimentSpec:
    path = Path(path)
    try:
        return parse_experiment_spec(path.read_text(), base_dir=path.parent)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def resolve_scheduled_ues(config, selector):
    """Map a 1-based per-BS UE index to the global UE indices."""
    sched = []
    for i, members in enumerate(config.geometry.ues_of_bs):
        if selector > len(members):
            raise ValueError(
                f"scheduled_ue={selector} but BS {i} serves only {len(members)} UEs"
            )
        sched.append(members[selector - 1])
    return tuple(sched)


def run_block_random(env, scheduled_ues, realization, weights, n_slots, power_levels, rng):
    """Uniform random power level each slot; the sanity floor strategy."""
    outcomes = []
    for _ in range(n_slots):
        powers = power_levels.levels[
            rng.integers(power_levels.n_levels, size=env.config.n_bs)
        ]
        outcomes.append(env.step(scheduled_ues, powers, realization, weights))
    return outcomes


def run_block_trial(
    env,
    strategy: str,
    scheduled_ues,
    power_levels: PowerLevels,
    n_states: int,
    weights: PayoffWeights,
    trial_seed: int,
    training_samples=None,
    training_frames: int = 100,
):
    """One seeded trial of one strategy over a single block.

    All strategies share the trial's fading draw, so arms are compared on
    identical channels.  Returns the slot outcomes.
    """
    cfg = env.config
    realization = env.redraw_channel((trial_seed, STREAM_EXEC_CHANNEL), 0)
    n_b = cfg.frame.slots_per_block
    if strategy == "learner":
        if training_samples is None:
            training_samples = trial_training_samples(
                env, scheduled_ues, power_levels, training_frames, trial_seed
            )
        quantizers = build_quantizers(training_samples, n_states)
        agents = [
            QLearningAgent(
                power_levels,
                {scheduled_ues[i]: quantizers[i]},
                learning_rate=cfg.learning.learning_rate,
                discount=cfg.learning.discount,
                epsilon=cfg.learning.epsilon,
                rng=np.random.default_rng((trial_seed, STREAM_POLICY, i)),
            )
            for i in range(cfg.n_bs)
        ]
        return run_block(env, agents, scheduled_ues, realization, weights, n_b), agents
    if strategy == "gt":
        rng = np.random.default_rng((trial_seed, STREAM_GT_INIT))
        return (
            run_block_gt(env, scheduled_ues, realization, weights, n_b, power_levels, rng),
            None,
        )
    if strategy == "random":
        rng = np.random.default_rng((trial_seed, STREAM_RANDOM))
        return (
            run_block_random(env, scheduled_ues, realization, weights, n_b, power_levels, rng),
            None,
        )
    raise ValueError(f"unknown strategy {strategy!r}")


def trial_training_samples(env, scheduled_ues, power_levels, training_frames, trial_seed):
    """Training-phase interference record for one trial; independent of the
    interference-state count and payoff weights, so it is shared across
    those axes."""
    return collect_interference_samples(
        env,
        scheduled_ues,
        power_levels,
        training_frames,
        (trial_seed, STREAM_TRAIN_CHANNEL),
        np.random.default_rng((trial_seed, STREAM_TRAIN_POWER)),
    )


def _aggregate(series):
    arr = np.asarray(series)
    mean = arr.mean(axis=0)
    if arr.shape[0] > 1:
        stderr = arr.std(axis=0, ddof=1) / math.sqrt(arr.shape[0])
    else:
        stderr = np.zeros_like(mean)
    return mean, stderr


def _antenna_coords(antenna):
    if antenna.omnidirectional:
        return None, None
    return antenna.msr_db, antenna.beamwidth_deg


def _sinr_db(sinr):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(sinr)


def run_experiment(spec: ExperimentSpec, collect_traces: bool = True) -> ExperimentResult:
    """Execute every sweep point for every strategy.

    Block mode aggregates the running-average network reward per slot;
    lyapunov mode aggregates cumulative utility per frame.  Output is fully
    determined by (spec, seed).
    """
    scenario = load_scenario(spec.scenario_path)
    records = []
    trace_rows = []
    n_bs = scenario.n_bs
    if spec.mode == "block":
        trace_fields = (
            ["strategy", "power_levels", "interference_states", "power_cost_weight",
             "msr_db", "beamwidth_deg", "scheduled_ue", "trial", "slot"]
            + [f"power_w_b{i}" for i in range(n_bs)]
            + [f"sinr_db_b{i}" for i in range(n_bs)]
            + [f"reward_b{i}" for i in range(n_bs)]
            + ["network_reward"]
        )
    else:
        trace_fields = (
            ["strategy", "power_levels", "interference_states",
             "msr_db", "beamwidth_deg", "scheduled_ue", "trial", "frame", "utility"]
            + [f"target_bits_u{u}" for u in range(scenario.n_ue)]
            + [f"realized_bits_u{u}" for u in range(scenario.n_ue)]
            + [f"tqueue_u{u}" for u in range(scenario.n_ue)]
            + [f"equeue_b{i}" for i in range(n_bs)]
            + [f"tweight_b{i}" for i in range(n_bs)]
            + [f"pweight_b{i}" for i in range(n_bs)]
            + [f"energy_b{i}" for i in range(n_bs)]
            + [f"queue_ratio_b{i}" for i in range(n_bs)]
        )

    betas = spec.power_cost_weights if spec.mode == "block" else (None,)
    for antenna in spec.antennas:
        config = replace(scenario, bs_antenna=antenna) if antenna is not None else scenario
        msr_db, beamwidth_deg = _antenna_coords(config.bs_antenna)
        for p_q in spec.power_levels_list:
            power_levels = PowerLevels(config.p_max_w, p_q)
            fixed_sched = (
                None
                if spec.scheduled_ue == "round_robin"
                else resolve_scheduled_ues(config, spec.scheduled_ue)
            )
            training_cache = {}
            for i_q in spec.interference_states_list:
                for beta in betas:
                    for strategy in spec.strategies:
                        series = []
                        for trial in range(spec.trials):
                            trial_seed = spec.base_seed + trial
                            env = NetworkEnv(config)
                            if spec.mode == "block":
                                weights = PayoffWeights.uniform(
                                    n_bs, spec.throughput_weight, beta
                                )
                                samples = None
                                if strategy == "learner":
                                    samples = training_cache.get(trial_seed)
                                    if samples is None:
                                        samples = trial_training_samples(
                                            env,
                                            fixed_sched,
                                            power_levels,
                                            spec.training_frames,
                                            trial_seed,
                                        )
                                        training_cache[trial_seed] = samples
                                outcomes, _ = run_block_trial(
                                    env,
                                    strategy,
                                    fixed_sched,
                                    power_levels,
                                    i_q,
                                    weights,
                                    trial_seed,
                                    training_samples=samples,
                                )
                                net, _per_bs = running_average_reward(outcomes)
                                series.append(net)
                                if collect_traces:
                                    for t, out in enumerate(outcomes):
                                        row = [
                                            strategy, p_q, i_q, beta,
                                            msr_db, beamwidth_deg, spec.scheduled_ue,
                                            trial, t,
                                        ]
                                        row += [float(p) for p in out.powers_w]
                                        row += [float(x) for x in _sinr_db(out.sinr)]
                                        row += [float(r) for r in out.reward]
                                        row.append(out.network_reward)
                                        trace_rows.append(row)
                            else:
                                if strategy == "random":
                                    raise ValueError(
                                        "the random strategy has no lyapunov-mode driver"
                                    )
                                trace = run_lyapunov(
                                    env,
                                    strategy,
                                    spec.lyapunov,
                                    spec.scheduled_ue
                                    if spec.scheduled_ue == "round_robin"
                                    else fixed_sched,
                                    power_levels,
                                    i_q,
                                    spec.training_frames,
                                    trial_seed,
                                )
                                series.append(trace.utility_series)
                                if collect_traces:
                                    for rec in trace.frames:
                                        ratio = _queue_ratio(
                                            rec.energy_backlog,
                                            rec.throughput_backlog,
                                            config,
                                            spec.scheduled_ue,
                                        )
                                        row = [
                                            strategy, p_q, i_q,
                                            msr_db, beamwidth_deg, spec.scheduled_ue,
                                            trial, rec.frame, rec.utility,
                                        ]
                                        row += [float(x) for x in rec.throughput_target_bits]
                                        row += [float(x) for x in rec.realized_bits]
                                        row += [float(x) for x in rec.throughput_backlog]
                                        row += [float(x) for x in rec.energy_backlog]
                                        row += [float(x) for x in rec.throughput_weight]
                                        row += [float(x) for x in rec.power_weight]
                                        row += [float(x) for x in rec.energy_j]
                                        row += [float(x) for x in ratio]
                                        trace_rows.append(row)
                        mean, stderr = _aggregate(series)
                        records.append(
                            ResultRecord(
                                strategy=strategy,
                                mode=spec.mode,
                                n_power_levels=p_q,
                                n_interference_states=i_q,
                                power_cost_weight=beta,
                                msr_db=msr_db,
                                beamwidth_deg=beamwidth_deg,
                                scheduled_ue=spec.scheduled_ue,
                                trials=spec.trials,
                                mean=mean,
                                stderr=stderr,
                            )
                        )
    return ExperimentResult(records=records, trace_rows=trace_rows, trace_fields=trace_fields)


def _queue_ratio(energy_backlog, throughput_backlog, config, selector):
    """Energy-to-throughput backlog ratio per BS (0 when both are empty)."""
    ratios = []
    for i in range(config.n_bs):
        if selector == "round_robin":
            ue = config.geometry.ues_of_bs[i][0]
        else:
            ue = config.geometry.ues_of_bs[i][selector - 1]
        z = float(energy_backlog[i])
        h = float(throughput_backlog[ue])
        if z == 0.0:
            ratios.append(0.0)
        elif h == 0.0:
            ratios.append(float("inf"))
        else:
            ratios.append(z / h)
    return ratios


RESULT_FIELDS = [
    "strategy", "mode", "power_levels", "interference_states", "power_cost_weight",
    "msr_db", "beamwidth_deg", "scheduled_ue", "trials", "step", "mean", "stderr",
]


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return float(value)
    return value


def emit_results(records, fmt: str, path) -> Path:
    """Write aggregated records to ``path``.

    ``csv`` emits one row per (sweep point, strategy, step); ``json`` emits
    the final-step summary with learner/GT ratios per sweep point.  Raises
    on an empty record list without touching the filesystem.
    """
    if not records:
        raise ValueError("no records to emit")
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(RESULT_FIELDS)
                for rec in records:
                    base = [
                        rec.strategy, rec.mode, rec.n_power_levels,
                        rec.n_interference_states, _cell(rec.power_cost_weight),
                        _cell(rec.msr_db), _cell(rec.beamwidth_deg),
                        rec.scheduled_ue, rec.trials,
                    ]
                    for step in range(rec.mean.shape[0]):
                        writer.writerow(
                            base + [step, float(rec.mean[step]), float(rec.stderr[step])]
                        )
        else:
            payload = summarize_records(records)
            with path.open("w") as fh:
                json.dump(payload, fh, indent=2)
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"failed to write results to {path}: {exc}") from exc
    return path


def summarize_records(records) -> dict:
    by_point = {}
    results = []
    for rec in records:
        entry = {
            "strategy": rec.strategy,
            "mode": rec.mode,
            "power_levels": rec.n_power_levels,
            "interference_states": rec.n_interference_states,
            "power_cost_weight": rec.power_cost_weight,
            "msr_db": rec.msr_db,
            "beamwidth_deg": rec.beamwidth_deg,
            "scheduled_ue": rec.scheduled_ue,
            "trials": rec.trials,
            "final_mean": rec.final_mean,
            "final_stderr": rec.final_stderr,
        }
        results.append(entry)
        by_point.setdefault(rec.coords(), {})[rec.strategy] = rec
    comparisons = []
    for coords, strategies in by_point.items():
        if "learner" in strategies and "gt" in strategies:
            learner = strategies["learner"]
            gt = strategies["gt"]
            comparisons.append(
                {
                    "power_levels": coords[0],
                    "interference_states": coords[1],
                    "power_cost_weight": coords[2],
                    "msr_db": coords[3],
                    "beamwidth_deg": coords[4],
                    "scheduled_ue": coords[5],
                    "learner_final_mean": learner.final_mean,
                    "gt_final_mean": gt.final_mean,
                    "learner_gt_ratio": (
                        learner.final_mean / gt.final_mean if gt.final_mean != 0 else None
                    ),
                }
            )
    return {"results": results, "comparisons": comparisons}


def emit_traces(result: ExperimentResult, path) -> Path:
    """Per-slot (block) or per-frame (lyapunov) trace CSV."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(result.trace_fields)
            for row in result.trace_rows:
                writer.writerow([_cell(v) for v in row])
    except OSError as exc:
        raise OSError(f"failed to write traces to {path}: {exc}") from exc
    return path
