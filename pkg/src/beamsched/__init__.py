"""Seeded simulator of distributed downlink beam scheduling and power
allocation over shared spectrum: independent tabular Q-learning agents, a
best-response baseline, and a queue-driven utility-maximization layer.
"""

from .channel import (
    AntennaConfig,
    ChannelRealization,
    FadingParams,
    Geometry,
    RadioConstants,
    antenna_gain,
    compute_sinrs,
    noise_power_dbm,
    sample_nakagami,
    solve_lobe_gains,
)
from .env import (
    FrameStructure,
    LearningParams,
    NetworkConfig,
    NetworkEnv,
    PayoffWeights,
    SlotOutcome,
    measure_interference,
    running_average_reward,
)
from .experiment import (
    ExperimentSpec,
    ResultRecord,
    emit_results,
    emit_traces,
    load_experiment_spec,
    run_experiment,
)
from .gametheory import GtState, equivalent_gain, gt_power_update, run_block_gt
from .lyapunov import (
    LyapunovConfig,
    PowerUtility,
    VirtualQueues,
    frame_weights,
    gamma_upper_bound,
    run_lyapunov,
    solve_auxiliary,
    update_energy_queue,
    update_throughput_queue,
)
from .qlearning import (
    Experience,
    InterferenceQuantizer,
    PowerLevels,
    QLearningAgent,
    run_block,
    run_training_phase,
    select_action,
    update_q,
)
from .scenario import (
    default_config,
    generate_default_scenario,
    load_scenario,
    parse_scenario,
    validate_scenario,
)

__version__ = "0.1.0"
