"""Component-centric passive placement onto discrete slot rings.

A fixed main component sits at the board center with its pins; passive
components are assigned to candidate slots ringing the footprint by value
learning, actor-critic, or simulated annealing, trained against a reward
blending clearance and net proximity, and scored by total wirelength.
"""

from .agents import (
    CurvePoint,
    OracleScaleError,
    SaConfig,
    TrainConfig,
    TrainingDivergedError,
    TrainResult,
    acceptance_probability,
    brute_force_oracle,
    epsilon_schedule,
    find_zero_overlap_assignment,
    mean_pairwise_slot_distance,
    predict_placement,
    run_sa,
    save_curve,
    train_a2c,
    train_dqn,
)
from .board import (
    CandidateSlot,
    InstanceFormatError,
    PASSIVE_MODE,
    PASSIVE_NET_MODE,
    Passive,
    PcbInstance,
    Pin,
    Placement,
    Rect,
    StateToken,
    ValidationError,
    build_net_index,
    encode_state,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    load_placement,
    loads_instance,
    save_instance,
    save_placement,
    slot_anchor,
    state_dim,
    validate_instance,
)
from .generate import (
    GenerationInfeasibleError,
    GeneratorSpec,
    PRESETS,
    generate_preset,
    generate_synthetic,
)
from .metrics import (
    IncompletePlacementError,
    MetricsReport,
    PerPassive,
    count_crossings,
    count_overlaps,
    evaluate_placement,
    nearest_pin,
    passive_center,
    require_complete,
    tewl,
    wire_contribution,
    wire_segments,
)
from .nn import (
    AdamState,
    CheckpointFormatError,
    Gradients,
    Mlp,
    NonFiniteGradientError,
    Transition,
    ac_loss,
    adam_step,
    dqn_loss,
    forward,
    grad_check,
    gradient_check_report,
    load_checkpoint,
    log_softmax,
    save_checkpoint,
    softmax,
)
from .placers import A2cPlacer, DqnPlacer, SaPlacer
from .render import RenderStyle, render_svg
from .report import emit_report, metrics_csv_text, save_metrics_csv
from .reward import (
    EnvProtocolError,
    EpisodeTrace,
    PlacementEnv,
    RewardConfig,
    RewardTable,
    build_gamma,
    effective_k,
    env_reset,
    env_step,
    net_centroid,
    overlap_margin,
    reward_nonoverlap,
    reward_proximity,
    save_gamma,
    total_reward,
)

__version__ = "0.1.0"

__all__ = [
    "A2cPlacer",
    "AdamState",
    "CandidateSlot",
    "CheckpointFormatError",
    "CurvePoint",
    "DqnPlacer",
    "EnvProtocolError",
    "EpisodeTrace",
    "GenerationInfeasibleError",
    "GeneratorSpec",
    "Gradients",
    "IncompletePlacementError",
    "InstanceFormatError",
    "MetricsReport",
    "Mlp",
    "NonFiniteGradientError",
    "OracleScaleError",
    "PASSIVE_MODE",
    "PASSIVE_NET_MODE",
    "PRESETS",
    "Passive",
    "PcbInstance",
    "PerPassive",
    "Pin",
    "Placement",
    "PlacementEnv",
    "Rect",
    "RenderStyle",
    "RewardConfig",
    "RewardTable",
    "SaConfig",
    "SaPlacer",
    "StateToken",
    "TrainConfig",
    "TrainResult",
    "TrainingDivergedError",
    "Transition",
    "ValidationError",
    "ac_loss",
    "acceptance_probability",
    "adam_step",
    "brute_force_oracle",
    "build_gamma",
    "build_net_index",
    "count_crossings",
    "count_overlaps",
    "dqn_loss",
    "effective_k",
    "emit_report",
    "encode_state",
    "env_reset",
    "env_step",
    "epsilon_schedule",
    "evaluate_placement",
    "find_zero_overlap_assignment",
    "forward",
    "generate_preset",
    "generate_synthetic",
    "grad_check",
    "gradient_check_report",
    "instance_from_dict",
    "instance_to_dict",
    "load_checkpoint",
    "load_instance",
    "load_placement",
    "loads_instance",
    "log_softmax",
    "mean_pairwise_slot_distance",
    "metrics_csv_text",
    "nearest_pin",
    "net_centroid",
    "overlap_margin",
    "passive_center",
    "predict_placement",
    "render_svg",
    "require_complete",
    "reward_nonoverlap",
    "reward_proximity",
    "run_sa",
    "save_checkpoint",
    "save_curve",
    "save_gamma",
    "save_instance",
    "save_metrics_csv",
    "save_placement",
    "slot_anchor",
    "softmax",
    "state_dim",
    "tewl",
    "total_reward",
    "train_a2c",
    "train_dqn",
    "validate_instance",
    "wire_contribution",
    "wire_segments",
]
