"""Deterministic simulator and analysis toolkit for fully decentralized
multi-agent bandits with one-neighbor gossip on the complete graph."""

from .errors import (
    GossipBanditsError,
    InvalidDimensionError,
    InvalidEpochingError,
    InvalidInputError,
    InvalidParameterError,
    InvalidPopulationError,
    InvalidRewardError,
    ScheduleExhaustedError,
    WrongFamilyError,
    WrongModeError,
)
from .metrics import (
    BoundInputs,
    RegretReport,
    convex_error,
    coupling_error_bound,
    coupling_error_sum,
    epoch_regret_bound,
    mass_survival_horizon,
    mwu_regret_bound,
    population_regret,
    regret_curve,
)
from .mwu import CoupledTrajectory, mwu_step, run_coupled
from .population import (
    AGGREGATE,
    AUTO,
    MEAN_FIELD,
    PER_AGENT,
    PopulationState,
    RoundRng,
    TrajectoryRecord,
    conditional_next,
    resolve_mode,
    run_trajectory,
    step_aggregate,
    step_per_agent,
    uniform_state,
)
from .potentials import (
    BetaAdopt,
    DiscAdopt,
    LinearizationReport,
    ParameterCertificate,
    PotentialFamily,
    SigmoidAdopt,
    SoftmaxCompare,
    TwoNeighborSoftmax,
    adoption_prob,
    certificate,
    comparison_weights,
    eval_potentials,
    make_family,
    verify_exp_linearization,
    verify_sigmoid_linearization,
    zero_sum_residual,
)
from .rewards import (
    AdversarialScript,
    ConvexFunctionSpec,
    GradientOracle,
    LeaderPunishing,
    RewardModel,
    StationaryBernoulli,
    StationaryScaledBernoulli,
    eval_convex,
    gradient,
    gradient_bound,
    next_reward,
    simplex_minimizer,
    three_arm_benchmark,
)
from .simplex import (
    ActionDistribution,
    MeanVector,
    PopulationCounts,
    RewardVector,
    distribution_from_counts,
    l1_distance,
    uniform_distribution,
)

__version__ = "0.1.0"
