"""Mesh-free energy-minimizing solver for elliptic problems with point
sources on embedded interfaces, with a finite-difference baseline."""

from .geometry import (
    ConfigurationError,
    DomainSpec,
    InterfaceSpec,
    LevelSetFn,
    ProblemSpec,
    make_example,
    sixsphere_measures,
    volume_oracle,
)
from .network import (
    ACTIVATIONS,
    SIGMOID,
    TANH,
    NetParams,
    forward,
    grad_x,
    init_params,
    load_checkpoint,
    loss_param_grad,
    loss_terms,
    loss_value,
    param_count,
    save_checkpoint,
)
from .sampler import (
    RngState,
    SampleBatch,
    example5_point_counts,
    fixed_batch,
    make_batch,
    midpoint_grid,
    sample_boundary,
    sample_domain,
    sample_interface,
)
from .trainer import (
    AdamState,
    EnergyEstimate,
    ErrorReport,
    LossTrace,
    TrainConfig,
    TrainingDiverged,
    adam_step,
    energy_oracle,
    evaluate_errors,
    network_energy_eval,
    relative_errors,
    sgd_step,
    train,
)
from .ib2d import Grid2D, Markers, cosine_delta, grid_errors, ib_report, solve_ib, spread_force

__version__ = "0.1.0"
