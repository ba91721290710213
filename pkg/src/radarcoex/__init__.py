"""Radar/cellular coexistence downlink simulator.

The package maps a partial-cooperation network MIMO downlink, in which radar
stations help deliver cellular messages, onto a MIMO interference channel
with generalized power constraints, steers radar transmissions into the
weakly coupled directions of the radar-to-users channel, and minimizes the
weighted sum-MSE by alternating MMSE equalization with KKT precoder updates.
"""

from .scenario import (
    Scenario,
    ScenarioError,
    ServingMap,
    SolverParams,
    Topology,
    load_scenario,
    parse_scenario,
    scenario_from_dict,
    scenario_to_dict,
    serialize_scenario,
    validate_scenario,
)
from .numerics import NumericsError, SvdResult, solve_hermitian, spectral_norm, svd
from .channel import (
    AugmentedRadarChannel,
    ChannelSet,
    augment_radar_channel,
    generate_channels,
    load_channels,
    save_channels,
)
from .projection import Projector, apply_projector, build_projector, leakage_bound
from .equivalence import (
    EquivalentModel,
    SignalSample,
    audit_power,
    build_equivalent_model,
    draw_sample,
    simulate_direct,
    simulate_equivalent,
    split_precoder,
    stack_precoder,
)
from .solver import (
    IterationTrace,
    SolverState,
    init_precoders,
    mse_matrix,
    run_wsmmse,
    solve_duals,
    update_equalizers,
    update_precoders,
)
from .metrics import TrialReport, build_report
from .cli import RunManifest, cmd_project, cmd_simulate, cmd_validate, run_trial

__version__ = "0.1.0"
