"""Echo state network observers for inferring hidden Rössler variables."""

from .dynamics import (DivergenceError, RosslerParams, Trajectory, generate_trajectory,
                       rk4_step, rossler_deriv)
from .harness import (ExperimentPlan, SweepRecord, ComparisonRecord, Times, compare_topologies,
                      mse, range_list, run_sweep, run_trial)
from .reservoir import (Observer, ReservoirConfig, collect_states, init_observer, predict,
                        train_readout, update_state)
from .topology import (TopologyKind, TopologySpec, assign_weights, build_skeleton,
                       scale_to_radius, spectral_radius)

__version__ = "0.1.0"
