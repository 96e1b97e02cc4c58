"""Simulation and analysis of multiplexed bifurcation-amplifier qubit readout."""

__version__ = "0.1.0"

from .analysis import (
    ErrorBudget,
    SCurve,
    Separatrix,
    error_budget,
    fit_separatrix,
    reconstruct_ideal_scurves,
    scurve_crossing,
    scurve_separation,
    scurve_width,
)
from .config import ConfigError, load_config, parse_config
from .demod import DemodWindow, IQPoint, demodulate, digitize
from .experiments import (
    ExperimentPlan,
    run_crosstalk_experiment,
    run_iq_cloud,
    run_rabi_experiment,
    run_scurve_experiment,
    run_simultaneous_readout,
)
from .jba import DriveFrame, bifurcation_edges, integrate_field, steady_states, switching_probability_vs_drive
from .params import CellParams, ParameterError, default_cell, default_cells, dispersive_pulls, linewidth, purcell_time
from .transmon import ControlPulse, simulate_qubit
from .waveform import ComplexEnvelope, ReadoutPulseShape, make_control_envelope, make_readout_envelope, ssb_compose
