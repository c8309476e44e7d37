"""Availability and downlink coverage of UAV hotspots recharged at shared ground stations.

UAVs hover over user hotspots, fly back to the nearest charging station when
their battery runs low, queue for one of ``c`` charging slots and return. An
occupied charging station also transmits as a terrestrial base station. The
package computes the long-run availability of a hotspot UAV and the SINR
coverage of a hotspot user analytically, and checks both with a Monte Carlo
simulation of the whole network.
"""

from .availability import AvailabilityReport, availability, conditional_availability, state_availability
from .coverage import CoverageReport, coverage, coverage_inputs
from .energy import EnergyProfile, expected_profile
from .geometry import CellCountPmf, cell_count_pmf
from .laplace import ServingCase, laplace_derivatives, laplace_interference, laplace_noise_plus_interference
from .params import (ChannelConfig, ConfigError, EnergyConfig, NetworkConfig, RotorParams, SystemConfig,
                     default_config, load_config, parse_config, save_config)
from .queueing import QueueSolution, activity_probabilities, solve_queue
from .simulation import SimEstimate, SimScenario, estimate_laplace, simulate_network, simulate_queue_chain

__all__ = [
    "AvailabilityReport", "CellCountPmf", "ChannelConfig", "ConfigError", "CoverageReport", "EnergyConfig",
    "EnergyProfile", "NetworkConfig", "QueueSolution", "RotorParams", "ServingCase", "SimEstimate",
    "SimScenario", "SystemConfig", "activity_probabilities", "availability", "cell_count_pmf",
    "conditional_availability", "coverage", "coverage_inputs", "default_config", "estimate_laplace",
    "expected_profile", "laplace_derivatives", "laplace_interference", "laplace_noise_plus_interference",
    "load_config", "parse_config", "save_config", "simulate_network", "simulate_queue_chain", "solve_queue",
    "state_availability",
]
