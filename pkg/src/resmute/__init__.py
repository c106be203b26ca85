"""Max-min resource allocation in interference-coupled networks:
fixed-point solvers, asymptotic performance limits, partial resource
muting, and flexible-duplex extensions."""

__version__ = "0.1.0"

from .asymptotics import (AsymptoticReport, SweepPoint, asymptotic_matrix,
                          asymptotic_report, numeric_asymptotic_limit,
                          perron_eigenpair, solve_downlink, sweep)
from .flexduplex import (SafpConfig, SafpResult, TrafficProfile, fixed_split_solve,
                         frozen_c_asymptotics, imi_sinr, loads, mean_traffic_distance,
                         model_utility, overlap_matrix, run_flexduplex_muting, safp,
                         traffic_distance)
from .muting import (MutingPlan, SelectionStrategy, interference_indicator,
                     mute_interference, muting_norm, run_partial_muting, trigger)
from .netmodel import (Coupling, GeneratorParams, Scenario, ScenarioError,
                       build_coupling, downlink_sif, generate_scenario,
                       load_scenario, per_bs_norm, rate, save_scenario, sinr)
from .oracle import brute_force_maxmin
from .sif import (AxiomReport, CevpSolution, FixedPointConfig, LoadNorm,
                  MonotoneNorm, SifMapping, check_sif_axioms, fixed_point_solve,
                  max_norm, per_service_utilities)
