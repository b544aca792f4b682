"""Quantized network coding of sparse messages.

Simulates network-coded data gathering over random directed
deployments, certifies the compressed-sensing quality of the induced
measurement matrix through exact weighted chi-square tail probabilities
and RIP probability bounds, and recovers sparse messages by l1
minimization.
"""

from .coding import (CoefficientSchedule, MeasurementSystem, NetworkState,
                     QuantizerSpec, build_mixing_matrix, calibrate_dynamic_range,
                     draw_coefficients, gateway_selector, initial_state,
                     injection_variance, load_measurement_system, run_qnc,
                     save_measurement_system, step, transfer_matrix)
from .errors import (ConfigError, DecodeError, InfeasibleProblemError,
                     NumericalError, QncError, QuadratureError)
from .harness import (EndToEndRecord, MeasurementRatio, SweepConfig, SweepRecord,
                      SweepSummary, TailCurveEvaluator, ensemble_tail,
                      measurement_ratio, minimum_measurements_gaussian,
                      minimum_measurements_qnc, parse_sweep_config, rip_report,
                      run_end_to_end, run_sweep, summarize_records)
from .network import (DeploymentConfig, Edge, NetworkGraph, generate_deployment,
                      incoming_edges, load_graph, outgoing_edges, save_graph)
from .recovery import (RecoveryMetrics, RecoveryProblem, SparseSignal,
                       generate_sparse_message, l1_min_decode, load_problem,
                       load_solution, random_orthonormal_basis, recovery_report,
                       save_problem, save_solution)
from .rip import (TailSearchResult, direction_spectrum, min_rank_limited_tail,
                  norm_quadratic_form, psd_spectrum, rip_probability_bound,
                  sphere_average_weight_sum, worst_case_tail, worst_case_tail_gram,
                  write_tail_curve)
from .tail import gaussian_tail, monte_carlo_tail, weighted_chisq_tail

__version__ = "0.1.0"

__all__ = [
    "CoefficientSchedule", "ConfigError", "DecodeError", "DeploymentConfig",
    "Edge", "EndToEndRecord", "InfeasibleProblemError", "MeasurementRatio",
    "MeasurementSystem", "NetworkGraph", "NetworkState", "NumericalError",
    "QncError", "QuadratureError", "QuantizerSpec", "RecoveryMetrics",
    "RecoveryProblem", "SparseSignal", "SweepConfig", "SweepRecord",
    "SweepSummary", "TailCurveEvaluator", "TailSearchResult",
    "build_mixing_matrix", "calibrate_dynamic_range", "direction_spectrum",
    "draw_coefficients", "ensemble_tail", "gateway_selector",
    "gaussian_tail", "generate_deployment", "generate_sparse_message",
    "incoming_edges", "initial_state", "injection_variance", "l1_min_decode",
    "load_graph", "load_measurement_system", "load_problem", "load_solution",
    "measurement_ratio", "min_rank_limited_tail",
    "minimum_measurements_gaussian", "minimum_measurements_qnc",
    "monte_carlo_tail", "norm_quadratic_form", "outgoing_edges",
    "parse_sweep_config", "psd_spectrum", "random_orthonormal_basis",
    "recovery_report", "rip_probability_bound", "rip_report", "run_end_to_end",
    "run_qnc", "run_sweep", "save_graph", "save_measurement_system",
    "save_problem", "save_solution", "sphere_average_weight_sum", "step",
    "summarize_records",
    "transfer_matrix", "weighted_chisq_tail", "worst_case_tail",
    "worst_case_tail_gram", "write_tail_curve",
]
