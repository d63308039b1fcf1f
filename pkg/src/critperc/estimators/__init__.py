"""Monte Carlo estimators and the desk-scale experiments built on them."""

from ..estimate import CHECKPOINT_EVERY, Estimate, run_samples
from .construction import EventOResult, estimate_event_g, estimate_event_o
from .experiments import (
    CSV_COLUMNS,
    ExperimentReport,
    critical_pi,
    interval_estimate,
    pi_bounds_check,
    ratio_bounds_hold,
    small_max_cluster_check,
    theorem_one_experiment,
    y_moment_check,
)
from .newman_ziff import estimate_hc_sweep, estimate_pi_sweep, hc_thresholds, pi_thresholds, reweight
from .samplers import (
    LengthResult,
    boundary_touch_samples,
    estimate_characteristic_length,
    estimate_hc,
    estimate_max_cluster,
    estimate_pi,
    estimate_pi_curve,
    max_cluster_samples,
    radius_samples,
    y_samples,
)
from .sklearn_api import OneArmEstimator
from .steering import (
    SteeringHypothesisError,
    SteeringInstance,
    all_steps_proper,
    demo_instance,
    random_instance,
    steering_oracle,
    steering_simulate,
    sum_law,
    window_probability,
)

__all__ = [
    "CHECKPOINT_EVERY",
    "CSV_COLUMNS",
    "Estimate",
    "EventOResult",
    "ExperimentReport",
    "LengthResult",
    "OneArmEstimator",
    "SteeringHypothesisError",
    "SteeringInstance",
    "all_steps_proper",
    "boundary_touch_samples",
    "critical_pi",
    "demo_instance",
    "estimate_characteristic_length",
    "estimate_event_g",
    "estimate_event_o",
    "estimate_hc",
    "estimate_hc_sweep",
    "estimate_max_cluster",
    "estimate_pi",
    "estimate_pi_curve",
    "estimate_pi_sweep",
    "hc_thresholds",
    "interval_estimate",
    "max_cluster_samples",
    "pi_bounds_check",
    "pi_thresholds",
    "radius_samples",
    "random_instance",
    "ratio_bounds_hold",
    "reweight",
    "run_samples",
    "small_max_cluster_check",
    "steering_oracle",
    "steering_simulate",
    "sum_law",
    "theorem_one_experiment",
    "window_probability",
    "y_moment_check",
    "y_samples",
]
