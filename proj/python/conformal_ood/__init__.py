"""Conformal multiple-testing OOD detection.

Combines K score functions through conformal p-values with step-up or
flat-threshold multiple testing, solves for the calibration-set size that
makes the conditional false-alarm guarantee hold, and ships a Monte Carlo
harness to verify the guarantee empirically.
"""

from conformal_ood._core import (
    CalibrationSet,
    CapacityError,
    ConfigError,
    DetectionResult,
    DetectorConfig,
    IoError,
    MixtureComponent,
    MonteCarloReport,
    SyntheticModel,
    auroc,
    bh_detect,
    bonferroni_detect,
    calibrate_naive_thresholds,
    conformal_p_value,
    correction_constant,
    empirical_fwer,
    energy_score,
    estimate_power,
    naive_average_detect,
    normal_sf,
    normal_sf_inv,
    oracle_p_value,
    power_at_false_alarm,
    power_bound,
    reg_inc_beta,
    required_cal_size,
    required_cal_size_bonferroni,
    simulate_test_t1,
    simulate_test_t2,
    verify_conditional_false_alarm,
)

__all__ = [
    "CalibrationSet",
    "CapacityError",
    "ConfigError",
    "DetectionResult",
    "DetectorConfig",
    "IoError",
    "MixtureComponent",
    "MonteCarloReport",
    "SyntheticModel",
    "auroc",
    "bh_detect",
    "bonferroni_detect",
    "calibrate_naive_thresholds",
    "conformal_p_value",
    "correction_constant",
    "empirical_fwer",
    "energy_score",
    "estimate_power",
    "naive_average_detect",
    "normal_sf",
    "normal_sf_inv",
    "oracle_p_value",
    "power_at_false_alarm",
    "power_bound",
    "reg_inc_beta",
    "required_cal_size",
    "required_cal_size_bonferroni",
    "simulate_test_t1",
    "simulate_test_t2",
    "verify_conditional_false_alarm",
]

__version__ = "0.1.0"
