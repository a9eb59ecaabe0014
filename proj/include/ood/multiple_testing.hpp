#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ood/score_matrix.hpp"

namespace ood {

enum class Method { BH, Bonferroni, NaiveAverage };

Method parse_method(const std::string& name);  // "bh" | "bonferroni" | "naive"
std::string method_name(Method m);

// Parameters of the combined detector. alpha is the target conditional
// false-alarm level, delta the allowed probability of the guarantee failing,
// epsilon the calibration-size slack factor, k the number of scores.
struct DetectorConfig {
    double alpha = 0.1;
    double epsilon = 1.0;
    double delta = 0.1;
    int k = 1;
    Method method = Method::BH;

    void validate() const;  // throws ConfigError
};

// Outcome of one detector evaluation. For BH, rejected_indices are the
// original indices of the m smallest p-values (ties broken by original
// index) and is_ood <=> m >= 1. For the naive rule, p_values stay empty,
// m counts threshold exceedances and is_ood is the majority vote.
struct DetectionResult {
    bool is_ood = false;
    std::vector<double> p_values;
    std::vector<double> sorted_p_values;
    std::size_t m = 0;
    std::vector<std::size_t> rejected_indices;  // ascending
    std::vector<double> thresholds;
};

// C(K) = (1 + epsilon) * sum_{j=1..K} 1/j.
double correction_constant(int k, double epsilon);

// Step-up test: m = max{i : p_(i) <= alpha*i / (C(K)*K)}, OOD iff m >= 1.
DetectionResult bh_detect(const std::vector<double>& p_values, const DetectorConfig& cfg);

// Flat threshold test: m = #{i : p_i <= alpha / ((1+epsilon)*K)}.
DetectionResult bonferroni_detect(const std::vector<double>& p_values, const DetectorConfig& cfg);

// Majority vote over per-score threshold exceedances: OOD iff at least half
// of the scores meet or exceed their thresholds.
DetectionResult naive_average_detect(const std::vector<double>& scores,
                                     const std::vector<double>& taus);

// Per-score thresholds for the naive rule, all placed at one shared empirical
// quantile level. The level is found by bisection over the order-statistic
// grid so the holdout false-alarm rate is the largest value <= target_pf.
// Requires at least 100 holdout rows and target_pf resolvable at the grid
// resolution 1/rows; throws CapacityError otherwise.
std::vector<double> calibrate_naive_thresholds(const ScoreMatrix& holdout, double target_pf);

struct CalSizeRequest {
    double alpha = 0.1;
    double epsilon = 1.0;
    double delta = 0.1;
    int k = 1;
    long long scan_limit = 200000;

    void validate() const;
};

// One row of the calibration-size feasibility check.
struct CalSizeTerm {
    int j = 0;
    long long a = 0;
    long long b = 0;
    double x = 0.0;      // (1+epsilon) * a / (n_cal + 1), clamped to [0, 1]
    double value = 0.0;  // I_x(a, b); 0 when a = 0 (degenerate shape)
};

struct CalSizeCheck {
    bool feasible = false;
    double requirement = 0.0;  // 1 - delta/K^2 (or 1 - delta/K for Bonferroni)
    double min_value = 0.0;
    std::vector<CalSizeTerm> terms;

    double margin() const { return min_value - requirement; }
};

// Evaluates the feasibility condition at a given n_cal without scanning.
CalSizeCheck check_cal_size(long long n_cal, const CalSizeRequest& req);
CalSizeCheck check_cal_size_bonferroni(long long n_cal, const CalSizeRequest& req);

// Smallest n_cal in [1, scan_limit] passing the corresponding check. Scans
// upward (the floor in a_j makes feasibility non-monotone at small n).
// Throws CapacityError with the best margin found when the scan is exhausted.
long long required_cal_size(const CalSizeRequest& req);
long long required_cal_size_bonferroni(const CalSizeRequest& req);

}  // namespace ood
