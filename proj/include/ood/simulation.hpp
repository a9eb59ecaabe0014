#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ood/multiple_testing.hpp"

namespace ood {

enum class ModelKind { IidNormal, CorrelatedNormal, Mixture };

struct MixtureComponent {
    double weight = 1.0;
    std::vector<double> mean;
    double sigma = 1.0;  // isotropic per-component scale
};

// Synthetic score-vector distribution. The seed is a salt mixed into every
// RNG stream derived for this model, so two models differing only by seed
// produce independent draws under the same harness seed.
struct SyntheticModel {
    ModelKind kind = ModelKind::IidNormal;
    int k = 1;
    std::uint64_t seed = 0;
    std::vector<double> mean;                    // CorrelatedNormal
    std::vector<double> covariance;              // k x k row-major, PSD
    std::vector<MixtureComponent> components;    // Mixture

    static SyntheticModel iid_normal(int k, std::uint64_t seed = 0);
    static SyntheticModel correlated_normal(std::vector<double> mean,
                                            std::vector<double> covariance,
                                            std::uint64_t seed = 0);
    static SyntheticModel mixture(int k, std::vector<MixtureComponent> components,
                                  std::uint64_t seed = 0);

    void validate() const;
};

struct MonteCarloReport {
    double estimate = 0.0;
    double stderr_est = 0.0;  // sqrt(est * (1 - est) / n_trials)
    long long n_trials = 0;
    std::optional<std::vector<double>> per_calibration_estimates;
};

// Deterministic stream derivation: splitmix64 over (master, salt, index).
// Trials are processed in fixed-size blocks, one derived stream per block,
// so results are identical for every worker count.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t salt,
                                 std::uint64_t index);

// Sum-statistic test: T = T1 + T2 standardized by sqrt(2), exact p-value via
// the normal survival function, reject when p < alpha. Scores drawn from
// N(mu, I).
MonteCarloReport simulate_test_t1(const std::array<double, 2>& mu, double alpha,
                                  long long n_trials, std::uint64_t seed,
                                  int workers = 1);

// Per-coordinate exact p-values combined by the step-up rule with thresholds
// i*alpha/2 (no dependence correction), reject when m >= 1.
MonteCarloReport simulate_test_t2(const std::array<double, 2>& mu, double alpha,
                                  long long n_trials, std::uint64_t seed,
                                  int workers = 1);

// Analytic lower bound on the power of the step-up test under N(mu, I):
// max_i Psi(Psi^{-1}(alpha/2) - mu_i).
double power_bound(const std::array<double, 2>& mu, double alpha);

// Draws n_cal_draws calibration sets from the null model; for each one,
// estimates the conditional false-alarm rate over n_test_draws fresh null
// test points run through the configured detector on conformal p-values.
// estimate = fraction of calibration draws with conditional P_F <= alpha;
// the per-draw rates are returned in per_calibration_estimates.
MonteCarloReport verify_conditional_false_alarm(const SyntheticModel& model,
                                                const DetectorConfig& cfg,
                                                long long n_cal,
                                                long long n_cal_draws,
                                                long long n_test_draws,
                                                std::uint64_t seed,
                                                int workers = 1);

// P(declare OOD | alt): one calibration set drawn from the null model, then
// n_trials test points from the alternative model.
MonteCarloReport estimate_power(const SyntheticModel& model_null,
                                const SyntheticModel& model_alt,
                                const DetectorConfig& cfg, long long n_cal,
                                long long n_trials, std::uint64_t seed,
                                int workers = 1);

}  // namespace ood
