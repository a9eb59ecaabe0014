#include "ood/simulation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ood/conformal.hpp"
#include "ood/error.hpp"
#include "ood/numerics.hpp"

namespace ood {

namespace {

constexpr long long kTrialsPerBlock = 4096;

// Fixed salts separating the independent stream families of the harness.
constexpr std::uint64_t kSaltT1 = 0x7431;
constexpr std::uint64_t kSaltT2 = 0x7432;
constexpr std::uint64_t kSaltCalibration = 0xCA11;
constexpr std::uint64_t kSaltTest = 0x7E57;

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

MonteCarloReport make_report(long long successes, long long n_trials) {
    MonteCarloReport report;
    report.n_trials = n_trials;
    report.estimate = static_cast<double>(successes) / static_cast<double>(n_trials);
    report.stderr_est =
        std::sqrt(report.estimate * (1.0 - report.estimate) / static_cast<double>(n_trials));
    return report;
}

// Runs fn(unit) for every unit in [0, n_units). Units are independent and
// claimed through an atomic counter, so the set of work done (and anything
// indexed by unit) is identical for every worker count.
template <typename Fn>
void parallel_units(long long n_units, int workers, const Fn& fn) {
    if (workers < 1) throw ConfigError("workers must be >= 1");
    const long long w = std::min<long long>(workers, n_units);
    if (w <= 1) {
        for (long long u = 0; u < n_units; ++u) fn(u);
        return;
    }
    std::atomic<long long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (long long t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const long long u = next.fetch_add(1, std::memory_order_relaxed);
                if (u >= n_units) break;
                fn(u);
            }
        });
    }
    for (auto& th : pool) th.join();
}

// Blocked Monte Carlo over n_trials of a boolean trial function. One RNG
// stream per fixed-size block keeps the merged count independent of the
// worker layout.
template <typename Trial>
long long count_trials(long long n_trials, std::uint64_t master, std::uint64_t salt,
                       int workers, const Trial& trial) {
    const long long n_blocks = (n_trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
    std::vector<long long> counts(static_cast<std::size_t>(n_blocks), 0);
    parallel_units(n_blocks, workers, [&](long long b) {
        std::mt19937_64 rng(derive_stream_seed(master, salt, static_cast<std::uint64_t>(b)));
        const long long lo = b * kTrialsPerBlock;
        const long long hi = std::min(n_trials, lo + kTrialsPerBlock);
        long long c = 0;
        for (long long i = lo; i < hi; ++i) {
            if (trial(rng)) ++c;
        }
        counts[static_cast<std::size_t>(b)] = c;
    });
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

// Draws one score vector according to the model. The correlated-normal
// transform is precomputed once.
class ScoreSampler {
public:
    explicit ScoreSampler(const SyntheticModel& model) : model_(model) {
        model.validate();
        if (model.kind == ModelKind::CorrelatedNormal) {
            const auto k = static_cast<Eigen::Index>(model.k);
            Eigen::MatrixXd cov(k, k);
            for (Eigen::Index i = 0; i < k; ++i) {
                for (Eigen::Index j = 0; j < k; ++j) {
                    cov(i, j) = model.covariance[static_cast<std::size_t>(i * k + j)];
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
            const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
            if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
                throw ConfigError("SyntheticModel: covariance is not positive semidefinite");
            }
            transform_ = eig.eigenvectors() *
                         eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        } else if (model.kind == ModelKind::Mixture) {
            double total = 0.0;
            for (const auto& c : model.components) total += c.weight;
            double acc = 0.0;
            for (const auto& c : model.components) {
                acc += c.weight / total;
                cumulative_weights_.push_back(acc);
            }
            cumulative_weights_.back() = 1.0;
        }
    }

    void sample(std::mt19937_64& rng, std::vector<double>& out) const {
        const int k = model_.k;
        out.resize(static_cast<std::size_t>(k));
        std::normal_distribution<double> z;
        switch (model_.kind) {
            case ModelKind::IidNormal:
                for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = z(rng);
                return;
            case ModelKind::CorrelatedNormal: {
                Eigen::VectorXd zs(k);
                for (int i = 0; i < k; ++i) zs[i] = z(rng);
                const Eigen::VectorXd x = transform_ * zs;
                for (int i = 0; i < k; ++i) {
                    out[static_cast<std::size_t>(i)] =
                        model_.mean[static_cast<std::size_t>(i)] + x[i];
                }
                return;
            }
            case ModelKind::Mixture: {
                std::uniform_real_distribution<double> u;
                const double pick = u(rng);
                std::size_t c = 0;
                while (c + 1 < cumulative_weights_.size() && pick > cumulative_weights_[c]) ++c;
                const auto& comp = model_.components[c];
                for (int i = 0; i < k; ++i) {
                    out[static_cast<std::size_t>(i)] =
                        comp.mean[static_cast<std::size_t>(i)] + comp.sigma * z(rng);
                }
                return;
            }
        }
    }

private:
    SyntheticModel model_;
    Eigen::MatrixXd transform_;
    std::vector<double> cumulative_weights_;
};

CalibrationSet draw_calibration(const ScoreSampler& sampler, int k, long long n_cal,
                                std::mt19937_64& rng) {
    std::vector<std::vector<double>> columns(static_cast<std::size_t>(k));
    for (auto& col : columns) col.resize(static_cast<std::size_t>(n_cal));
    std::vector<double> point;
    for (long long r = 0; r < n_cal; ++r) {
        sampler.sample(rng, point);
        for (int c = 0; c < k; ++c) {
            columns[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] =
                point[static_cast<std::size_t>(c)];
        }
    }
    std::vector<std::string> names(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) names[static_cast<std::size_t>(c)] = "s" + std::to_string(c + 1);
    return CalibrationSet(std::move(names), std::move(columns));
}

DetectionResult run_detector(const std::vector<double>& p_values, const DetectorConfig& cfg) {
    if (cfg.method == Method::Bonferroni) return bonferroni_detect(p_values, cfg);
    return bh_detect(p_values, cfg);
}

void check_sim_params(double alpha, long long n_trials) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (n_trials < 1000) throw ConfigError("n_trials must be >= 1000");
}

}  // namespace

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t salt,
                                 std::uint64_t index) {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ mix64(salt));
    h = mix64(h ^ mix64(index));
    return h;
}

SyntheticModel SyntheticModel::iid_normal(int k, std::uint64_t seed) {
    SyntheticModel m;
    m.kind = ModelKind::IidNormal;
    m.k = k;
    m.seed = seed;
    m.validate();
    return m;
}

SyntheticModel SyntheticModel::correlated_normal(std::vector<double> mean,
                                                 std::vector<double> covariance,
                                                 std::uint64_t seed) {
    SyntheticModel m;
    m.kind = ModelKind::CorrelatedNormal;
    m.k = static_cast<int>(mean.size());
    m.seed = seed;
    m.mean = std::move(mean);
    m.covariance = std::move(covariance);
    m.validate();
    return m;
}

SyntheticModel SyntheticModel::mixture(int k, std::vector<MixtureComponent> components,
                                       std::uint64_t seed) {
    SyntheticModel m;
    m.kind = ModelKind::Mixture;
    m.k = k;
    m.seed = seed;
    m.components = std::move(components);
    m.validate();
    return m;
}

void SyntheticModel::validate() const {
    if (k < 1) throw ConfigError("SyntheticModel: k must be >= 1");
    switch (kind) {
        case ModelKind::IidNormal:
            return;
        case ModelKind::CorrelatedNormal:
            if (mean.size() != static_cast<std::size_t>(k)) {
                throw ConfigError("SyntheticModel: mean must have k entries");
            }
            if (covariance.size() != static_cast<std::size_t>(k) * static_cast<std::size_t>(k)) {
                throw ConfigError("SyntheticModel: covariance must be k x k");
            }
            return;
        case ModelKind::Mixture:
            if (components.empty()) {
                throw ConfigError("SyntheticModel: mixture needs at least one component");
            }
            for (const auto& c : components) {
                if (!(c.weight > 0.0)) throw ConfigError("SyntheticModel: weights must be > 0");
                if (!(c.sigma > 0.0)) throw ConfigError("SyntheticModel: sigma must be > 0");
                if (c.mean.size() != static_cast<std::size_t>(k)) {
                    throw ConfigError("SyntheticModel: component mean must have k entries");
                }
            }
            return;
    }
    throw ConfigError("SyntheticModel: unknown kind");
}

MonteCarloReport simulate_test_t1(const std::array<double, 2>& mu, double alpha,
                                  long long n_trials, std::uint64_t seed, int workers) {
    check_sim_params(alpha, n_trials);
    const long long rejections =
        count_trials(n_trials, seed, kSaltT1, workers, [&](std::mt19937_64& rng) {
            std::normal_distribution<double> z;
            const double t = (mu[0] + z(rng)) + (mu[1] + z(rng));
            // Var(T1 + T2) = 2 under the null, hence the sqrt(2) standardization.
            return normal_sf(t * M_SQRT1_2) < alpha;
        });
    return make_report(rejections, n_trials);
}

MonteCarloReport simulate_test_t2(const std::array<double, 2>& mu, double alpha,
                                  long long n_trials, std::uint64_t seed, int workers) {
    check_sim_params(alpha, n_trials);
    const long long rejections =
        count_trials(n_trials, seed, kSaltT2, workers, [&](std::mt19937_64& rng) {
            std::normal_distribution<double> z;
            const double p1 = normal_sf(mu[0] + z(rng));
            const double p2 = normal_sf(mu[1] + z(rng));
            // m = max{i : Q^(i) <= i*alpha/2} >= 1, spelled out for K = 2.
            return std::min(p1, p2) <= 0.5 * alpha || std::max(p1, p2) <= alpha;
        });
    return make_report(rejections, n_trials);
}

double power_bound(const std::array<double, 2>& mu, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const double z = normal_sf_inv(0.5 * alpha);
    return std::max(normal_sf(z - mu[0]), normal_sf(z - mu[1]));
}

MonteCarloReport verify_conditional_false_alarm(const SyntheticModel& model,
                                                const DetectorConfig& cfg, long long n_cal,
                                                long long n_cal_draws, long long n_test_draws,
                                                std::uint64_t seed, int workers) {
    model.validate();
    cfg.validate();
    if (model.k != cfg.k) {
        throw ConfigError("verify_conditional_false_alarm: model.k != cfg.k");
    }
    if (cfg.method == Method::NaiveAverage) {
        throw ConfigError("verify_conditional_false_alarm: the naive rule has no conformal "
                          "p-values; use BH or Bonferroni");
    }
    if (n_cal < 1 || n_cal_draws < 1 || n_test_draws < 1) {
        throw ConfigError("verify_conditional_false_alarm: sizes must be >= 1");
    }

    const ScoreSampler sampler(model);
    std::vector<double> conditional_pf(static_cast<std::size_t>(n_cal_draws));

    parallel_units(n_cal_draws, workers, [&](long long draw) {
        std::mt19937_64 rng(derive_stream_seed(seed, model.seed ^ kSaltCalibration,
                                               static_cast<std::uint64_t>(draw)));
        const CalibrationSet cal = draw_calibration(sampler, cfg.k, n_cal, rng);
        std::vector<double> point;
        long long flagged = 0;
        for (long long t = 0; t < n_test_draws; ++t) {
            sampler.sample(rng, point);
            if (run_detector(cal.p_values(point), cfg).is_ood) ++flagged;
        }
        conditional_pf[static_cast<std::size_t>(draw)] =
            static_cast<double>(flagged) / static_cast<double>(n_test_draws);
    });

    long long within_bound = 0;
    for (double pf : conditional_pf) {
        if (pf <= cfg.alpha) ++within_bound;
    }
    MonteCarloReport report = make_report(within_bound, n_cal_draws);
    report.per_calibration_estimates = std::move(conditional_pf);
    return report;
}

MonteCarloReport estimate_power(const SyntheticModel& model_null,
                                const SyntheticModel& model_alt, const DetectorConfig& cfg,
                                long long n_cal, long long n_trials, std::uint64_t seed,
                                int workers) {
    model_null.validate();
    model_alt.validate();
    cfg.validate();
    if (model_null.k != cfg.k || model_alt.k != cfg.k) {
        throw ConfigError("estimate_power: model dimensions must equal cfg.k");
    }
    if (cfg.method == Method::NaiveAverage) {
        throw ConfigError("estimate_power: the naive rule has no conformal p-values; "
                          "use BH or Bonferroni");
    }
    if (n_cal < 1 || n_trials < 1) throw ConfigError("estimate_power: sizes must be >= 1");

    const ScoreSampler null_sampler(model_null);
    const ScoreSampler alt_sampler(model_alt);

    std::mt19937_64 cal_rng(derive_stream_seed(seed, model_null.seed ^ kSaltCalibration, 0));
    const CalibrationSet cal = draw_calibration(null_sampler, cfg.k, n_cal, cal_rng);

    const long long flagged = count_trials(
        n_trials, seed, model_alt.seed ^ kSaltTest, workers, [&](std::mt19937_64& rng) {
            thread_local std::vector<double> point;
            alt_sampler.sample(rng, point);
            return run_detector(cal.p_values(point), cfg).is_ood;
        });
    return make_report(flagged, n_trials);
}

}  // namespace ood
