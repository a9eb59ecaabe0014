#include "ood/multiple_testing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ood/error.hpp"
#include "ood/numerics.hpp"

namespace ood {

Method parse_method(const std::string& name) {
    if (name == "bh") return Method::BH;
    if (name == "bonferroni") return Method::Bonferroni;
    if (name == "naive") return Method::NaiveAverage;
    throw ConfigError("unknown method '" + name + "' (expected bh, bonferroni or naive)");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::BH: return "bh";
        case Method::Bonferroni: return "bonferroni";
        case Method::NaiveAverage: return "naive";
    }
    return "unknown";
}

void DetectorConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
    if (k < 1) throw ConfigError("k must be >= 1");
}

double correction_constant(int k, double epsilon) {
    if (k < 1) throw ConfigError("correction_constant: k must be >= 1");
    double harmonic = 0.0;
    for (int j = 1; j <= k; ++j) harmonic += 1.0 / j;
    return (1.0 + epsilon) * harmonic;
}

namespace {

void check_p_values(const std::vector<double>& p_values, const DetectorConfig& cfg) {
    cfg.validate();
    if (p_values.size() != static_cast<std::size_t>(cfg.k)) {
        throw ConfigError("detector: got " + std::to_string(p_values.size()) +
                          " p-values for k=" + std::to_string(cfg.k));
    }
    for (double p : p_values) {
        if (std::isnan(p) || p < 0.0 || p > 1.0) {
            throw ConfigError("detector: p-values must lie in [0, 1]");
        }
    }
}

// Indices that sort p ascending; ties keep original order.
std::vector<std::size_t> sort_permutation(const std::vector<double>& p) {
    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t l, std::size_t r) { return p[l] < p[r]; });
    return perm;
}

}  // namespace

DetectionResult bh_detect(const std::vector<double>& p_values, const DetectorConfig& cfg) {
    if (cfg.method != Method::BH) throw ConfigError("bh_detect: cfg.method must be BH");
    check_p_values(p_values, cfg);

    const std::size_t k = p_values.size();
    const double c_k = correction_constant(cfg.k, cfg.epsilon);

    DetectionResult res;
    res.p_values = p_values;
    res.thresholds.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        res.thresholds[i] = cfg.alpha * static_cast<double>(i + 1) / (c_k * cfg.k);
    }

    const auto perm = sort_permutation(p_values);
    res.sorted_p_values.resize(k);
    for (std::size_t i = 0; i < k; ++i) res.sorted_p_values[i] = p_values[perm[i]];

    // m = max{i : p_(i) <= alpha*i/(C(K)K)}, 0 when the set is empty.
    res.m = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (res.sorted_p_values[i] <= res.thresholds[i]) res.m = i + 1;
    }
    res.is_ood = res.m >= 1;
    res.rejected_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(res.m));
    std::sort(res.rejected_indices.begin(), res.rejected_indices.end());
    return res;
}

DetectionResult bonferroni_detect(const std::vector<double>& p_values,
                                  const DetectorConfig& cfg) {
    if (cfg.method != Method::Bonferroni) {
        throw ConfigError("bonferroni_detect: cfg.method must be Bonferroni");
    }
    check_p_values(p_values, cfg);

    const std::size_t k = p_values.size();
    const double threshold = cfg.alpha / ((1.0 + cfg.epsilon) * cfg.k);

    DetectionResult res;
    res.p_values = p_values;
    res.thresholds.assign(k, threshold);
    res.sorted_p_values = p_values;
    std::sort(res.sorted_p_values.begin(), res.sorted_p_values.end());
    for (std::size_t i = 0; i < k; ++i) {
        if (p_values[i] <= threshold) res.rejected_indices.push_back(i);
    }
    res.m = res.rejected_indices.size();
    res.is_ood = res.m >= 1;
    return res;
}

DetectionResult naive_average_detect(const std::vector<double>& scores,
                                     const std::vector<double>& taus) {
    if (scores.empty() || scores.size() != taus.size()) {
        throw ConfigError("naive_average_detect: scores and thresholds must have equal "
                          "nonzero length");
    }
    DetectionResult res;
    res.thresholds = taus;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] >= taus[i]) res.rejected_indices.push_back(i);
    }
    res.m = res.rejected_indices.size();
    // gamma = m/K; the boundary gamma = 1/2 counts as a rejection.
    res.is_ood = 2 * res.m >= scores.size();
    return res;
}

std::vector<double> calibrate_naive_thresholds(const ScoreMatrix& holdout,
                                               double target_pf) {
    if (!(target_pf > 0.0 && target_pf < 1.0)) {
        throw ConfigError("calibrate_naive_thresholds: target_pf must lie in (0, 1)");
    }
    if (holdout.rows < 100) {
        throw ConfigError("calibrate_naive_thresholds: need at least 100 holdout rows, got " +
                          std::to_string(holdout.rows));
    }
    if (holdout.cols == 0) {
        throw ConfigError("calibrate_naive_thresholds: holdout has no score columns");
    }
    const std::size_t n = holdout.rows;
    const std::size_t k = holdout.cols;
    if (target_pf * static_cast<double>(n) < 1.0) {
        throw CapacityError("calibrate_naive_thresholds: target_pf=" +
                                std::to_string(target_pf) + " below the resolution 1/" +
                                std::to_string(n) + " of the holdout grid",
                            /*best_margin=*/-target_pf, static_cast<long long>(n));
    }

    std::vector<std::vector<double>> sorted(k);
    for (std::size_t c = 0; c < k; ++c) {
        sorted[c] = holdout.column(c);
        std::sort(sorted[c].begin(), sorted[c].end());
    }

    // The shared quantile level is parameterized by the order-statistic index
    // level: tau_i = sorted_i[level-1], with level = n+1 meaning "just above
    // the column maximum". Raising the level can only switch exceedances off,
    // so the holdout false-alarm rate is nonincreasing in it.
    auto taus_at = [&](std::size_t level) {
        std::vector<double> taus(k);
        for (std::size_t c = 0; c < k; ++c) {
            taus[c] = level <= n
                          ? sorted[c][level - 1]
                          : std::nextafter(sorted[c][n - 1],
                                           std::numeric_limits<double>::infinity());
        }
        return taus;
    };
    auto pf_at = [&](std::size_t level) {
        const auto taus = taus_at(level);
        std::size_t flagged = 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (naive_average_detect(holdout.row(r), taus).is_ood) ++flagged;
        }
        return static_cast<double>(flagged) / static_cast<double>(n);
    };

    // Bisection over the grid for the smallest level with P_F <= target,
    // i.e. the largest false-alarm rate not exceeding the target.
    std::size_t lo = 1, hi = n + 1;
    if (pf_at(lo) <= target_pf) {
        hi = lo;
    } else {
        while (hi - lo > 1) {
            const std::size_t mid = lo + (hi - lo) / 2;
            if (pf_at(mid) <= target_pf) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    return taus_at(hi);
}

void CalSizeRequest::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (scan_limit < 1) throw ConfigError("scan_limit must be >= 1");
}

namespace {

CalSizeCheck check_terms(long long n_cal, const CalSizeRequest& req,
                         const std::vector<double>& levels, double requirement) {
    CalSizeCheck check;
    check.requirement = requirement;
    check.min_value = 1.0;
    check.feasible = true;
    const double np1 = static_cast<double>(n_cal + 1);

    for (std::size_t idx = 0; idx < levels.size(); ++idx) {
        CalSizeTerm term;
        term.j = static_cast<int>(idx + 1);
        term.a = static_cast<long long>(std::floor(np1 * levels[idx]));
        term.b = (n_cal + 1) - term.a;
        if (term.a < 1) {
            // Degenerate Beta shape: the condition cannot hold at this n_cal.
            term.value = 0.0;
            check.feasible = false;
            check.min_value = 0.0;
            check.terms.push_back(term);
            continue;
        }
        const double mu = static_cast<double>(term.a) / np1;
        term.x = std::min(1.0, (1.0 + req.epsilon) * mu);
        term.value = reg_inc_beta(term.x, BetaParams(term.a, term.b));
        check.min_value = std::min(check.min_value, term.value);
        if (term.value < requirement) check.feasible = false;
        check.terms.push_back(term);
    }
    return check;
}

long long scan_cal_size(const CalSizeRequest& req,
                        CalSizeCheck (*check_fn)(long long, const CalSizeRequest&),
                        const char* label) {
    req.validate();
    double best_margin = -std::numeric_limits<double>::infinity();
    long long best_n = 0;
    for (long long n = 1; n <= req.scan_limit; ++n) {
        const CalSizeCheck check = check_fn(n, req);
        if (check.feasible) return n;
        if (check.margin() > best_margin) {
            best_margin = check.margin();
            best_n = n;
        }
    }
    throw CapacityError(std::string(label) + ": no n_cal <= " +
                            std::to_string(req.scan_limit) +
                            " satisfies the condition (best margin " +
                            std::to_string(best_margin) + " at n_cal=" +
                            std::to_string(best_n) + ")",
                        best_margin, best_n);
}

}  // namespace

CalSizeCheck check_cal_size(long long n_cal, const CalSizeRequest& req) {
    req.validate();
    if (n_cal < 1) throw ConfigError("check_cal_size: n_cal must be >= 1");
    const double c_k = correction_constant(req.k, req.epsilon);
    std::vector<double> levels(static_cast<std::size_t>(req.k));
    for (int j = 1; j <= req.k; ++j) {
        levels[static_cast<std::size_t>(j - 1)] = req.alpha * j / (c_k * req.k);
    }
    const double requirement = 1.0 - req.delta / (static_cast<double>(req.k) * req.k);
    return check_terms(n_cal, req, levels, requirement);
}

CalSizeCheck check_cal_size_bonferroni(long long n_cal, const CalSizeRequest& req) {
    req.validate();
    if (n_cal < 1) throw ConfigError("check_cal_size_bonferroni: n_cal must be >= 1");
    const std::vector<double> levels = {req.alpha / ((1.0 + req.epsilon) * req.k)};
    const double requirement = 1.0 - req.delta / req.k;
    return check_terms(n_cal, req, levels, requirement);
}

long long required_cal_size(const CalSizeRequest& req) {
    return scan_cal_size(req, &check_cal_size, "required_cal_size");
}

long long required_cal_size_bonferroni(const CalSizeRequest& req) {
    return scan_cal_size(req, &check_cal_size_bonferroni, "required_cal_size_bonferroni");
}

}  // namespace ood
