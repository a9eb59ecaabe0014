// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Expected values come from independent oracles (quadrature,
// exhaustive enumeration, closed forms), never from the code paths they check.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ood/conformal.hpp"
#include "ood/error.hpp"
#include "ood/evaluation.hpp"
#include "ood/multiple_testing.hpp"
#include "ood/numerics.hpp"
#include "ood/scores.hpp"
#include "ood/simulation.hpp"
#include "support/ks.hpp"
#include "support/quadrature.hpp"

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run_criterion(int id, const std::string& name, const std::function<Outcome()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = fn();
    } catch (const std::exception& e) {
        outcome.pass = false;
        outcome.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s (%.1fs) %s\n", outcome.pass ? "PASS" : "FAIL", id,
                name.c_str(), secs, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
}

int worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(8u, std::max(1u, hw)));
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Conditional false-alarm guarantee at the solved calibration size.
Outcome criterion_theorem1() {
    ood::CalSizeRequest req;
    req.alpha = 0.1;
    req.epsilon = 1.0;
    req.delta = 0.1;
    req.k = 5;
    const long long n_cal = ood::required_cal_size(req);

    ood::DetectorConfig cfg;
    cfg.alpha = 0.1;
    cfg.epsilon = 1.0;
    cfg.delta = 0.1;
    cfg.k = 5;
    cfg.method = ood::Method::BH;

    const auto report = ood::verify_conditional_false_alarm(
        ood::SyntheticModel::iid_normal(5, 0), cfg, n_cal, 50, 20000, 20240701,
        worker_count());

    const double threshold = 0.90 - 3.0 * std::sqrt(0.9 * 0.1 / 50.0);
    Outcome o;
    o.pass = report.estimate >= threshold;
    o.detail = "n_cal=" + std::to_string(n_cal) + " fraction=" + fmt(report.estimate) +
               " >= " + fmt(threshold);
    return o;
}

// ---------------------------------------------------------------------------
// 2. Adversarial alternative: the sum test is blind, the step-up test is not.
Outcome criterion_adversarial() {
    const std::array<double, 2> mu{1.0, -1.0};
    const auto t1 = ood::simulate_test_t1(mu, 0.1, 100000, 20240702, worker_count());
    const double t1_cap = 0.1 + 3.0 * std::sqrt(0.1 * 0.9 / 100000.0);

    const auto t2 = ood::simulate_test_t2(mu, 0.1, 100000, 20240703, worker_count());
    const double bound = ood::power_bound(mu, 0.1);
    const double t2_floor = bound - 3.0 * std::sqrt(bound * (1.0 - bound) / 100000.0);

    Outcome o;
    o.pass = t1.estimate <= t1_cap && std::fabs(bound - 0.2595) <= 5e-4 &&
             t2.estimate >= t2_floor;
    o.detail = "t1=" + fmt(t1.estimate) + " <= " + fmt(t1_cap) + "; bound=" + fmt(bound) +
               "; t2=" + fmt(t2.estimate) + " >= " + fmt(t2_floor);
    return o;
}

// ---------------------------------------------------------------------------
// 3. Calibration-size solver vs the quadrature oracle over the grid.
bool oracle_feasible(long long n, const ood::CalSizeRequest& req) {
    const double c_k = ood::correction_constant(req.k, req.epsilon);
    const double requirement = 1.0 - req.delta / (static_cast<double>(req.k) * req.k);
    const double np1 = static_cast<double>(n + 1);
    for (int j = 1; j <= req.k; ++j) {
        const double level = req.alpha * j / (c_k * req.k);
        const auto a = static_cast<long long>(std::floor(np1 * level));
        if (a < 1) return false;
        const long long b = (n + 1) - a;
        const double x = std::min(1.0, (1.0 + req.epsilon) * static_cast<double>(a) / np1);
        if (oracle::beta_cdf(x, a, b, 1e-11) < requirement) return false;
    }
    return true;
}

Outcome criterion_solver_grid() {
    Outcome o;
    o.pass = true;
    for (double alpha : {0.05, 0.1}) {
        for (double delta : {0.05, 0.1, 0.2}) {
            const auto start = std::chrono::steady_clock::now();
            ood::CalSizeRequest req;
            req.alpha = alpha;
            req.epsilon = 1.0;
            req.delta = delta;
            req.k = 5;
            req.scan_limit = 200000;

            const long long n = ood::required_cal_size(req);
            bool cell_ok = oracle_feasible(n, req);
            for (long long smaller = 1; cell_ok && smaller < n; ++smaller) {
                if (oracle_feasible(smaller, req)) cell_ok = false;
            }
            const double secs = std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - start)
                                    .count();
            if (!cell_ok || secs >= 5.0) o.pass = false;
            o.detail += "(a=" + fmt(alpha) + ",d=" + fmt(delta) + ")->" +
                        std::to_string(n) + (cell_ok ? "" : "!") + " " + fmt(secs) + "s; ";
        }
    }
    return o;
}

// ---------------------------------------------------------------------------
// 4. Conditional exceedance probabilities follow Beta(a_j, b_j).
Outcome criterion_beta_law() {
    const long long n_cal = 500;
    const double alpha = 0.1;
    const double epsilon = 1.0;
    const int k = 5;
    const double c_k = ood::correction_constant(k, epsilon);

    std::mt19937_64 rng(20240704);
    std::normal_distribution<double> z;

    Outcome o;
    o.pass = true;
    for (int j : {1, k}) {
        const double alpha_j = alpha * j / (c_k * k);
        const auto a = static_cast<long long>(std::floor((n_cal + 1) * alpha_j));
        const long long b = (n_cal + 1) - a;
        if (a < 1) return {false, "degenerate shape at j=" + std::to_string(j)};

        std::vector<double> sample;
        sample.reserve(2000);
        std::vector<double> cal(n_cal);
        for (int d = 0; d < 2000; ++d) {
            for (auto& v : cal) v = z(rng);
            std::sort(cal.begin(), cal.end());
            sample.push_back(ood::normal_sf(cal[static_cast<std::size_t>(n_cal - a)]));
        }
        const ood::BetaParams params(a, b);
        const double d_stat = ks::statistic(sample, [&](double x) {
            return ood::reg_inc_beta(std::clamp(x, 0.0, 1.0), params);
        });
        const double p = ks::p_value(d_stat, sample.size());
        if (p < 0.01) o.pass = false;
        o.detail += "j=" + std::to_string(j) + ": KS p=" + fmt(p) + "; ";
    }
    return o;
}

// ---------------------------------------------------------------------------
// 5. Numerics against the quadrature oracle and inverse round-trips.
Outcome criterion_numerics() {
    std::mt19937_64 rng(20240705);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_int_distribution<long long> shape(1, 50);

    double worst_beta = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const long long a = shape(rng);
        const long long b = shape(rng);
        const double x = ux(rng);
        const double impl = ood::reg_inc_beta(x, ood::BetaParams(a, b));
        const double ref = oracle::beta_cdf(x, a, b, 1e-11);
        worst_beta = std::max(worst_beta, std::fabs(impl - ref));
    }

    std::uniform_real_distribution<double> uq(1e-6, 1.0 - 1e-6);
    double worst_rt = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double q = uq(rng);
        worst_rt = std::max(worst_rt,
                            std::fabs(ood::normal_sf(ood::normal_sf_inv(q)) - q));
    }

    Outcome o;
    o.pass = worst_beta <= 1e-8 && worst_rt <= 1e-8;
    o.detail = "max |I_x - oracle| = " + fmt(worst_beta) +
               ", max round-trip residual = " + fmt(worst_rt);
    return o;
}

// ---------------------------------------------------------------------------
// 6. Score hand values at tight tolerance and the Gram fitting-point law.
Outcome criterion_scores() {
    Outcome o;
    o.pass = true;

    // Mahalanobis: identity covariance, means (0,0) and (2,2), probe (1,1).
    {
        const double s = std::sqrt(2.0);
        std::vector<ood::FeatureBundle> train;
        for (double off : {0.0, 2.0}) {
            const int label = off == 0.0 ? 0 : 1;
            auto add = [&](double x, double y) {
                ood::FeatureBundle b;
                b.layers.push_back({2, 1, {x, y}});
                b.label = label;
                b.predicted_class = label;
                train.push_back(std::move(b));
            };
            add(off + s, off);
            add(off - s, off);
            add(off, off + s);
            add(off, off - s);
        }
        const auto stats = ood::fit_mahalanobis(train, 0.0);
        ood::FeatureBundle probe;
        probe.layers.push_back({2, 1, {1.0, 1.0}});
        probe.predicted_class = 0;
        const double val = ood::mahalanobis_score(stats, probe, 0);
        if (std::fabs(val - (-2.0)) > 1e-12) {
            o.pass = false;
            o.detail += "mahalanobis=" + fmt(val) + " != -2; ";
        }
    }

    // Gram: range [1, 2], probes below and above deviate by exactly 0.5.
    {
        auto scalar = [](double g, int label) {
            ood::FeatureBundle b;
            b.layers.push_back({1, 1, {g}});
            b.label = label;
            b.predicted_class = label;
            return b;
        };
        const std::vector<ood::FeatureBundle> train{scalar(1.0, 0),
                                                    scalar(std::sqrt(2.0), 0)};
        const auto stats = ood::fit_gram(train, 1, 0);
        const double below = ood::gram_deviation_score(stats, scalar(std::sqrt(0.5), 0), 0);
        const double above = ood::gram_deviation_score(stats, scalar(std::sqrt(3.0), 0), 0);
        if (std::fabs(below - 0.5) > 1e-12 || std::fabs(above - 0.5) > 1e-12) {
            o.pass = false;
            o.detail += "gram below=" + fmt(below) + " above=" + fmt(above) + "; ";
        }
    }

    // Gram deviations vanish on every point used to fit the ranges.
    {
        std::mt19937_64 rng(20240706);
        std::uniform_real_distribution<double> u(0.0, 2.0);
        std::vector<ood::FeatureBundle> train;
        for (int c = 0; c < 2; ++c) {
            for (int i = 0; i < 25; ++i) {
                ood::FeatureBundle b;
                b.layers.push_back({2, 2, {u(rng), u(rng), u(rng), u(rng)}});
                b.label = c;
                b.predicted_class = c;
                train.push_back(std::move(b));
            }
        }
        const std::uint64_t seed = 3;
        const auto stats = ood::fit_gram(train, 10, seed);
        std::vector<bool> held(train.size(), false);
        for (int c = 0; c < 2; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t s = 0; s < train.size(); ++s) {
                if (*train[s].label == c) members.push_back(s);
            }
            for (std::size_t pos : ood::gram_holdout_indices(members.size(), seed, c)) {
                held[members[pos]] = true;
            }
        }
        for (std::size_t s = 0; s < train.size(); ++s) {
            if (held[s]) continue;
            if (ood::gram_deviation_score(stats, train[s], 0) != 0.0) {
                o.pass = false;
                o.detail += "nonzero fitting-point deviation at sample " +
                            std::to_string(s) + "; ";
                break;
            }
        }
    }

    // Energy: two zero inputs at T = 1 give exactly -log 2.
    {
        const double e = ood::energy_score({0.0, 0.0}, {1.0});
        if (std::fabs(e + std::log(2.0)) > 1e-12) {
            o.pass = false;
            o.detail += "energy=" + fmt(e) + "; ";
        }
    }

    if (o.pass) o.detail = "all hand values exact to 1e-12";
    return o;
}

// ---------------------------------------------------------------------------
// 7. AUROC vs exhaustive pair enumeration; empirical FWER of BH.
double auroc_pairs(const std::vector<double>& in_s, const std::vector<double>& ood_s) {
    double u = 0.0;
    for (double ood_v : ood_s) {
        for (double in_v : in_s) {
            if (ood_v > in_v) {
                u += 1.0;
            } else if (ood_v == in_v) {
                u += 0.5;
            }
        }
    }
    return u / (static_cast<double>(in_s.size()) * static_cast<double>(ood_s.size()));
}

Outcome criterion_metrics() {
    Outcome o;
    o.pass = true;

    // Every binary-valued score set of size <= 6 per side (all tie patterns),
    // plus random real-valued sets on a tie-heavy grid.
    std::size_t checked = 0;
    for (std::size_t n_in = 1; n_in <= 6 && o.pass; ++n_in) {
        for (std::size_t n_ood = 1; n_ood <= 6 && o.pass; ++n_ood) {
            const std::size_t total = n_in + n_ood;
            for (std::size_t mask = 0; mask < (1u << total) && o.pass; ++mask) {
                std::vector<double> in_s, ood_s;
                for (std::size_t b = 0; b < n_in; ++b) {
                    in_s.push_back((mask >> b) & 1u ? 1.0 : 0.0);
                }
                for (std::size_t b = 0; b < n_ood; ++b) {
                    ood_s.push_back((mask >> (n_in + b)) & 1u ? 1.0 : 0.0);
                }
                if (ood::auroc(in_s, ood_s) != auroc_pairs(in_s, ood_s)) {
                    o.pass = false;
                    o.detail = "binary mismatch at n_in=" + std::to_string(n_in) +
                               " n_ood=" + std::to_string(n_ood);
                }
                ++checked;
            }
        }
    }
    std::mt19937_64 rng(20240707);
    std::uniform_int_distribution<int> size(1, 6);
    std::uniform_int_distribution<int> grid(0, 6);
    for (int trial = 0; trial < 20000 && o.pass; ++trial) {
        std::vector<double> in_s(static_cast<std::size_t>(size(rng)));
        std::vector<double> ood_s(static_cast<std::size_t>(size(rng)));
        for (auto& v : in_s) v = 0.25 * grid(rng);
        for (auto& v : ood_s) v = 0.25 * grid(rng);
        if (std::fabs(ood::auroc(in_s, ood_s) - auroc_pairs(in_s, ood_s)) > 1e-15) {
            o.pass = false;
            o.detail = "random-set mismatch";
        }
        ++checked;
    }

    // FWER of the step-up detector with exact uniform p-values.
    ood::DetectorConfig cfg;
    cfg.alpha = 0.1;
    cfg.epsilon = 0.0;
    cfg.k = 5;
    cfg.method = ood::Method::BH;
    std::uniform_real_distribution<double> u;
    const int trials = 100000;
    int rejections = 0;
    std::vector<double> p(5);
    for (int t = 0; t < trials; ++t) {
        for (auto& v : p) v = u(rng);
        if (ood::bh_detect(p, cfg).is_ood) ++rejections;
    }
    const double fwer = static_cast<double>(rejections) / trials;
    const double cap = 0.1 + 3.0 * std::sqrt(0.1 * 0.9 / trials);
    if (fwer > cap) {
        o.pass = false;
        o.detail += " fwer=" + fmt(fwer) + " > " + fmt(cap);
    }
    if (o.pass) {
        o.detail = std::to_string(checked) + " auroc sets exact; fwer=" + fmt(fwer) +
                   " <= " + fmt(cap);
    }
    return o;
}

// ---------------------------------------------------------------------------
// 8 & 9. Synthetic suite: three alternatives, each shifting a disjoint pair
// of the K = 6 scores. Shared across both criteria.
struct SuiteResult {
    std::array<double, 3> bh_power{};
    std::array<double, 3> bonferroni_power{};
    std::array<std::array<double, 3>, 6> single_power{};  // [score][alternative]
    double bh_stderr = 0.0;
    double bonferroni_stderr = 0.0;
};

SuiteResult run_suite() {
    constexpr int k = 6;
    constexpr long long n_cal = 2000;
    constexpr long long n_holdout = 10000;
    constexpr long long n_trials = 10000;
    constexpr double shift = 6.0;
    const std::array<std::array<int, 2>, 3> subsets{{{0, 1}, {2, 3}, {4, 5}}};

    std::mt19937_64 rng(20240708);
    std::normal_distribution<double> z;

    // Calibration draw from the null.
    std::vector<std::vector<double>> cal_cols(k, std::vector<double>(n_cal));
    for (long long r = 0; r < n_cal; ++r) {
        for (int c = 0; c < k; ++c) cal_cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)] = z(rng);
    }
    std::vector<std::string> names;
    for (int c = 0; c < k; ++c) names.push_back("s" + std::to_string(c + 1));
    const ood::CalibrationSet cal(names, cal_cols);

    // Null holdout for threshold calibration of the single-score tests.
    ood::ScoreMatrix holdout;
    holdout.names = names;
    holdout.rows = n_holdout;
    holdout.cols = k;
    holdout.data.resize(holdout.rows * holdout.cols);
    for (std::size_t r = 0; r < holdout.rows; ++r) {
        for (std::size_t c = 0; c < holdout.cols; ++c) holdout.at(r, c) = z(rng);
    }
    std::array<double, 6> taus{};
    for (int s = 0; s < k; ++s) {
        ood::ScoreMatrix column;
        column.names = {names[static_cast<std::size_t>(s)]};
        column.rows = holdout.rows;
        column.cols = 1;
        column.data = holdout.column(static_cast<std::size_t>(s));
        taus[static_cast<std::size_t>(s)] =
            ood::calibrate_naive_thresholds(column, 0.1)[0];
    }

    ood::DetectorConfig bh_cfg;
    bh_cfg.alpha = 0.1;
    bh_cfg.epsilon = 0.0;
    bh_cfg.k = k;
    bh_cfg.method = ood::Method::BH;
    ood::DetectorConfig bf_cfg = bh_cfg;
    bf_cfg.method = ood::Method::Bonferroni;

    SuiteResult res;
    std::vector<double> point(k);
    for (std::size_t alt = 0; alt < subsets.size(); ++alt) {
        long long bh_hits = 0, bf_hits = 0;
        std::array<long long, 6> single_hits{};
        for (long long t = 0; t < n_trials; ++t) {
            for (int c = 0; c < k; ++c) point[static_cast<std::size_t>(c)] = z(rng);
            for (int c : subsets[alt]) point[static_cast<std::size_t>(c)] += shift;

            const auto p = cal.p_values(point);
            if (ood::bh_detect(p, bh_cfg).is_ood) ++bh_hits;
            if (ood::bonferroni_detect(p, bf_cfg).is_ood) ++bf_hits;
            for (int s = 0; s < k; ++s) {
                if (point[static_cast<std::size_t>(s)] >= taus[static_cast<std::size_t>(s)]) {
                    ++single_hits[static_cast<std::size_t>(s)];
                }
            }
        }
        res.bh_power[alt] = static_cast<double>(bh_hits) / n_trials;
        res.bonferroni_power[alt] = static_cast<double>(bf_hits) / n_trials;
        for (int s = 0; s < k; ++s) {
            res.single_power[static_cast<std::size_t>(s)][alt] =
                static_cast<double>(single_hits[static_cast<std::size_t>(s)]) / n_trials;
        }
        const double bf_p = res.bonferroni_power[alt];
        res.bonferroni_stderr =
            std::max(res.bonferroni_stderr, std::sqrt(bf_p * (1.0 - bf_p) / n_trials));
    }
    return res;
}

Outcome criterion_combination_beats_singles(const SuiteResult& suite) {
    const double bh_min = *std::min_element(suite.bh_power.begin(), suite.bh_power.end());
    double best_single_min = 0.0;
    for (const auto& per_alt : suite.single_power) {
        best_single_min = std::max(best_single_min,
                                   *std::min_element(per_alt.begin(), per_alt.end()));
    }
    Outcome o;
    o.pass = bh_min >= best_single_min + 0.05;
    o.detail = "BH min power=" + fmt(bh_min) +
               ", best single-score min power=" + fmt(best_single_min) + ", margin=" +
               fmt(bh_min - best_single_min);
    return o;
}

Outcome criterion_bh_vs_bonferroni(const SuiteResult& suite) {
    Outcome o;
    o.pass = true;
    for (std::size_t alt = 0; alt < suite.bh_power.size(); ++alt) {
        const double slack = 2.0 * suite.bonferroni_stderr;
        if (suite.bh_power[alt] < suite.bonferroni_power[alt] - slack) o.pass = false;
        o.detail += "alt" + std::to_string(alt + 1) + ": bh=" + fmt(suite.bh_power[alt]) +
                    " bonf=" + fmt(suite.bonferroni_power[alt]) + "; ";
    }
    return o;
}

}  // namespace

int main() {
    std::printf("acceptance suite (%d workers available)\n", worker_count());

    run_criterion(1, "conditional false-alarm guarantee at solved n_cal",
                  criterion_theorem1);
    run_criterion(2, "adversarial alternative: sum test blind, step-up powered",
                  criterion_adversarial);
    run_criterion(3, "calibration-size solver matches the quadrature oracle",
                  criterion_solver_grid);
    run_criterion(4, "conditional exceedance probabilities follow the Beta law",
                  criterion_beta_law);
    run_criterion(5, "special functions vs quadrature oracle and round-trips",
                  criterion_numerics);
    run_criterion(6, "score hand values and Gram fitting-point law", criterion_scores);

    run_criterion(7, "auroc enumeration equivalence and BH FWER control",
                  criterion_metrics);

    SuiteResult suite;
    bool suite_ok = true;
    try {
        suite = run_suite();
    } catch (const std::exception& e) {
        suite_ok = false;
        const std::string msg = e.what();
        run_criterion(8, "combined detector beats single-score baselines",
                      [&]() -> Outcome { return {false, "suite failed: " + msg}; });
        run_criterion(9, "step-up power dominates the flat threshold",
                      [&]() -> Outcome { return {false, "suite failed: " + msg}; });
    }
    if (suite_ok) {
        run_criterion(8, "combined detector beats single-score baselines",
                      [&] { return criterion_combination_beats_singles(suite); });
        run_criterion(9, "step-up power dominates the flat threshold",
                      [&] { return criterion_bh_vs_bonferroni(suite); });
    }

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
