// conformal-ood: combine per-sample scores with conformal p-values and
// multiple-testing detectors, solve for calibration-set sizes, and verify the
// false-alarm guarantees by simulation.

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ood/conformal.hpp"
#include "ood/error.hpp"
#include "ood/evaluation.hpp"
#include "ood/io.hpp"
#include "ood/multiple_testing.hpp"
#include "ood/scores.hpp"
#include "ood/simulation.hpp"

namespace {

using Json = nlohmann::ordered_json;

void write_json(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ood::IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw ood::IoError("write failed for " + path);
}

Json report_json(const ood::MonteCarloReport& r) {
    Json j;
    j["estimate"] = r.estimate;
    j["stderr"] = r.stderr_est;
    j["n_trials"] = r.n_trials;
    if (r.per_calibration_estimates) {
        j["per_calibration_estimates"] = *r.per_calibration_estimates;
    }
    return j;
}

// Options set in a config file apply only where the command line stayed silent.
template <typename T, typename U>
void fallback(const CLI::Option* opt, const std::optional<U>& from_config, T& target) {
    if (opt != nullptr && opt->count() == 0 && from_config) {
        target = static_cast<T>(*from_config);
    }
}

void require_path(const std::string& value, const char* flag, const char* config_key) {
    if (value.empty()) {
        throw ood::ConfigError(std::string(flag) + " is required (flag or config paths." +
                               config_key + ")");
    }
}

struct CalibrateSizeCmd {
    double alpha = 0.1;
    double epsilon = 1.0;
    double delta = 0.1;
    int k = 1;
    std::string method = "bh";
    long long scan_limit = 200000;
    std::string config_path;
    std::string out_path;

    CLI::Option* alpha_opt = nullptr;
    CLI::Option* epsilon_opt = nullptr;
    CLI::Option* delta_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* method_opt = nullptr;
    CLI::Option* scan_opt = nullptr;

    void apply_config() {
        if (config_path.empty()) return;
        const auto cfg = ood::load_run_config(config_path);
        fallback(alpha_opt, cfg.alpha, alpha);
        fallback(epsilon_opt, cfg.epsilon, epsilon);
        fallback(delta_opt, cfg.delta, delta);
        fallback(k_opt, cfg.k, k);
        fallback(method_opt, cfg.method, method);
        fallback(scan_opt, cfg.scan_limit, scan_limit);
    }

    int run() {
        apply_config();
        const ood::Method m = ood::parse_method(method);
        if (m == ood::Method::NaiveAverage) {
            throw ood::ConfigError("calibrate-size supports bh and bonferroni only");
        }
        ood::CalSizeRequest req;
        req.alpha = alpha;
        req.epsilon = epsilon;
        req.delta = delta;
        req.k = k;
        req.scan_limit = scan_limit;

        const bool bonferroni = m == ood::Method::Bonferroni;
        const long long n = bonferroni ? ood::required_cal_size_bonferroni(req)
                                       : ood::required_cal_size(req);
        const auto check = bonferroni ? ood::check_cal_size_bonferroni(n, req)
                                      : ood::check_cal_size(n, req);

        std::printf("n_cal = %lld  (method=%s alpha=%g epsilon=%g delta=%g k=%d)\n", n,
                    method.c_str(), alpha, epsilon, delta, k);
        std::printf("requirement: I >= %.10f\n", check.requirement);
        std::printf("%4s %8s %10s %12s %14s %14s\n", "j", "a_j", "b_j", "x_j", "I_x(a,b)",
                    "margin");
        for (const auto& t : check.terms) {
            std::printf("%4d %8lld %10lld %12.8f %14.10f %14.3e\n", t.j, t.a, t.b, t.x,
                        t.value, t.value - check.requirement);
        }

        if (!out_path.empty()) {
            Json j;
            j["n_cal"] = n;
            j["method"] = method;
            j["alpha"] = alpha;
            j["epsilon"] = epsilon;
            j["delta"] = delta;
            j["k"] = k;
            j["requirement"] = check.requirement;
            Json terms = Json::array();
            for (const auto& t : check.terms) {
                terms.push_back({{"j", t.j}, {"a", t.a}, {"b", t.b}, {"x", t.x},
                                 {"value", t.value}});
            }
            j["terms"] = std::move(terms);
            write_json(j, out_path);
        }
        return 0;
    }
};

struct FitScoresCmd {
    std::string train_path;
    std::string out_path;
    std::string config_path;
    double ridge = -1.0;  // negative = scale-aware default
    int powers = 10;
    std::uint64_t seed = 0;
    bool skip_mahalanobis = false;
    bool skip_gram = false;

    CLI::Option* ridge_opt = nullptr;
    CLI::Option* powers_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* train_opt = nullptr;
    CLI::Option* out_opt = nullptr;

    int run() {
        if (!config_path.empty()) {
            const auto cfg = ood::load_run_config(config_path);
            fallback(ridge_opt, cfg.ridge, ridge);
            fallback(powers_opt, cfg.powers, powers);
            fallback(seed_opt, cfg.seed, seed);
            fallback(train_opt, cfg.path("train"), train_path);
            fallback(out_opt, cfg.path("out"), out_path);
        }
        require_path(train_path, "--train", "train");
        require_path(out_path, "--out", "out");
        if (skip_mahalanobis && skip_gram) {
            throw ood::ConfigError("fit-scores: at least one score family must be fitted");
        }
        const auto train = ood::read_feature_bundles(train_path);

        ood::ClassStats stats;
        if (!skip_mahalanobis) {
            std::optional<double> r;
            if (ridge >= 0.0) r = ridge;
            stats = ood::fit_mahalanobis(train, r);
        }
        if (!skip_gram) {
            ood::fit_gram(stats, train, powers, seed);
        }
        ood::save_class_stats(stats, out_path);
        std::printf("fitted %zu layer(s), %zu class(es) from %zu samples -> %s\n",
                    stats.n_layers(), stats.class_ids.size(), train.size(),
                    out_path.c_str());
        return 0;
    }
};

struct ScoreCmd {
    std::string stats_path;
    std::string features_path;
    std::string out_path;
    std::string config_path;
    double temperature = 100.0;

    CLI::Option* temperature_opt = nullptr;
    CLI::Option* stats_opt = nullptr;
    CLI::Option* features_opt = nullptr;
    CLI::Option* out_opt = nullptr;

    int run() {
        if (!config_path.empty()) {
            const auto cfg = ood::load_run_config(config_path);
            fallback(temperature_opt, cfg.temperature, temperature);
            fallback(stats_opt, cfg.path("stats"), stats_path);
            fallback(features_opt, cfg.path("features"), features_path);
            fallback(out_opt, cfg.path("out"), out_path);
        }
        require_path(stats_path, "--stats", "stats");
        require_path(features_path, "--features", "features");
        require_path(out_path, "--out", "out");
        const auto stats = ood::load_class_stats(stats_path);
        const auto bundles = ood::read_feature_bundles(features_path);
        for (const auto& b : bundles) ood::validate_compatible(stats, b);
        const auto matrix = ood::build_score_matrix(stats, bundles, {temperature});
        ood::write_score_matrix(matrix, out_path);
        std::printf("scored %zu samples x %zu columns -> %s\n", matrix.rows, matrix.cols,
                    out_path.c_str());
        return 0;
    }
};

struct DetectCmd {
    std::string cal_path;
    std::string test_path;
    std::string out_path;
    std::string config_path;
    double alpha = 0.1;
    double epsilon = 1.0;
    std::string method = "bh";

    CLI::Option* alpha_opt = nullptr;
    CLI::Option* epsilon_opt = nullptr;
    CLI::Option* method_opt = nullptr;
    CLI::Option* cal_opt = nullptr;
    CLI::Option* test_opt = nullptr;
    CLI::Option* out_opt = nullptr;

    int run() {
        if (!config_path.empty()) {
            const auto cfg = ood::load_run_config(config_path);
            fallback(alpha_opt, cfg.alpha, alpha);
            fallback(epsilon_opt, cfg.epsilon, epsilon);
            fallback(method_opt, cfg.method, method);
            fallback(cal_opt, cfg.path("cal"), cal_path);
            fallback(test_opt, cfg.path("test"), test_path);
            fallback(out_opt, cfg.path("out"), out_path);
        }
        require_path(cal_path, "--cal", "cal");
        require_path(test_path, "--test", "test");
        require_path(out_path, "--out", "out");
        const auto cal = ood::read_score_matrix(cal_path);
        const auto test = ood::read_score_matrix(test_path);
        if (cal.names != test.names) {
            std::string diff = "detect: calibration and test columns differ:\n";
            const std::size_t n = std::max(cal.names.size(), test.names.size());
            for (std::size_t i = 0; i < n; ++i) {
                const std::string c = i < cal.names.size() ? cal.names[i] : "<none>";
                const std::string t = i < test.names.size() ? test.names[i] : "<none>";
                if (c != t) {
                    diff += "  column " + std::to_string(i + 1) + ": cal='" + c +
                            "' test='" + t + "'\n";
                }
            }
            throw ood::ConfigError(diff);
        }

        ood::DetectorConfig cfg;
        cfg.alpha = alpha;
        cfg.epsilon = epsilon;
        cfg.k = static_cast<int>(cal.cols);
        cfg.method = ood::parse_method(method);

        ood::ResultSet set;
        set.method = method;
        set.alpha = alpha;
        set.epsilon = epsilon;
        set.k = cfg.k;
        set.n_cal = static_cast<long long>(cal.rows);
        set.score_names = test.names;
        set.sample_ids = test.ids;

        if (cfg.method == ood::Method::NaiveAverage) {
            // Thresholds calibrated on the calibration matrix at the target
            // false-alarm level alpha.
            const auto taus = ood::calibrate_naive_thresholds(cal, alpha);
            for (std::size_t r = 0; r < test.rows; ++r) {
                set.results.push_back(ood::naive_average_detect(test.row(r), taus));
            }
        } else {
            const auto cal_set = ood::CalibrationSet::from_matrix(cal);
            for (std::size_t r = 0; r < test.rows; ++r) {
                const auto p = cal_set.p_values(test.row(r));
                set.results.push_back(cfg.method == ood::Method::Bonferroni
                                          ? ood::bonferroni_detect(p, cfg)
                                          : ood::bh_detect(p, cfg));
            }
        }

        std::size_t flagged = 0;
        for (const auto& r : set.results) flagged += r.is_ood ? 1 : 0;
        std::printf("%zu/%zu test samples declared OOD (method=%s alpha=%g)\n", flagged,
                    set.results.size(), method.c_str(), alpha);
        ood::write_results(set, out_path);
        return 0;
    }
};

struct EvaluateCmd {
    std::string in_results;
    std::string ood_results;
    std::string in_scores;
    std::string ood_scores;
    std::string column;
    std::string out_path;
    double target_pf = 0.1;

    int run() {
        const bool decisions_mode = !in_results.empty() || !ood_results.empty();
        const bool scores_mode = !in_scores.empty() || !ood_scores.empty();
        if (decisions_mode == scores_mode) {
            throw ood::ConfigError(
                "evaluate: pass either --in/--ood results or --in-scores/--ood-scores");
        }

        Json j;
        if (decisions_mode) {
            if (in_results.empty() || ood_results.empty()) {
                throw ood::ConfigError("evaluate: both --in and --ood are required");
            }
            const auto in_set = ood::read_results(in_results);
            const auto ood_set = ood::read_results(ood_results);
            std::vector<std::uint8_t> in_dec, ood_dec;
            for (const auto& r : in_set.results) in_dec.push_back(r.is_ood ? 1 : 0);
            for (const auto& r : ood_set.results) ood_dec.push_back(r.is_ood ? 1 : 0);
            const auto res = ood::power_at_false_alarm(in_dec, ood_dec, target_pf);
            std::printf("P_D = %.4f at achieved P_F = %.4f (target %.4f)\n", res.pd,
                        res.achieved_pf, target_pf);
            j["pd"] = res.pd;
            j["achieved_pf"] = res.achieved_pf;
            j["target_pf"] = target_pf;
            j["n_in"] = in_set.results.size();
            j["n_ood"] = ood_set.results.size();
        } else {
            if (in_scores.empty() || ood_scores.empty()) {
                throw ood::ConfigError(
                    "evaluate: both --in-scores and --ood-scores are required");
            }
            const auto in_m = ood::read_score_matrix(in_scores);
            const auto ood_m = ood::read_score_matrix(ood_scores);
            if (in_m.names != ood_m.names) {
                throw ood::ConfigError("evaluate: score files have different columns");
            }
            Json by_column;
            for (std::size_t c = 0; c < in_m.cols; ++c) {
                if (!column.empty() && in_m.names[c] != column) continue;
                const double a = ood::auroc(in_m.column(c), ood_m.column(c));
                std::printf("auroc[%s] = %.6f\n", in_m.names[c].c_str(), a);
                by_column[in_m.names[c]] = a;
            }
            if (by_column.empty()) {
                throw ood::ConfigError("evaluate: column '" + column + "' not found");
            }
            j["auroc"] = std::move(by_column);
        }
        if (!out_path.empty()) write_json(j, out_path);
        return 0;
    }
};

struct SimulateCmd {
    std::string scenario;
    std::string config_path;
    std::string out_path;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double alpha = 0.1;
    double epsilon = 1.0;
    double delta = 0.1;
    int k = 5;
    long long n_cal = 0;  // 0 = solve via the calibration-size condition
    long long cal_draws = 50;
    long long test_draws = 20000;
    long long trials = 100000;
    std::vector<double> shift;
    std::string method = "bh";
    std::uint64_t seed = 0;
    int workers = 1;

    CLI::Option* alpha_opt = nullptr;
    CLI::Option* epsilon_opt = nullptr;
    CLI::Option* delta_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* method_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;

    int run() {
        if (!config_path.empty()) {
            const auto cfg = ood::load_run_config(config_path);
            fallback(alpha_opt, cfg.alpha, alpha);
            fallback(epsilon_opt, cfg.epsilon, epsilon);
            fallback(delta_opt, cfg.delta, delta);
            fallback(k_opt, cfg.k, k);
            fallback(method_opt, cfg.method, method);
            fallback(seed_opt, cfg.seed, seed);
            fallback(workers_opt, cfg.workers, workers);
        }

        ood::MonteCarloReport report;
        if (scenario == "t1" || scenario == "t2") {
            const std::array<double, 2> mu{mu1, mu2};
            report = scenario == "t1"
                         ? ood::simulate_test_t1(mu, alpha, trials, seed, workers)
                         : ood::simulate_test_t2(mu, alpha, trials, seed, workers);
        } else if (scenario == "theorem1") {
            ood::DetectorConfig cfg;
            cfg.alpha = alpha;
            cfg.epsilon = epsilon;
            cfg.delta = delta;
            cfg.k = k;
            cfg.method = ood::parse_method(method);
            long long n = n_cal;
            if (n == 0) {
                ood::CalSizeRequest req;
                req.alpha = alpha;
                req.epsilon = epsilon;
                req.delta = delta;
                req.k = k;
                n = cfg.method == ood::Method::Bonferroni
                        ? ood::required_cal_size_bonferroni(req)
                        : ood::required_cal_size(req);
                std::printf("solved n_cal = %lld\n", n);
            }
            report = ood::verify_conditional_false_alarm(
                ood::SyntheticModel::iid_normal(k, 0), cfg, n, cal_draws, test_draws, seed,
                workers);
        } else if (scenario == "power") {
            if (n_cal <= 0) throw ood::ConfigError("simulate power: --n-cal is required");
            ood::DetectorConfig cfg;
            cfg.alpha = alpha;
            cfg.epsilon = epsilon;
            cfg.delta = delta;
            cfg.k = k;
            cfg.method = ood::parse_method(method);
            std::vector<double> mean = shift;
            if (mean.empty()) throw ood::ConfigError("simulate power: --shift is required");
            if (mean.size() == 1) mean.assign(static_cast<std::size_t>(k), shift[0]);
            if (mean.size() != static_cast<std::size_t>(k)) {
                throw ood::ConfigError("simulate power: --shift needs 1 or k values");
            }
            std::vector<double> cov(static_cast<std::size_t>(k) * k, 0.0);
            for (int i = 0; i < k; ++i) cov[static_cast<std::size_t>(i) * k + i] = 1.0;
            report = ood::estimate_power(ood::SyntheticModel::iid_normal(k, 0),
                                         ood::SyntheticModel::correlated_normal(mean, cov, 1),
                                         cfg, n_cal, trials, seed, workers);
        } else {
            throw ood::ConfigError("unknown scenario '" + scenario +
                                   "' (expected t1, t2, theorem1 or power)");
        }

        std::printf("scenario=%s estimate=%.6f stderr=%.6f n_trials=%lld\n",
                    scenario.c_str(), report.estimate, report.stderr_est, report.n_trials);
        if (!out_path.empty()) write_json(report_json(report), out_path);
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conformal multiple-testing OOD detection toolkit"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    CalibrateSizeCmd cal_cmd;
    auto* cal = app.add_subcommand(
        "calibrate-size", "Solve for the smallest calibration-set size meeting the "
                          "conditional false-alarm guarantee");
    cal_cmd.alpha_opt = cal->add_option("--alpha", cal_cmd.alpha,
                                        "Target conditional false-alarm level in (0,1)");
    cal_cmd.epsilon_opt =
        cal->add_option("--epsilon", cal_cmd.epsilon, "Calibration slack factor, > 0");
    cal_cmd.delta_opt = cal->add_option("--delta", cal_cmd.delta,
                                        "Allowed guarantee failure probability in (0,1)");
    cal_cmd.k_opt = cal->add_option("--k", cal_cmd.k, "Number of score functions");
    cal_cmd.method_opt = cal->add_option("--method", cal_cmd.method, "bh or bonferroni");
    cal_cmd.scan_opt =
        cal->add_option("--scan-limit", cal_cmd.scan_limit, "Upper bound of the n_cal scan");
    cal->add_option("--config", cal_cmd.config_path, "JSON run configuration file");
    cal->add_option("--out", cal_cmd.out_path, "Write the result as JSON");

    FitScoresCmd fit_cmd;
    auto* fit = app.add_subcommand("fit-scores",
                                   "Fit Mahalanobis and Gram statistics from labeled "
                                   "feature bundles");
    fit_cmd.train_opt =
        fit->add_option("--train", fit_cmd.train_path, "Training feature bundles (JSON)");
    fit_cmd.out_opt = fit->add_option("--out", fit_cmd.out_path, "Output statistics file");
    fit_cmd.ridge_opt = fit->add_option(
        "--ridge", fit_cmd.ridge, "Covariance ridge; omit for the scale-aware default");
    fit_cmd.powers_opt =
        fit->add_option("--powers", fit_cmd.powers, "Gram matrix powers 1..P");
    fit_cmd.seed_opt =
        fit->add_option("--seed", fit_cmd.seed, "Seed of the normalizer holdout split");
    fit->add_flag("--skip-mahalanobis", fit_cmd.skip_mahalanobis,
                  "Do not fit Mahalanobis statistics");
    fit->add_flag("--skip-gram", fit_cmd.skip_gram, "Do not fit Gram range tables");
    fit->add_option("--config", fit_cmd.config_path, "JSON run configuration file");

    ScoreCmd score_cmd;
    auto* score = app.add_subcommand(
        "score", "Compute the oriented score matrix for feature bundles");
    score_cmd.stats_opt =
        score->add_option("--stats", score_cmd.stats_path, "Fitted statistics file");
    score_cmd.features_opt =
        score->add_option("--features", score_cmd.features_path, "Feature bundles (JSON)");
    score_cmd.out_opt =
        score->add_option("--out", score_cmd.out_path, "Output score matrix (CSV)");
    score_cmd.temperature_opt = score->add_option("--temperature", score_cmd.temperature,
                                                  "Energy score temperature");
    score->add_option("--config", score_cmd.config_path, "JSON run configuration file");

    DetectCmd detect_cmd;
    auto* detect = app.add_subcommand(
        "detect", "Run the OOD detector on a test score matrix against a calibration "
                  "score matrix");
    detect_cmd.cal_opt =
        detect->add_option("--cal", detect_cmd.cal_path, "Calibration score matrix (CSV)");
    detect_cmd.test_opt =
        detect->add_option("--test", detect_cmd.test_path, "Test score matrix (CSV)");
    detect_cmd.out_opt =
        detect->add_option("--out", detect_cmd.out_path, "Output results (JSON)");
    detect_cmd.alpha_opt =
        detect->add_option("--alpha", detect_cmd.alpha, "Conditional false-alarm target");
    detect_cmd.epsilon_opt =
        detect->add_option("--epsilon", detect_cmd.epsilon, "Calibration slack factor");
    detect_cmd.method_opt =
        detect->add_option("--method", detect_cmd.method, "bh, bonferroni or naive");
    detect->add_option("--config", detect_cmd.config_path, "JSON run configuration file");

    EvaluateCmd eval_cmd;
    auto* eval = app.add_subcommand(
        "evaluate", "Detection power at fixed false alarm from result files, or AUROC "
                    "from score files");
    eval->add_option("--in", eval_cmd.in_results, "In-distribution results (JSON)");
    eval->add_option("--ood", eval_cmd.ood_results, "OOD results (JSON)");
    eval->add_option("--in-scores", eval_cmd.in_scores, "In-distribution scores (CSV)");
    eval->add_option("--ood-scores", eval_cmd.ood_scores, "OOD scores (CSV)");
    eval->add_option("--column", eval_cmd.column, "Restrict AUROC to one column");
    eval->add_option("--target-pf", eval_cmd.target_pf,
                     "False-alarm level the detector was configured at");
    eval->add_option("--out", eval_cmd.out_path, "Write metrics as JSON");

    SimulateCmd sim_cmd;
    auto* sim = app.add_subcommand("simulate",
                                   "Monte Carlo scenarios: t1, t2, theorem1, power");
    sim->add_option("--scenario", sim_cmd.scenario, "t1 | t2 | theorem1 | power")
        ->required();
    sim->add_option("--mu1", sim_cmd.mu1, "First mean component (t1/t2)");
    sim->add_option("--mu2", sim_cmd.mu2, "Second mean component (t1/t2)");
    sim_cmd.alpha_opt = sim->add_option("--alpha", sim_cmd.alpha, "False-alarm level");
    sim_cmd.epsilon_opt =
        sim->add_option("--epsilon", sim_cmd.epsilon, "Calibration slack factor");
    sim_cmd.delta_opt =
        sim->add_option("--delta", sim_cmd.delta, "Guarantee failure probability");
    sim_cmd.k_opt = sim->add_option("--k", sim_cmd.k, "Number of scores");
    sim->add_option("--n-cal", sim_cmd.n_cal,
                    "Calibration size; 0 solves the size condition (theorem1)");
    sim->add_option("--cal-draws", sim_cmd.cal_draws, "Calibration draws (theorem1)");
    sim->add_option("--test-draws", sim_cmd.test_draws,
                    "Test points per calibration draw (theorem1)");
    sim->add_option("--trials", sim_cmd.trials, "Monte Carlo trials (t1/t2/power)");
    sim->add_option("--shift", sim_cmd.shift,
                    "Alternative mean shift: one value or k values (power)");
    sim_cmd.method_opt = sim->add_option("--method", sim_cmd.method, "bh or bonferroni");
    sim_cmd.seed_opt = sim->add_option("--seed", sim_cmd.seed, "Master RNG seed");
    sim_cmd.workers_opt = sim->add_option("--workers", sim_cmd.workers,
                                          "Worker threads; results do not depend on it");
    sim->add_option("--config", sim_cmd.config_path, "JSON run configuration file");
    sim->add_option("--out", sim_cmd.out_path, "Write the Monte Carlo report as JSON");

    try {
        app.parse(argc, argv);
        if (cal->parsed()) return cal_cmd.run();
        if (fit->parsed()) return fit_cmd.run();
        if (score->parsed()) return score_cmd.run();
        if (detect->parsed()) return detect_cmd.run();
        if (eval->parsed()) return eval_cmd.run();
        if (sim->parsed()) return sim_cmd.run();
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const ood::CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ood::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ood::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
