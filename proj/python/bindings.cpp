#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ood/conformal.hpp"
#include "ood/error.hpp"
#include "ood/evaluation.hpp"
#include "ood/multiple_testing.hpp"
#include "ood/numerics.hpp"
#include "ood/scores.hpp"
#include "ood/simulation.hpp"

namespace py = pybind11;

namespace {

ood::DetectorConfig make_config(double alpha, double epsilon, double delta, int k,
                                const std::string& method) {
    ood::DetectorConfig cfg;
    cfg.alpha = alpha;
    cfg.epsilon = epsilon;
    cfg.delta = delta;
    cfg.k = k;
    cfg.method = ood::parse_method(method);
    cfg.validate();
    return cfg;
}

ood::ScoreMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows[0].empty()) {
        throw ood::ConfigError("score matrix needs at least one row and one column");
    }
    ood::ScoreMatrix m;
    m.rows = rows.size();
    m.cols = rows[0].size();
    for (std::size_t c = 0; c < m.cols; ++c) m.names.push_back("s" + std::to_string(c + 1));
    for (const auto& row : rows) {
        if (row.size() != m.cols) throw ood::ConfigError("ragged score matrix");
        m.data.insert(m.data.end(), row.begin(), row.end());
    }
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Conformal multiple-testing OOD detection core";

    py::register_exception<ood::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ood::CapacityError>(m, "CapacityError", PyExc_RuntimeError);
    py::register_exception<ood::IoError>(m, "IoError", PyExc_OSError);

    // numerics
    m.def(
        "reg_inc_beta",
        [](double x, long long a, long long b) {
            return ood::reg_inc_beta(x, ood::BetaParams(a, b));
        },
        py::arg("x"), py::arg("a"), py::arg("b"),
        "Regularized incomplete beta function I_x(a, b) for integer shapes");
    m.def("normal_sf", &ood::normal_sf, py::arg("z"),
          "Standard normal survival function P(Z >= z)");
    m.def("normal_sf_inv", &ood::normal_sf_inv, py::arg("q"),
          "Inverse of normal_sf on (0, 1)");

    // conformal
    m.def("conformal_p_value", &ood::conformal_p_value, py::arg("cal_scores"),
          py::arg("t_test"),
          "(1 + #{cal >= t}) / (1 + n_cal); ties count as exceedances");
    m.def(
        "oracle_p_value",
        [](double t, double mu, double sigma) {
            return ood::oracle_p_value(ood::NullCdf::normal(mu, sigma), t);
        },
        py::arg("t_test"), py::arg("mu") = 0.0, py::arg("sigma") = 1.0,
        "Exact p-value 1 - F(t) under a normal null");

    py::class_<ood::CalibrationSet>(m, "CalibrationSet")
        .def(py::init<std::vector<std::string>, std::vector<std::vector<double>>>(),
             py::arg("score_names"), py::arg("columns"))
        .def_property_readonly("k", &ood::CalibrationSet::k)
        .def_property_readonly("n_cal", &ood::CalibrationSet::n_cal)
        .def_property_readonly("score_names", &ood::CalibrationSet::score_names)
        .def("p_value", &ood::CalibrationSet::p_value, py::arg("column"), py::arg("t_test"))
        .def("p_values", &ood::CalibrationSet::p_values, py::arg("test_scores"));

    // multiple testing
    m.def("correction_constant", &ood::correction_constant, py::arg("k"),
          py::arg("epsilon"), "C(K) = (1 + epsilon) * sum_{j<=K} 1/j");

    py::class_<ood::DetectorConfig>(m, "DetectorConfig")
        .def(py::init(&make_config), py::arg("alpha") = 0.1, py::arg("epsilon") = 1.0,
             py::arg("delta") = 0.1, py::arg("k") = 1, py::arg("method") = "bh")
        .def_readonly("alpha", &ood::DetectorConfig::alpha)
        .def_readonly("epsilon", &ood::DetectorConfig::epsilon)
        .def_readonly("delta", &ood::DetectorConfig::delta)
        .def_readonly("k", &ood::DetectorConfig::k)
        .def_property_readonly("method", [](const ood::DetectorConfig& cfg) {
            return ood::method_name(cfg.method);
        });

    py::class_<ood::DetectionResult>(m, "DetectionResult")
        .def_readonly("is_ood", &ood::DetectionResult::is_ood)
        .def_readonly("p_values", &ood::DetectionResult::p_values)
        .def_readonly("sorted_p_values", &ood::DetectionResult::sorted_p_values)
        .def_readonly("m", &ood::DetectionResult::m)
        .def_readonly("rejected_indices", &ood::DetectionResult::rejected_indices)
        .def_readonly("thresholds", &ood::DetectionResult::thresholds)
        .def("__repr__", [](const ood::DetectionResult& r) {
            return "<DetectionResult is_ood=" + std::string(r.is_ood ? "True" : "False") +
                   " m=" + std::to_string(r.m) + ">";
        });

    m.def("bh_detect", &ood::bh_detect, py::arg("p_values"), py::arg("config"),
          "Step-up detector: m = max{i : p_(i) <= alpha*i/(C(K)K)}");
    m.def("bonferroni_detect", &ood::bonferroni_detect, py::arg("p_values"),
          py::arg("config"), "Flat-threshold detector at alpha/((1+eps)K)");
    m.def("naive_average_detect", &ood::naive_average_detect, py::arg("scores"),
          py::arg("taus"), "Majority vote over per-score threshold exceedances");
    m.def(
        "calibrate_naive_thresholds",
        [](const std::vector<std::vector<double>>& rows, double target_pf) {
            return ood::calibrate_naive_thresholds(matrix_from_rows(rows), target_pf);
        },
        py::arg("holdout_rows"), py::arg("target_pf"),
        "Shared-quantile thresholds for the naive rule");

    auto make_request = [](double alpha, double epsilon, double delta, int k,
                           long long scan_limit) {
        ood::CalSizeRequest req;
        req.alpha = alpha;
        req.epsilon = epsilon;
        req.delta = delta;
        req.k = k;
        req.scan_limit = scan_limit;
        return req;
    };
    m.def(
        "required_cal_size",
        [make_request](double alpha, double epsilon, double delta, int k,
                       long long scan_limit) {
            return ood::required_cal_size(make_request(alpha, epsilon, delta, k, scan_limit));
        },
        py::arg("alpha"), py::arg("epsilon"), py::arg("delta"), py::arg("k"),
        py::arg("scan_limit") = 200000,
        "Smallest n_cal meeting the step-up guarantee condition");
    m.def(
        "required_cal_size_bonferroni",
        [make_request](double alpha, double epsilon, double delta, int k,
                       long long scan_limit) {
            return ood::required_cal_size_bonferroni(
                make_request(alpha, epsilon, delta, k, scan_limit));
        },
        py::arg("alpha"), py::arg("epsilon"), py::arg("delta"), py::arg("k"),
        py::arg("scan_limit") = 200000,
        "Smallest n_cal meeting the flat-threshold guarantee condition");

    // simulation
    py::class_<ood::MonteCarloReport>(m, "MonteCarloReport")
        .def_readonly("estimate", &ood::MonteCarloReport::estimate)
        .def_property_readonly("stderr",
                               [](const ood::MonteCarloReport& r) { return r.stderr_est; })
        .def_readonly("n_trials", &ood::MonteCarloReport::n_trials)
        .def_readonly("per_calibration_estimates",
                      &ood::MonteCarloReport::per_calibration_estimates)
        .def("__repr__", [](const ood::MonteCarloReport& r) {
            return "<MonteCarloReport estimate=" + std::to_string(r.estimate) +
                   " n_trials=" + std::to_string(r.n_trials) + ">";
        });

    py::class_<ood::MixtureComponent>(m, "MixtureComponent")
        .def(py::init([](double weight, std::vector<double> mean, double sigma) {
                 ood::MixtureComponent c;
                 c.weight = weight;
                 c.mean = std::move(mean);
                 c.sigma = sigma;
                 return c;
             }),
             py::arg("weight"), py::arg("mean"), py::arg("sigma") = 1.0);

    py::class_<ood::SyntheticModel>(m, "SyntheticModel")
        .def_static("iid_normal", &ood::SyntheticModel::iid_normal, py::arg("k"),
                    py::arg("seed") = 0)
        .def_static("correlated_normal", &ood::SyntheticModel::correlated_normal,
                    py::arg("mean"), py::arg("covariance"), py::arg("seed") = 0)
        .def_static("mixture", &ood::SyntheticModel::mixture, py::arg("k"),
                    py::arg("components"), py::arg("seed") = 0)
        .def_readonly("k", &ood::SyntheticModel::k)
        .def_readonly("seed", &ood::SyntheticModel::seed);

    m.def(
        "simulate_test_t1",
        [](std::pair<double, double> mu, double alpha, long long n_trials,
           std::uint64_t seed, int workers) {
            return ood::simulate_test_t1({mu.first, mu.second}, alpha, n_trials, seed,
                                         workers);
        },
        py::arg("mu"), py::arg("alpha"), py::arg("n_trials"), py::arg("seed"),
        py::arg("workers") = 1, "Rejection rate of the standardized sum test");
    m.def(
        "simulate_test_t2",
        [](std::pair<double, double> mu, double alpha, long long n_trials,
           std::uint64_t seed, int workers) {
            return ood::simulate_test_t2({mu.first, mu.second}, alpha, n_trials, seed,
                                         workers);
        },
        py::arg("mu"), py::arg("alpha"), py::arg("n_trials"), py::arg("seed"),
        py::arg("workers") = 1, "Rejection rate of the two-coordinate step-up test");
    m.def(
        "power_bound",
        [](std::pair<double, double> mu, double alpha) {
            return ood::power_bound({mu.first, mu.second}, alpha);
        },
        py::arg("mu"), py::arg("alpha"),
        "Analytic lower bound on the step-up test power under N(mu, I)");
    m.def("verify_conditional_false_alarm", &ood::verify_conditional_false_alarm,
          py::arg("model"), py::arg("config"), py::arg("n_cal"), py::arg("n_cal_draws"),
          py::arg("n_test_draws"), py::arg("seed"), py::arg("workers") = 1,
          "Fraction of calibration draws whose conditional false-alarm rate stays "
          "within alpha");
    m.def("estimate_power", &ood::estimate_power, py::arg("model_null"),
          py::arg("model_alt"), py::arg("config"), py::arg("n_cal"), py::arg("n_trials"),
          py::arg("seed"), py::arg("workers") = 1,
          "Detection rate against an alternative model");

    // evaluation
    m.def(
        "power_at_false_alarm",
        [](const std::vector<std::uint8_t>& in_dec, const std::vector<std::uint8_t>& ood_dec,
           double target_pf) {
            const auto r = ood::power_at_false_alarm(in_dec, ood_dec, target_pf);
            return std::make_pair(r.pd, r.achieved_pf);
        },
        py::arg("in_decisions"), py::arg("ood_decisions"), py::arg("target_pf"),
        "(detection power, achieved false-alarm rate)");
    m.def("auroc", &ood::auroc, py::arg("in_scores"), py::arg("ood_scores"),
          "Mann-Whitney AUROC with ties counted 1/2; larger score = more OOD");
    m.def("empirical_fwer", &ood::empirical_fwer, py::arg("decision_matrix"),
          "Fraction of trials with at least one rejection");

    // scores
    m.def(
        "energy_score",
        [](const std::vector<double>& inputs, double temperature) {
            return ood::energy_score(inputs, {temperature});
        },
        py::arg("softmax_inputs"), py::arg("temperature") = 100.0,
        "-T * logsumexp(inputs / T), overflow-safe");
}
