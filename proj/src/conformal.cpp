#include "ood/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ood/error.hpp"
#include "ood/numerics.hpp"

namespace ood {

double conformal_p_value(const std::vector<double>& cal_scores, double t_test) {
    if (cal_scores.empty()) {
        throw ConfigError("conformal_p_value: empty calibration vector");
    }
    std::size_t exceedances = 0;
    for (double s : cal_scores) {
        if (s >= t_test) ++exceedances;
    }
    return static_cast<double>(1 + exceedances) /
           static_cast<double>(1 + cal_scores.size());
}

CalibrationSet::CalibrationSet(std::vector<std::string> score_names,
                               std::vector<std::vector<double>> columns)
    : names_(std::move(score_names)), columns_(std::move(columns)) {
    if (columns_.empty()) {
        throw ConfigError("CalibrationSet: no score columns");
    }
    if (names_.size() != columns_.size()) {
        throw ConfigError("CalibrationSet: " + std::to_string(names_.size()) +
                          " names for " + std::to_string(columns_.size()) + " columns");
    }
    const std::size_t n = columns_[0].size();
    if (n == 0) {
        throw ConfigError("CalibrationSet: calibration columns are empty");
    }
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].size() != n) {
            throw ConfigError("CalibrationSet: column '" + names_[i] + "' has " +
                              std::to_string(columns_[i].size()) + " entries, expected " +
                              std::to_string(n));
        }
        for (std::size_t r = 0; r < columns_[i].size(); ++r) {
            if (std::isnan(columns_[i][r])) {
                throw ConfigError("CalibrationSet: NaN in column '" + names_[i] +
                                  "' at row " + std::to_string(r));
            }
        }
    }
    sorted_ = columns_;
    for (auto& col : sorted_) std::sort(col.begin(), col.end());
}

CalibrationSet CalibrationSet::from_matrix(const ScoreMatrix& m) {
    std::vector<std::vector<double>> cols(m.cols);
    for (std::size_t c = 0; c < m.cols; ++c) cols[c] = m.column(c);
    return CalibrationSet(m.names, std::move(cols));
}

double CalibrationSet::p_value(std::size_t i, double t) const {
    const auto& col = sorted_[i];
    // First element >= t; everything from there on counts as an exceedance.
    const auto it = std::lower_bound(col.begin(), col.end(), t);
    const std::size_t exceedances = static_cast<std::size_t>(col.end() - it);
    return static_cast<double>(1 + exceedances) / static_cast<double>(1 + col.size());
}

std::vector<double> CalibrationSet::p_values(const std::vector<double>& test_scores) const {
    if (test_scores.size() != k()) {
        throw ConfigError("conformal p-values: got " + std::to_string(test_scores.size()) +
                          " test scores for " + std::to_string(k()) + " calibration columns");
    }
    std::vector<double> out(k());
    for (std::size_t i = 0; i < k(); ++i) out[i] = p_value(i, test_scores[i]);
    return out;
}

NullCdf NullCdf::normal(double mu, double sigma) {
    if (!(sigma > 0.0)) {
        throw ConfigError("NullCdf: sigma must be positive");
    }
    NullCdf cdf;
    cdf.family = Family::Normal;
    cdf.mu = mu;
    cdf.sigma = sigma;
    return cdf;
}

NullCdf NullCdf::parse(const std::string& spec) {
    if (spec == "standard_normal") return standard_normal();
    if (spec.rfind("normal(", 0) == 0 && spec.back() == ')') {
        const std::string body = spec.substr(7, spec.size() - 8);
        const auto comma = body.find(',');
        if (comma != std::string::npos) {
            try {
                const double mu = std::stod(body.substr(0, comma));
                const double sigma = std::stod(body.substr(comma + 1));
                return normal(mu, sigma);
            } catch (const std::logic_error&) {
                // fall through to the unsupported-family error
            }
        }
    }
    throw ConfigError("unsupported null CDF family: '" + spec +
                      "' (expected standard_normal or normal(mu,sigma))");
}

double oracle_p_value(const NullCdf& null_cdf, double t_test) {
    switch (null_cdf.family) {
        case NullCdf::Family::StandardNormal:
            return normal_sf(t_test);
        case NullCdf::Family::Normal:
            return normal_sf((t_test - null_cdf.mu) / null_cdf.sigma);
    }
    throw ConfigError("unsupported null CDF family");
}

}  // namespace ood
