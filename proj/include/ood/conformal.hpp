#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ood/score_matrix.hpp"

namespace ood {

// Classical conformal p-value: (1 + #{j : cal_scores[j] >= t_test}) / (1 + n).
// Ties between t_test and calibration scores count toward the ">=" set.
// Single linear pass; see CalibrationSet::p_value for the pre-sorted variant,
// which returns bit-identical values.
double conformal_p_value(const std::vector<double>& cal_scores, double t_test);

// Held-out in-distribution scores, one column per score function. All columns
// share a common length n_cal; NaN entries are rejected at construction.
// Immutable afterwards, so concurrent queries are safe.
class CalibrationSet {
public:
    CalibrationSet(std::vector<std::string> score_names,
                   std::vector<std::vector<double>> columns);

    static CalibrationSet from_matrix(const ScoreMatrix& m);

    std::size_t k() const { return columns_.size(); }
    std::size_t n_cal() const { return columns_.empty() ? 0 : columns_[0].size(); }
    const std::vector<std::string>& score_names() const { return names_; }
    const std::vector<double>& column(std::size_t i) const { return columns_[i]; }

    // Conformal p-value for column i at t, via binary search on a pre-sorted
    // copy. Bit-identical to conformal_p_value on the raw column.
    double p_value(std::size_t i, double t) const;

    // Component-wise conformal p-values; test_scores must have length k().
    std::vector<double> p_values(const std::vector<double>& test_scores) const;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
    std::vector<std::vector<double>> sorted_;
};

// Analytic null CDF for oracle p-values (exact p-values in simulations).
struct NullCdf {
    enum class Family { StandardNormal, Normal };

    Family family = Family::StandardNormal;
    double mu = 0.0;
    double sigma = 1.0;

    static NullCdf standard_normal() { return {}; }
    static NullCdf normal(double mu, double sigma);

    // Accepts "standard_normal" or "normal(<mu>,<sigma>)".
    static NullCdf parse(const std::string& spec);
};

// Exact p-value 1 - F(t) under the given null.
double oracle_p_value(const NullCdf& null_cdf, double t_test);

}  // namespace ood
