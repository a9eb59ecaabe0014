#include "ood/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "ood/error.hpp"

namespace ood {

PowerAtFalseAlarm power_at_false_alarm(const std::vector<std::uint8_t>& in_decisions,
                                       const std::vector<std::uint8_t>& ood_decisions,
                                       double target_pf) {
    if (in_decisions.empty() || ood_decisions.empty()) {
        throw ConfigError("power_at_false_alarm: decision vectors must be nonempty");
    }
    if (!(target_pf > 0.0 && target_pf < 1.0)) {
        throw ConfigError("power_at_false_alarm: target_pf must lie in (0, 1)");
    }
    auto mean = [](const std::vector<std::uint8_t>& v) {
        std::size_t flagged = 0;
        for (auto d : v) flagged += d ? 1 : 0;
        return static_cast<double>(flagged) / static_cast<double>(v.size());
    };
    // Both rates are reported as-is; thresholds are never re-tuned here.
    return {mean(ood_decisions), mean(in_decisions)};
}

double auroc(const std::vector<double>& in_scores, const std::vector<double>& ood_scores) {
    if (in_scores.empty() || ood_scores.empty()) {
        throw ConfigError("auroc: both score sets must be nonempty");
    }
    for (double s : in_scores) {
        if (std::isnan(s)) throw ConfigError("auroc: NaN in in-distribution scores");
    }
    for (double s : ood_scores) {
        if (std::isnan(s)) throw ConfigError("auroc: NaN in OOD scores");
    }

    std::vector<double> sorted_in = in_scores;
    std::sort(sorted_in.begin(), sorted_in.end());

    // U counts (ood > in) pairs plus half the ties, exactly.
    double u = 0.0;
    for (double s : ood_scores) {
        const auto lo = std::lower_bound(sorted_in.begin(), sorted_in.end(), s);
        const auto hi = std::upper_bound(sorted_in.begin(), sorted_in.end(), s);
        u += static_cast<double>(lo - sorted_in.begin());
        u += 0.5 * static_cast<double>(hi - lo);
    }
    return u / (static_cast<double>(in_scores.size()) *
                static_cast<double>(ood_scores.size()));
}

double empirical_fwer(const std::vector<std::vector<bool>>& decision_matrix) {
    if (decision_matrix.empty()) return 0.0;
    std::size_t trials_with_rejection = 0;
    for (const auto& trial : decision_matrix) {
        if (std::any_of(trial.begin(), trial.end(), [](bool d) { return d; })) {
            ++trials_with_rejection;
        }
    }
    return static_cast<double>(trials_with_rejection) /
           static_cast<double>(decision_matrix.size());
}

}  // namespace ood
