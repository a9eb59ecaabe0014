#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace ood {

struct PowerAtFalseAlarm {
    double pd = 0.0;           // mean of the OOD decisions
    double achieved_pf = 0.0;  // mean of the in-distribution decisions
};

// Reports detection power alongside the realized false-alarm rate of an
// already-configured detector. No re-thresholding: target_pf is only the
// level the detector was configured at.
PowerAtFalseAlarm power_at_false_alarm(const std::vector<std::uint8_t>& in_decisions,
                                       const std::vector<std::uint8_t>& ood_decisions,
                                       double target_pf);

// Mann-Whitney U / (n_in * n_ood) with ties counted 1/2. Scores must be
// oriented so larger means more OOD.
double auroc(const std::vector<double>& in_scores, const std::vector<double>& ood_scores);

// Fraction of trials with at least one rejection; the trials must all be
// generated under the global null.
double empirical_fwer(const std::vector<std::vector<bool>>& decision_matrix);

}  // namespace ood
