#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ood/multiple_testing.hpp"
#include "ood/score_matrix.hpp"
#include "ood/scores.hpp"

namespace ood {

inline constexpr int kResultsSchemaVersion = 1;
inline constexpr int kStatsSchemaVersion = 1;
inline constexpr int kFeaturesSchemaVersion = 1;

// CSV score matrices: a header of unique column names (an optional leading
// "sample_id" column carries row ids), then one row of decimal reals per
// sample. Values are written with 17 significant digits so write/read
// round-trips are bit-exact. NaN/Inf and ragged rows are rejected with the
// offending line.
ScoreMatrix read_score_matrix(const std::string& path);
void write_score_matrix(const ScoreMatrix& m, const std::string& path);

// A batch of detection results plus the configuration that produced them.
struct ResultSet {
    std::string method;
    double alpha = 0.0;
    double epsilon = 0.0;
    int k = 0;
    long long n_cal = 0;
    std::vector<std::string> score_names;
    std::vector<std::string> sample_ids;  // empty or one per result
    std::vector<DetectionResult> results;
};

// JSON with a schema_version field and stable key ordering.
void write_results(const ResultSet& results, const std::string& path);
ResultSet read_results(const std::string& path);

// Fitted statistics persisted as JSON with layer shapes, ridge, powers,
// normalizers and a payload checksum. Loading re-derives the Cholesky
// factorizations and verifies the checksum.
void save_class_stats(const ClassStats& stats, const std::string& path);
ClassStats load_class_stats(const std::string& path);

// Throws ConfigError when the bundle's layer shapes do not match the stats.
void validate_compatible(const ClassStats& stats, const FeatureBundle& bundle);

// Feature bundle datasets: {"schema_version":1, "samples":[{"layers":
// [{"shape":[r,c],"data":[...]}], "label":..?, "predicted_class":..?,
// "softmax":[..]?}]}. Shape products must match array lengths.
std::vector<FeatureBundle> read_feature_bundles(const std::string& path);
void write_feature_bundles(const std::vector<FeatureBundle>& bundles,
                           const std::string& path);

// Run configuration file: detector parameters plus method-specific options
// and input/output paths. Unknown keys (and unknown path names) are rejected.
struct RunConfig {
    std::optional<double> alpha;
    std::optional<double> epsilon;
    std::optional<double> delta;
    std::optional<int> k;
    std::optional<std::string> method;
    std::optional<std::uint64_t> seed;
    std::optional<double> temperature;
    std::optional<int> powers;
    std::optional<double> ridge;  // absent = scale-aware default
    std::optional<long long> scan_limit;
    std::optional<int> workers;
    // "paths" object: train, cal, test, stats, features, out.
    std::map<std::string, std::string> paths;

    std::optional<std::string> path(const std::string& name) const {
        const auto it = paths.find(name);
        if (it == paths.end()) return std::nullopt;
        return it->second;
    }
};

RunConfig load_run_config(const std::string& path);

}  // namespace ood
