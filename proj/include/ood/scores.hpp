#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ood/score_matrix.hpp"

namespace ood {

// One intermediate representation of a sample: row-major (rows x cols) array.
// A plain feature vector is a single-column layer.
struct FeatureLayer {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows * cols, row-major

    std::size_t size() const { return rows * cols; }
};

// Per-sample inputs to the score functions: layer outputs plus optional
// label, predicted class and softmax vector (entries must sum to 1).
struct FeatureBundle {
    std::vector<FeatureLayer> layers;
    std::optional<int> label;
    std::optional<int> predicted_class;
    std::optional<std::vector<double>> softmax;
};

void validate_bundle(const FeatureBundle& bundle);  // shape/softmax invariants

struct EnergyConfig {
    double temperature = 100.0;
};

// Gaussian statistics for one layer: class means and the tied (pooled)
// covariance with its cached Cholesky factorization.
struct LayerGaussian {
    Eigen::MatrixXd class_means;  // n_classes x d, row per class
    Eigen::MatrixXd covariance;   // d x d, ridge already applied
    Eigen::LLT<Eigen::MatrixXd> factor;
    double ridge = 0.0;
};

// Range tables for one layer's Gram features: per class, a (powers x
// n_correlations) matrix of per-entry minima and maxima, plus the deviation
// normalizer estimated on the held-out split.
struct LayerGram {
    std::vector<Eigen::MatrixXd> min_by_class;
    std::vector<Eigen::MatrixXd> max_by_class;
    double normalizer = 1.0;
};

struct ClassStats {
    std::vector<int> class_ids;  // sorted distinct labels
    std::vector<std::array<std::size_t, 2>> layer_shapes;
    std::vector<LayerGaussian> gaussians;  // empty until fit_mahalanobis
    std::vector<LayerGram> grams;          // empty until fit_gram
    int gram_powers = 10;
    std::uint64_t split_seed = 0;

    std::size_t n_layers() const { return layer_shapes.size(); }
    bool has_mahalanobis() const { return !gaussians.empty(); }
    bool has_gram() const { return !grams.empty(); }

    int class_index(int label) const;  // -1 if unknown
};

// Class-wise means and tied covariance per layer. Every class must appear at
// least twice. ridge = nullopt selects the scale-aware default
// 1e-6 * trace(S)/d; an explicit value (including 0) overrides it.
ClassStats fit_mahalanobis(const std::vector<FeatureBundle>& train,
                           std::optional<double> ridge = std::nullopt);

// max over classes of the negative squared Mahalanobis distance; always <= 0.
// The exported "large = OOD" column negates this (see score_registry).
double mahalanobis_score(const ClassStats& stats, const FeatureBundle& features,
                         std::size_t layer);

// Per-(class, layer, power, correlation) min/max of the flattened upper
// triangle of the order-p Gram matrices, estimated on ~90% of the training
// data; the remaining held-out fraction estimates each layer's deviation
// normalizer. Layer features must be non-negative. Extends `stats` in place
// when it already carries Mahalanobis statistics for the same data.
void fit_gram(ClassStats& stats, const std::vector<FeatureBundle>& train,
              int powers = 10, std::uint64_t seed = 0);

ClassStats fit_gram(const std::vector<FeatureBundle>& train, int powers = 10,
                    std::uint64_t seed = 0);

// Indices of `n` class members held out for the normalizer estimate
// (floor(n/10) of them), derived deterministically from the seed.
std::vector<std::size_t> gram_holdout_indices(std::size_t n, std::uint64_t seed,
                                              int class_id);

struct GramScoreDetail {
    double score = 0.0;
    std::size_t unnormalized_terms = 0;  // branches hit with |min| or |max| = 0
};

// Sum over powers and correlations of the out-of-range deviation, normalized
// by the layer's held-out mean deviation. Uses the bundle's predicted class.
double gram_deviation_score(const ClassStats& stats, const FeatureBundle& features,
                            std::size_t layer);
GramScoreDetail gram_deviation_score_detail(const ClassStats& stats,
                                            const FeatureBundle& features,
                                            std::size_t layer);

// -T * log sum_i exp(sigma_i / T), computed with max subtraction so inputs
// with |sigma_i| <= 1e4 never overflow.
double energy_score(const std::vector<double>& softmax_inputs, const EnergyConfig& cfg);

// Registry of exported score columns. The conformal pipeline consumes only
// "large = OOD" columns; negate_raw records which raw scores are flipped to
// satisfy that orientation.
struct ScoreSpec {
    std::string name;
    bool negate_raw = false;
};

std::vector<ScoreSpec> score_registry(std::size_t n_layers, bool with_mahalanobis,
                                      bool with_gram, bool with_energy);

// Oriented score matrix for a batch of bundles, with columns named
// mahala_L{i}, gram_L{i}, energy as available from the fitted stats.
ScoreMatrix build_score_matrix(const ClassStats& stats,
                               const std::vector<FeatureBundle>& bundles,
                               const EnergyConfig& energy_cfg = {});

}  // namespace ood
