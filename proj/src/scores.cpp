#include "ood/scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "ood/error.hpp"

namespace ood {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<std::array<std::size_t, 2>> layer_shapes_of(const FeatureBundle& b) {
    std::vector<std::array<std::size_t, 2>> shapes;
    shapes.reserve(b.layers.size());
    for (const auto& layer : b.layers) shapes.push_back({layer.rows, layer.cols});
    return shapes;
}

void check_common_shapes(const std::vector<FeatureBundle>& bundles,
                         const std::vector<std::array<std::size_t, 2>>& shapes) {
    for (std::size_t s = 0; s < bundles.size(); ++s) {
        validate_bundle(bundles[s]);
        if (layer_shapes_of(bundles[s]) != shapes) {
            throw ConfigError("sample " + std::to_string(s) +
                              ": layer shapes differ from the rest of the dataset");
        }
    }
}

// Sorted distinct labels with their member indices in dataset order.
std::map<int, std::vector<std::size_t>> group_by_label(
    const std::vector<FeatureBundle>& bundles) {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t s = 0; s < bundles.size(); ++s) {
        if (!bundles[s].label) {
            throw ConfigError("sample " + std::to_string(s) + ": missing label");
        }
        groups[*bundles[s].label].push_back(s);
    }
    return groups;
}

void check_layer_access(const ClassStats& stats, const FeatureBundle& features,
                        std::size_t layer, const char* what) {
    if (layer >= stats.n_layers()) {
        throw ConfigError(std::string(what) + ": layer " + std::to_string(layer) +
                          " out of range (" + std::to_string(stats.n_layers()) + " layers)");
    }
    validate_bundle(features);
    if (layer_shapes_of(features) != stats.layer_shapes) {
        throw ConfigError(std::string(what) + ": feature layer shapes do not match the "
                                              "fitted statistics");
    }
}

// Flattened upper triangle (diagonal included, row-major) of the order-p Gram
// matrix of one layer.
Eigen::VectorXd gram_upper(const FeatureLayer& layer, int p) {
    ConstMatrixMap x(layer.data.data(), static_cast<Eigen::Index>(layer.rows),
                     static_cast<Eigen::Index>(layer.cols));
    const RowMajorMatrix xp = x.array().pow(static_cast<double>(p)).matrix();
    const Eigen::MatrixXd gram = xp * xp.transpose();
    const Eigen::Index r = gram.rows();
    Eigen::VectorXd flat(r * (r + 1) / 2);
    const double inv_p = 1.0 / static_cast<double>(p);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = i; j < r; ++j) {
            flat[idx++] = std::pow(gram(i, j), inv_p);
        }
    }
    return flat;
}

}  // namespace

void validate_bundle(const FeatureBundle& bundle) {
    for (std::size_t i = 0; i < bundle.layers.size(); ++i) {
        const auto& layer = bundle.layers[i];
        if (layer.rows == 0 || layer.cols == 0 ||
            layer.data.size() != layer.rows * layer.cols) {
            throw ConfigError("layer " + std::to_string(i) + ": shape " +
                              std::to_string(layer.rows) + "x" + std::to_string(layer.cols) +
                              " does not match " + std::to_string(layer.data.size()) +
                              " values");
        }
    }
    if (bundle.softmax) {
        const double sum =
            std::accumulate(bundle.softmax->begin(), bundle.softmax->end(), 0.0);
        if (bundle.softmax->empty() || std::fabs(sum - 1.0) > 1e-6) {
            throw ConfigError("softmax entries must sum to 1 (got " + std::to_string(sum) +
                              ")");
        }
    }
}

int ClassStats::class_index(int label) const {
    const auto it = std::lower_bound(class_ids.begin(), class_ids.end(), label);
    if (it == class_ids.end() || *it != label) return -1;
    return static_cast<int>(it - class_ids.begin());
}

ClassStats fit_mahalanobis(const std::vector<FeatureBundle>& train,
                           std::optional<double> ridge) {
    if (train.empty()) throw ConfigError("fit_mahalanobis: empty training set");
    const auto shapes = layer_shapes_of(train[0]);
    if (shapes.empty()) throw ConfigError("fit_mahalanobis: bundles carry no layers");
    check_common_shapes(train, shapes);

    const auto groups = group_by_label(train);
    for (const auto& [label, members] : groups) {
        if (members.size() < 2) {
            throw ConfigError("fit_mahalanobis: class " + std::to_string(label) + " has " +
                              std::to_string(members.size()) + " sample(s); need at least 2");
        }
    }

    ClassStats stats;
    stats.layer_shapes = shapes;
    for (const auto& [label, members] : groups) stats.class_ids.push_back(label);

    const std::size_t n_classes = stats.class_ids.size();
    const double n_total = static_cast<double>(train.size());

    for (std::size_t li = 0; li < shapes.size(); ++li) {
        const auto d = static_cast<Eigen::Index>(shapes[li][0] * shapes[li][1]);
        LayerGaussian g;
        g.class_means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_classes), d);

        std::size_t ci = 0;
        for (const auto& [label, members] : groups) {
            for (std::size_t s : members) {
                ConstVectorMap x(train[s].layers[li].data.data(), d);
                g.class_means.row(static_cast<Eigen::Index>(ci)) += x.transpose();
            }
            g.class_means.row(static_cast<Eigen::Index>(ci)) /=
                static_cast<double>(members.size());
            ++ci;
        }

        // Pooled within-class scatter over the total sample count.
        Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
        ci = 0;
        for (const auto& [label, members] : groups) {
            for (std::size_t s : members) {
                ConstVectorMap x(train[s].layers[li].data.data(), d);
                const Eigen::VectorXd diff =
                    x - g.class_means.row(static_cast<Eigen::Index>(ci)).transpose();
                scatter.noalias() += diff * diff.transpose();
            }
            ++ci;
        }
        scatter /= n_total;

        g.ridge = ridge ? *ridge : 1e-6 * scatter.trace() / static_cast<double>(d);
        if (g.ridge < 0.0) throw ConfigError("fit_mahalanobis: ridge must be >= 0");
        g.covariance = scatter + g.ridge * Eigen::MatrixXd::Identity(d, d);
        g.factor.compute(g.covariance);
        if (g.factor.info() != Eigen::Success) {
            throw ConfigError("fit_mahalanobis: covariance of layer " + std::to_string(li) +
                              " is singular after ridge " + std::to_string(g.ridge));
        }
        stats.gaussians.push_back(std::move(g));
    }
    return stats;
}

double mahalanobis_score(const ClassStats& stats, const FeatureBundle& features,
                         std::size_t layer) {
    if (!stats.has_mahalanobis()) {
        throw ConfigError("mahalanobis_score: statistics not fitted");
    }
    check_layer_access(stats, features, layer, "mahalanobis_score");

    const auto& g = stats.gaussians[layer];
    ConstVectorMap x(features.layers[layer].data.data(), g.class_means.cols());
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < g.class_means.rows(); ++c) {
        const Eigen::VectorXd diff = x - g.class_means.row(c).transpose();
        const double qf = diff.dot(g.factor.solve(diff));
        best = std::max(best, -qf);
    }
    return best;
}

std::vector<std::size_t> gram_holdout_indices(std::size_t n, std::uint64_t seed,
                                              int class_id) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix64(seed ^ mix64(static_cast<std::uint64_t>(
                                 static_cast<std::int64_t>(class_id)))));
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(n / 10);
    std::sort(order.begin(), order.end());
    return order;
}

void fit_gram(ClassStats& stats, const std::vector<FeatureBundle>& train, int powers,
              std::uint64_t seed) {
    if (train.empty()) throw ConfigError("fit_gram: empty training set");
    if (powers < 1) throw ConfigError("fit_gram: powers must be >= 1");
    const auto shapes = layer_shapes_of(train[0]);
    if (shapes.empty()) throw ConfigError("fit_gram: bundles carry no layers");
    check_common_shapes(train, shapes);

    for (std::size_t s = 0; s < train.size(); ++s) {
        for (std::size_t li = 0; li < train[s].layers.size(); ++li) {
            for (double v : train[s].layers[li].data) {
                if (!(v >= 0.0)) {
                    throw ConfigError("fit_gram: layer " + std::to_string(li) +
                                      " of sample " + std::to_string(s) +
                                      " has negative entries; Gram features require "
                                      "non-negative activations");
                }
            }
        }
    }

    const auto groups = group_by_label(train);
    std::vector<int> class_ids;
    for (const auto& [label, members] : groups) class_ids.push_back(label);

    if (stats.n_layers() == 0) {
        stats.layer_shapes = shapes;
        stats.class_ids = class_ids;
    } else if (stats.layer_shapes != shapes || stats.class_ids != class_ids) {
        throw ConfigError("fit_gram: dataset layout does not match the existing statistics");
    }
    stats.gram_powers = powers;
    stats.split_seed = seed;

    // Per class, hold out floor(n_c/10) samples for the normalizer estimate.
    std::vector<std::size_t> fit_samples;
    std::vector<std::size_t> holdout_samples;
    for (const auto& [label, members] : groups) {
        const auto held = gram_holdout_indices(members.size(), seed, label);
        std::size_t h = 0;
        for (std::size_t pos = 0; pos < members.size(); ++pos) {
            if (h < held.size() && held[h] == pos) {
                holdout_samples.push_back(members[pos]);
                ++h;
            } else {
                fit_samples.push_back(members[pos]);
            }
        }
    }

    stats.grams.assign(shapes.size(), LayerGram{});
    for (std::size_t li = 0; li < shapes.size(); ++li) {
        const std::size_t r = shapes[li][0];
        const auto n_corr = static_cast<Eigen::Index>(r * (r + 1) / 2);
        auto& lg = stats.grams[li];
        lg.min_by_class.assign(class_ids.size(),
                               Eigen::MatrixXd::Constant(powers, n_corr,
                                                         std::numeric_limits<double>::infinity()));
        lg.max_by_class.assign(class_ids.size(),
                               Eigen::MatrixXd::Constant(powers, n_corr,
                                                         -std::numeric_limits<double>::infinity()));
    }

    for (std::size_t s : fit_samples) {
        const int ci = stats.class_index(*train[s].label);
        for (std::size_t li = 0; li < shapes.size(); ++li) {
            auto& lg = stats.grams[li];
            for (int p = 1; p <= powers; ++p) {
                const Eigen::VectorXd flat = gram_upper(train[s].layers[li], p);
                auto min_row = lg.min_by_class[static_cast<std::size_t>(ci)].row(p - 1);
                auto max_row = lg.max_by_class[static_cast<std::size_t>(ci)].row(p - 1);
                min_row = min_row.cwiseMin(flat.transpose());
                max_row = max_row.cwiseMax(flat.transpose());
            }
        }
    }

    // Normalizer: mean held-out per-layer total deviation. Falls back to 1
    // when the holdout is empty or deviates nowhere.
    for (std::size_t li = 0; li < shapes.size(); ++li) {
        double total = 0.0;
        for (std::size_t s : holdout_samples) {
            FeatureBundle probe = train[s];
            if (!probe.predicted_class) probe.predicted_class = probe.label;
            total += gram_deviation_score_detail(stats, probe, li).score;
        }
        const double mean =
            holdout_samples.empty() ? 0.0 : total / static_cast<double>(holdout_samples.size());
        stats.grams[li].normalizer = mean > 0.0 ? mean : 1.0;
    }
}

ClassStats fit_gram(const std::vector<FeatureBundle>& train, int powers,
                    std::uint64_t seed) {
    ClassStats stats;
    fit_gram(stats, train, powers, seed);
    return stats;
}

GramScoreDetail gram_deviation_score_detail(const ClassStats& stats,
                                            const FeatureBundle& features,
                                            std::size_t layer) {
    if (!stats.has_gram()) throw ConfigError("gram_deviation_score: statistics not fitted");
    check_layer_access(stats, features, layer, "gram_deviation_score");
    if (!features.predicted_class) {
        throw ConfigError("gram_deviation_score: predicted_class is required");
    }
    const int ci = stats.class_index(*features.predicted_class);
    if (ci < 0) {
        throw ConfigError("gram_deviation_score: unknown class " +
                          std::to_string(*features.predicted_class));
    }

    const auto& lg = stats.grams[layer];
    const auto& mins = lg.min_by_class[static_cast<std::size_t>(ci)];
    const auto& maxs = lg.max_by_class[static_cast<std::size_t>(ci)];

    GramScoreDetail detail;
    double total = 0.0;
    for (int p = 1; p <= stats.gram_powers; ++p) {
        const Eigen::VectorXd flat = gram_upper(features.layers[layer], p);
        for (Eigen::Index j = 0; j < flat.size(); ++j) {
            const double v = flat[j];
            const double lo = mins(p - 1, j);
            const double hi = maxs(p - 1, j);
            if (v < lo) {
                const double denom = std::fabs(lo);
                if (denom == 0.0) {
                    total += lo - v;
                    ++detail.unnormalized_terms;
                } else {
                    total += (lo - v) / denom;
                }
            } else if (v > hi) {
                const double denom = std::fabs(hi);
                if (denom == 0.0) {
                    total += v - hi;
                    ++detail.unnormalized_terms;
                } else {
                    total += (v - hi) / denom;
                }
            }
        }
    }
    detail.score = total / lg.normalizer;
    return detail;
}

double gram_deviation_score(const ClassStats& stats, const FeatureBundle& features,
                            std::size_t layer) {
    return gram_deviation_score_detail(stats, features, layer).score;
}

double energy_score(const std::vector<double>& softmax_inputs, const EnergyConfig& cfg) {
    if (softmax_inputs.empty()) throw ConfigError("energy_score: empty input vector");
    if (!(cfg.temperature > 0.0)) throw ConfigError("energy_score: temperature must be > 0");
    const double t = cfg.temperature;
    const double m = *std::max_element(softmax_inputs.begin(), softmax_inputs.end());
    double sum = 0.0;
    for (double s : softmax_inputs) sum += std::exp((s - m) / t);
    return -t * std::log(sum) - m;
}

std::vector<ScoreSpec> score_registry(std::size_t n_layers, bool with_mahalanobis,
                                      bool with_gram, bool with_energy) {
    std::vector<ScoreSpec> specs;
    if (with_mahalanobis) {
        for (std::size_t i = 0; i < n_layers; ++i) {
            // Raw Mahalanobis is largest in-distribution; export the negation.
            specs.push_back({"mahala_L" + std::to_string(i + 1), true});
        }
    }
    if (with_gram) {
        for (std::size_t i = 0; i < n_layers; ++i) {
            specs.push_back({"gram_L" + std::to_string(i + 1), false});
        }
    }
    if (with_energy) {
        specs.push_back({"energy", false});
    }
    return specs;
}

ScoreMatrix build_score_matrix(const ClassStats& stats,
                               const std::vector<FeatureBundle>& bundles,
                               const EnergyConfig& energy_cfg) {
    if (bundles.empty()) throw ConfigError("build_score_matrix: no samples");
    const bool with_energy = bundles[0].softmax.has_value();
    for (std::size_t s = 0; s < bundles.size(); ++s) {
        if (bundles[s].softmax.has_value() != with_energy) {
            throw ConfigError("build_score_matrix: sample " + std::to_string(s) +
                              (with_energy ? " is missing the softmax vector"
                                           : " has a softmax vector while others do not"));
        }
    }
    const auto specs =
        score_registry(stats.n_layers(), stats.has_mahalanobis(), stats.has_gram(), with_energy);
    if (specs.empty()) {
        throw ConfigError("build_score_matrix: no fitted statistics and no softmax inputs");
    }

    ScoreMatrix m;
    m.rows = bundles.size();
    m.cols = specs.size();
    for (const auto& spec : specs) m.names.push_back(spec.name);
    m.data.resize(m.rows * m.cols);

    for (std::size_t s = 0; s < bundles.size(); ++s) {
        std::size_t c = 0;
        if (stats.has_mahalanobis()) {
            for (std::size_t li = 0; li < stats.n_layers(); ++li) {
                m.at(s, c++) = -mahalanobis_score(stats, bundles[s], li);
            }
        }
        if (stats.has_gram()) {
            for (std::size_t li = 0; li < stats.n_layers(); ++li) {
                m.at(s, c++) = gram_deviation_score(stats, bundles[s], li);
            }
        }
        if (with_energy) {
            m.at(s, c++) = energy_score(*bundles[s].softmax, energy_cfg);
        }
    }
    return m;
}

}  // namespace ood
