#include "ood/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ood/error.hpp"

namespace ood {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

double parse_double(const std::string& cell, const std::string& path, std::size_t line_no,
                    const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || cell.empty()) {
        throw IoError(path + ":" + std::to_string(line_no) + ": cannot parse '" + cell +
                      "' in column '" + column + "' as a number");
    }
    return value;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

void check_schema_version(const Json& j, int expected, const std::string& path) {
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
        throw IoError(path + ": missing schema_version");
    }
    const int got = j["schema_version"].get<int>();
    if (got != expected) {
        throw IoError(path + ": schema version " + std::to_string(got) + ", expected " +
                      std::to_string(expected));
    }
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string checksum_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw IoError(path + ": malformed matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols) {
            throw IoError(path + ": ragged matrix");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

}  // namespace

ScoreMatrix read_score_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.empty() || header[0].empty()) {
        throw IoError(path + ":1: empty header");
    }

    ScoreMatrix m;
    bool has_ids = header[0] == "sample_id";
    m.names.assign(header.begin() + (has_ids ? 1 : 0), header.end());
    if (m.names.empty()) throw IoError(path + ":1: no score columns");
    std::set<std::string> seen;
    for (const auto& name : m.names) {
        if (name.empty()) throw IoError(path + ":1: empty column name");
        if (!seen.insert(name).second) {
            throw IoError(path + ":1: duplicate column name '" + name + "'");
        }
    }
    m.cols = m.names.size();

    const std::size_t expected_cells = m.cols + (has_ids ? 1 : 0);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() && in.peek() == EOF) break;  // trailing newline
        const auto cells = split_csv_line(line);
        if (cells.size() != expected_cells) {
            throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(expected_cells) + " cells, got " +
                          std::to_string(cells.size()));
        }
        std::size_t c0 = 0;
        if (has_ids) {
            m.ids.push_back(cells[0]);
            c0 = 1;
        }
        for (std::size_t c = c0; c < cells.size(); ++c) {
            const auto& name = m.names[c - c0];
            const double v = parse_double(cells[c], path, line_no, name);
            if (!std::isfinite(v)) {
                throw IoError(path + ":" + std::to_string(line_no) +
                              ": non-finite value in column '" + name + "'");
            }
            m.data.push_back(v);
        }
        ++m.rows;
    }
    if (m.rows == 0) throw IoError(path + ": no data rows");
    return m;
}

void write_score_matrix(const ScoreMatrix& m, const std::string& path) {
    if (m.names.size() != m.cols || m.data.size() != m.rows * m.cols) {
        throw ConfigError("write_score_matrix: inconsistent matrix");
    }
    if (!m.ids.empty() && m.ids.size() != m.rows) {
        throw ConfigError("write_score_matrix: ids must be empty or one per row");
    }
    std::ostringstream out;
    if (!m.ids.empty()) out << "sample_id,";
    for (std::size_t c = 0; c < m.cols; ++c) {
        out << m.names[c] << (c + 1 < m.cols ? "," : "\n");
    }
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (!m.ids.empty()) out << m.ids[r] << ",";
        for (std::size_t c = 0; c < m.cols; ++c) {
            out << format_double(m.at(r, c)) << (c + 1 < m.cols ? "," : "\n");
        }
    }
    write_text_file(path, out.str());
}

void write_results(const ResultSet& results, const std::string& path) {
    if (!results.sample_ids.empty() && results.sample_ids.size() != results.results.size()) {
        throw ConfigError("write_results: sample_ids must be empty or one per result");
    }
    Json j;
    j["schema_version"] = kResultsSchemaVersion;
    j["method"] = results.method;
    j["alpha"] = results.alpha;
    j["epsilon"] = results.epsilon;
    j["k"] = results.k;
    j["n_cal"] = results.n_cal;
    j["score_names"] = results.score_names;
    Json rows = Json::array();
    for (std::size_t i = 0; i < results.results.size(); ++i) {
        const auto& r = results.results[i];
        Json row;
        if (!results.sample_ids.empty()) row["sample_id"] = results.sample_ids[i];
        row["is_ood"] = r.is_ood;
        row["m"] = r.m;
        row["p_values"] = r.p_values;
        row["sorted_p_values"] = r.sorted_p_values;
        row["rejected_indices"] = r.rejected_indices;
        row["thresholds"] = r.thresholds;
        rows.push_back(std::move(row));
    }
    j["results"] = std::move(rows);
    write_text_file(path, j.dump(2) + "\n");
}

ResultSet read_results(const std::string& path) {
    const Json j = parse_json_file(path);
    check_schema_version(j, kResultsSchemaVersion, path);
    try {
        ResultSet set;
        set.method = j.at("method").get<std::string>();
        set.alpha = j.at("alpha").get<double>();
        set.epsilon = j.at("epsilon").get<double>();
        set.k = j.at("k").get<int>();
        set.n_cal = j.at("n_cal").get<long long>();
        set.score_names = j.at("score_names").get<std::vector<std::string>>();
        for (const auto& row : j.at("results")) {
            DetectionResult r;
            if (row.contains("sample_id")) {
                set.sample_ids.push_back(row["sample_id"].get<std::string>());
            }
            r.is_ood = row.at("is_ood").get<bool>();
            r.m = row.at("m").get<std::size_t>();
            r.p_values = row.at("p_values").get<std::vector<double>>();
            r.sorted_p_values = row.at("sorted_p_values").get<std::vector<double>>();
            r.rejected_indices = row.at("rejected_indices").get<std::vector<std::size_t>>();
            r.thresholds = row.at("thresholds").get<std::vector<double>>();
            set.results.push_back(std::move(r));
        }
        if (!set.sample_ids.empty() && set.sample_ids.size() != set.results.size()) {
            throw IoError(path + ": sample ids present for only some results");
        }
        return set;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

void save_class_stats(const ClassStats& stats, const std::string& path) {
    Json payload;
    payload["class_ids"] = stats.class_ids;
    Json shapes = Json::array();
    for (const auto& s : stats.layer_shapes) shapes.push_back({s[0], s[1]});
    payload["layer_shapes"] = std::move(shapes);
    payload["gram_powers"] = stats.gram_powers;
    payload["split_seed"] = stats.split_seed;

    if (stats.has_mahalanobis()) {
        Json layers = Json::array();
        for (const auto& g : stats.gaussians) {
            Json layer;
            layer["ridge"] = g.ridge;
            layer["class_means"] = matrix_to_json(g.class_means);
            layer["covariance"] = matrix_to_json(g.covariance);
            layers.push_back(std::move(layer));
        }
        payload["mahalanobis"] = std::move(layers);
    } else {
        payload["mahalanobis"] = nullptr;
    }

    if (stats.has_gram()) {
        Json layers = Json::array();
        for (const auto& lg : stats.grams) {
            Json layer;
            layer["normalizer"] = lg.normalizer;
            Json mins = Json::array();
            Json maxs = Json::array();
            for (std::size_t c = 0; c < lg.min_by_class.size(); ++c) {
                mins.push_back(matrix_to_json(lg.min_by_class[c]));
                maxs.push_back(matrix_to_json(lg.max_by_class[c]));
            }
            layer["min"] = std::move(mins);
            layer["max"] = std::move(maxs);
            layers.push_back(std::move(layer));
        }
        payload["gram"] = std::move(layers);
    } else {
        payload["gram"] = nullptr;
    }

    Json j;
    j["schema_version"] = kStatsSchemaVersion;
    j["checksum"] = checksum_hex(payload.dump());
    j["payload"] = std::move(payload);
    write_text_file(path, j.dump(2) + "\n");
}

ClassStats load_class_stats(const std::string& path) {
    const Json j = parse_json_file(path);
    check_schema_version(j, kStatsSchemaVersion, path);
    if (!j.contains("checksum") || !j.contains("payload")) {
        throw IoError(path + ": missing checksum or payload");
    }
    const Json& payload = j["payload"];
    if (j["checksum"].get<std::string>() != checksum_hex(payload.dump())) {
        throw IoError(path + ": checksum mismatch, file is corrupted");
    }

    try {
        ClassStats stats;
        stats.class_ids = payload.at("class_ids").get<std::vector<int>>();
        for (const auto& s : payload.at("layer_shapes")) {
            stats.layer_shapes.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
        }
        stats.gram_powers = payload.at("gram_powers").get<int>();
        stats.split_seed = payload.at("split_seed").get<std::uint64_t>();

        if (!payload.at("mahalanobis").is_null()) {
            for (const auto& layer : payload["mahalanobis"]) {
                LayerGaussian g;
                g.ridge = layer.at("ridge").get<double>();
                g.class_means = matrix_from_json(layer.at("class_means"), path);
                g.covariance = matrix_from_json(layer.at("covariance"), path);
                g.factor.compute(g.covariance);
                if (g.factor.info() != Eigen::Success) {
                    throw IoError(path + ": stored covariance is not positive definite");
                }
                stats.gaussians.push_back(std::move(g));
            }
            if (stats.gaussians.size() != stats.layer_shapes.size()) {
                throw IoError(path + ": mahalanobis layer count mismatch");
            }
        }

        if (!payload.at("gram").is_null()) {
            for (const auto& layer : payload["gram"]) {
                LayerGram lg;
                lg.normalizer = layer.at("normalizer").get<double>();
                for (const auto& m : layer.at("min")) {
                    lg.min_by_class.push_back(matrix_from_json(m, path));
                }
                for (const auto& m : layer.at("max")) {
                    lg.max_by_class.push_back(matrix_from_json(m, path));
                }
                stats.grams.push_back(std::move(lg));
            }
            if (stats.grams.size() != stats.layer_shapes.size()) {
                throw IoError(path + ": gram layer count mismatch");
            }
        }

        // Shape consistency between the declared layer shapes and the tables.
        for (std::size_t li = 0; li < stats.gaussians.size(); ++li) {
            const auto d = static_cast<Eigen::Index>(stats.layer_shapes[li][0] *
                                                     stats.layer_shapes[li][1]);
            if (stats.gaussians[li].class_means.cols() != d ||
                stats.gaussians[li].covariance.rows() != d) {
                throw IoError(path + ": layer " + std::to_string(li) +
                              " statistics do not match its shape");
            }
        }
        return stats;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

void validate_compatible(const ClassStats& stats, const FeatureBundle& bundle) {
    validate_bundle(bundle);
    if (bundle.layers.size() != stats.n_layers()) {
        throw ConfigError("features carry " + std::to_string(bundle.layers.size()) +
                          " layers, statistics expect " + std::to_string(stats.n_layers()));
    }
    for (std::size_t li = 0; li < bundle.layers.size(); ++li) {
        if (bundle.layers[li].rows != stats.layer_shapes[li][0] ||
            bundle.layers[li].cols != stats.layer_shapes[li][1]) {
            throw ConfigError("layer " + std::to_string(li) + " has shape " +
                              std::to_string(bundle.layers[li].rows) + "x" +
                              std::to_string(bundle.layers[li].cols) + ", statistics expect " +
                              std::to_string(stats.layer_shapes[li][0]) + "x" +
                              std::to_string(stats.layer_shapes[li][1]));
        }
    }
}

std::vector<FeatureBundle> read_feature_bundles(const std::string& path) {
    const Json j = parse_json_file(path);
    check_schema_version(j, kFeaturesSchemaVersion, path);
    if (!j.contains("samples") || !j["samples"].is_array()) {
        throw IoError(path + ": missing samples array");
    }

    std::vector<FeatureBundle> bundles;
    std::size_t si = 0;
    try {
        for (const auto& sample : j["samples"]) {
            FeatureBundle b;
            for (const auto& layer : sample.at("layers")) {
                FeatureLayer l;
                const auto& shape = layer.at("shape");
                if (shape.size() != 2) {
                    throw IoError(path + ": sample " + std::to_string(si) +
                                  ": layer shape must be [rows, cols]");
                }
                l.rows = shape[0].get<std::size_t>();
                l.cols = shape[1].get<std::size_t>();
                l.data = layer.at("data").get<std::vector<double>>();
                if (l.data.size() != l.rows * l.cols) {
                    throw IoError(path + ": sample " + std::to_string(si) + ": layer " +
                                  std::to_string(b.layers.size()) + " has " +
                                  std::to_string(l.data.size()) + " values for shape " +
                                  std::to_string(l.rows) + "x" + std::to_string(l.cols));
                }
                b.layers.push_back(std::move(l));
            }
            if (sample.contains("label")) b.label = sample["label"].get<int>();
            if (sample.contains("predicted_class")) {
                b.predicted_class = sample["predicted_class"].get<int>();
            }
            if (sample.contains("softmax")) {
                b.softmax = sample["softmax"].get<std::vector<double>>();
            }
            try {
                validate_bundle(b);
            } catch (const ConfigError& e) {
                throw IoError(path + ": sample " + std::to_string(si) + ": " + e.what());
            }
            bundles.push_back(std::move(b));
            ++si;
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": sample " + std::to_string(si) + ": " + e.what());
    }
    return bundles;
}

void write_feature_bundles(const std::vector<FeatureBundle>& bundles,
                           const std::string& path) {
    Json j;
    j["schema_version"] = kFeaturesSchemaVersion;
    Json samples = Json::array();
    for (const auto& b : bundles) {
        Json sample;
        Json layers = Json::array();
        for (const auto& l : b.layers) {
            Json layer;
            layer["shape"] = {l.rows, l.cols};
            layer["data"] = l.data;
            layers.push_back(std::move(layer));
        }
        sample["layers"] = std::move(layers);
        if (b.label) sample["label"] = *b.label;
        if (b.predicted_class) sample["predicted_class"] = *b.predicted_class;
        if (b.softmax) sample["softmax"] = *b.softmax;
        samples.push_back(std::move(sample));
    }
    j["samples"] = std::move(samples);
    write_text_file(path, j.dump(2) + "\n");
}

RunConfig load_run_config(const std::string& path) {
    const Json j = parse_json_file(path);
    RunConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "alpha") {
                cfg.alpha = value.get<double>();
            } else if (key == "epsilon") {
                cfg.epsilon = value.get<double>();
            } else if (key == "delta") {
                cfg.delta = value.get<double>();
            } else if (key == "k") {
                cfg.k = value.get<int>();
            } else if (key == "method") {
                cfg.method = value.get<std::string>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "temperature") {
                cfg.temperature = value.get<double>();
            } else if (key == "powers") {
                cfg.powers = value.get<int>();
            } else if (key == "ridge") {
                cfg.ridge = value.get<double>();
            } else if (key == "scan_limit") {
                cfg.scan_limit = value.get<long long>();
            } else if (key == "workers") {
                cfg.workers = value.get<int>();
            } else if (key == "paths") {
                if (!value.is_object()) {
                    throw ConfigError(path + ": paths must be an object");
                }
                for (const auto& [name, p] : value.items()) {
                    static const std::set<std::string> known{"train", "cal",      "test",
                                                             "stats", "features", "out"};
                    if (!known.count(name)) {
                        throw ConfigError(path + ": unknown path name '" + name + "'");
                    }
                    cfg.paths[name] = p.get<std::string>();
                }
            } else {
                throw ConfigError(path + ": unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return cfg;
}

}  // namespace ood
