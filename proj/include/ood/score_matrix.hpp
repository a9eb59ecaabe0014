#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ood {

// Dense n x K matrix of scores: rows are samples, columns are score
// functions. Row-major storage. Sample ids are optional and carried along
// only for reporting.
struct ScoreMatrix {
    std::vector<std::string> names;  // K unique column names
    std::vector<std::string> ids;    // empty, or one id per row
    std::vector<double> data;        // rows * cols, row-major
    std::size_t rows = 0;
    std::size_t cols = 0;

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }

    std::vector<double> row(std::size_t r) const {
        return {data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
    }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows);
        for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
        return out;
    }
};

}  // namespace ood
