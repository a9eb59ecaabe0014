#pragma once

#include <stdexcept>
#include <string>

namespace ood {

// Invalid parameters, malformed inputs, or violated preconditions.
// The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A calibration search or solver exhausted its budget without meeting the
// requested condition. Carries the best margin seen during the scan so
// callers can report how close the search got. CLI exit code 2.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what, double best_margin, long long best_n)
        : std::runtime_error(what), best_margin_(best_margin), best_n_(best_n) {}

    double best_margin() const noexcept { return best_margin_; }
    long long best_n() const noexcept { return best_n_; }

private:
    double best_margin_;
    long long best_n_;
};

// File and format failures: parse errors, checksum or schema mismatches.
// Messages carry the offending path and location. CLI exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ood
