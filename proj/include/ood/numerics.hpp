#pragma once

namespace ood {

// Integer shape parameters of a Beta distribution. Degenerate shapes
// (a < 1 or b < 1) are rejected at construction; callers that can produce
// a = 0 (the calibration solvers, via the floor) must treat that case as
// "condition fails" before building the parameters.
struct BetaParams {
    long long a;
    long long b;

    BetaParams(long long a_, long long b_);
};

// Regularized incomplete beta function I_x(a, b), the CDF of Beta(a, b) at x.
// Evaluated by the continued-fraction expansion with the symmetry switch at
// x > (a+1)/(a+b+2) so both tails converge quickly.
// Throws ConfigError for x outside [0, 1].
double reg_inc_beta(double x, const BetaParams& p);

// Standard normal survival function P(Z >= z).
double normal_sf(double z);

// Inverse of normal_sf on (0, 1): returns z with normal_sf(z) = q.
// Throws ConfigError for q outside the open interval.
double normal_sf_inv(double q);

}  // namespace ood
