#pragma once

#include "stabsel/data.hpp"
#include "stabsel/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stabsel {

enum class DesignKind { independent, block, toeplitz, factor, two_correlated };

std::string to_string(DesignKind kind);
DesignKind design_kind_from_string(const std::string& name);

struct DesignSpec {
    DesignKind kind = DesignKind::independent;
    Index n = 100;
    Index p = 200;
    double rho = 0.0;       // toeplitz / two_correlated
    Index factors = 2;      // factor

    // block design: variables k, m with k = m (mod 10) share correlation 0.5
    static constexpr Index kBlockCount = 10;
    static constexpr double kBlockCorrelation = 0.5;

    void validate() const;
    /// Population covariance of one row (before column normalization).
    Matrix population_covariance() const;
};

/// Named presets: paper scale "A".."E" with "-n200"/"-n1000" variants, desk
/// scale "A-desk".."E-desk" (p = 200, n = 100), and "two-correlated".
DesignSpec design_preset(const std::string& name);
std::vector<std::string> design_preset_names();

/// Rows i.i.d. from the design's distribution, columns then scaled to unit norm.
Dataset gen_design(const DesignSpec& spec, Rng& rng);
/// Same rows without normalization.
Matrix gen_design_raw(const DesignSpec& spec, Rng& rng);

/// Design whose Gram matrix equals the population covariance exactly
/// (n = p, X = L' with LL' = Sigma); unit-norm columns when Sigma has unit diagonal.
Matrix population_design(const DesignSpec& spec);

enum class BetaDist { uniform01, std_normal };

struct SimTruth {
    Vector beta;
    std::vector<Index> support;   // sorted
    double sigma = 0.0;           // noise scale, eps_i ~ N(0, sigma^2 / n)
    double snr = 0.0;             // target ||X beta||^2 / sigma^2 (infinite = noiseless)
    double realized_snr = 0.0;    // ||X beta||^2 / ||eps||^2 * n / n, i.e. over the drawn noise
};

SimTruth gen_beta(Index p, Index s, BetaDist dist, Rng& rng);

/// y = X beta + eps with eps_i ~ N(0, sigma^2/n) and sigma^2 = ||X beta||^2 / snr.
/// snr = +infinity gives the noiseless response.
Dataset gen_response(const Dataset& design, SimTruth& truth, double snr, Rng& rng);

/// y = X beta + eps with eps_i ~ N(0, noise_sd^2), for a fixed noise scale.
Dataset gen_response_fixed_noise(const Dataset& design, const Vector& beta, double noise_sd, Rng& rng);

/// Rows i.i.d. N(0, theta^-1).
Dataset gen_ggm(const Matrix& theta, Index n, Rng& rng);

/// Banded precision: 1 on the diagonal, `value` on the first `band` off-diagonals.
Matrix banded_precision(Index d, Index band, double value);

enum class PermuteMode { per_column, shared_except_k };

/// per_column: every column gets its own row permutation (columns in `keep`
/// untouched). shared_except_k: one row permutation applied to all columns
/// outside `keep`.
Dataset permute_null(const Dataset& data, PermuteMode mode, const std::vector<Index>& keep, Rng& rng);

}  // namespace stabsel
