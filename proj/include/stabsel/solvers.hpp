#pragma once

#include "stabsel/data.hpp"
#include "stabsel/rng.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace stabsel {

// ---------------------------------------------------------------------------
// Lasso: argmin ||y - X b||^2 + lambda * sum |b_k|  (no 1/n, no 1/2)

struct LassoOptions {
    double tol = 1e-8;               // max coefficient change per sweep
    double kkt_tol = 1e-9;           // alternative stop: KKT violation below this
    long max_sweeps = 100000;
    bool center_response = true;     // fit y - mean(y); no intercept is penalized
};

/// 2 * max_k |X_k' y|: smallest lambda with an all-zero solution.
double lasso_lambda_max(const Dataset& data, bool center_response = true);

/// Warm-started cyclic coordinate descent over the grid. Throws NumericalError
/// carrying the grid index and the final KKT violation if a point fails to
/// converge.
CoefficientPath lasso_path(const Dataset& data, const LambdaGrid& grid, const LassoOptions& options = {});

/// Largest violation of the Lasso optimality conditions at `beta`:
/// |2 X_k'r| <= lambda off the support, 2 X_k'r = lambda sign(b_k) on it.
double lasso_kkt_violation(const Dataset& data, const Vector& beta, double lambda, bool center_response = true);

double lasso_objective(const Dataset& data, const Vector& beta, double lambda, bool center_response = true);

/// Per-variable penalty weights W_k in [alpha, 1].
struct WeightVector {
    Vector w;
    double alpha = 1.0;
    double p_w = 0.5;

    /// Two-point sampler: W_k = alpha with probability p_w, else 1.
    static WeightVector sample(Index p, double alpha, double p_w, Rng& rng);
    static WeightVector ones(Index p);
};

inline constexpr double kDefaultLassoWeakness = 0.5;
inline constexpr double kDefaultOmpWeakness = 0.9;
inline constexpr double kDefaultWeightProbability = 0.5;

/// Randomised Lasso: penalty lambda * sum |b_k| / W_k, solved by fitting the
/// plain Lasso on columns X_k W_k and reporting b_k = W_k * gamma_k.
CoefficientPath randomised_lasso_path(const Dataset& data, const LambdaGrid& grid, const WeightVector& weights,
                                      const LassoOptions& options = {});
CoefficientPath randomised_lasso_path(const Dataset& data, const LambdaGrid& grid, double alpha, double p_w,
                                      std::uint64_t seed, const LassoOptions& options = {});

// ---------------------------------------------------------------------------
// Orthogonal matching pursuit

/// Nested selections S^1 c S^2 c ... c S^q, stored as the order of entry.
struct OmpTrace {
    Index p = 0;
    std::vector<Index> order;
    /// residual_norms[0] is ||y||; residual_norms[m] follows step m.
    std::vector<double> residual_norms;
    /// Set when some step found no correlation left with the residual.
    bool degenerate = false;

    Index steps() const { return order.size(); }
    SelectionSet selected(Index step) const;
};

struct OmpOptions {
    bool center_response = true;
    double rank_tol = 1e-10;
};

/// Plain OMP; argmax ties go to the lowest index.
OmpTrace omp(const Dataset& data, Index steps, const OmpOptions& options = {});

/// Randomised OMP with weakness alpha in (0, 1]: each step draws uniformly from
/// {k : |X_k'R| >= alpha * max_j |X_j'R|}.
OmpTrace romp(const Dataset& data, Index steps, double alpha, std::uint64_t seed, const OmpOptions& options = {});

// ---------------------------------------------------------------------------
// Graphical Lasso: argmin -log det T + tr(S T) + lambda * sum_{j<k} |T_jk|

struct GlassoOptions {
    double tol = 1e-10;          // max change of the working covariance per sweep
    long max_sweeps = 10000;
    double inner_tol = 1e-12;
    long max_inner_sweeps = 100000;
};

struct PrecisionEstimate {
    Matrix theta;
    /// Working covariance; equals inverse(theta) at convergence.
    Matrix covariance;
    double lambda = 0.0;
    long sweeps = 0;
    /// Dual objective log det W + d after every sweep; non-decreasing and
    /// converging to the optimal penalized likelihood value.
    std::vector<double> dual_trace;

    Index dim() const { return static_cast<Index>(theta.rows()); }
    /// Off-diagonal support, pairs (j, k) with j < k.
    std::vector<std::pair<Index, Index>> edges() const;
    /// Support as a set over d(d-1)/2 edge slots, see edge_index().
    SelectionSet edge_set() const;
};

/// Position of edge (j, k), j < k, in row-major upper-triangle order.
Index edge_index(Index j, Index k, Index d);
std::pair<Index, Index> edge_at(Index slot, Index d);

PrecisionEstimate graphical_lasso(const Matrix& s, double lambda, const GlassoOptions& options = {});

double glasso_objective(const Matrix& s, const Matrix& theta, double lambda);

/// Largest violation of the stationarity conditions for the j<k penalty:
/// (T^-1)_jj = S_jj, |(T^-1)_jk - S_jk| <= lambda/2, equality with sign(T_jk)
/// on the support.
double glasso_kkt_violation(const Matrix& s, const PrecisionEstimate& estimate);

/// Sample covariance with divisor n of centered columns.
Matrix sample_covariance(const Matrix& x);
/// Sample correlation matrix of the columns.
Matrix sample_correlation(const Matrix& x);

}  // namespace stabsel
