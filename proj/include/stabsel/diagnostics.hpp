#pragma once

#include "stabsel/data.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stabsel {

struct IrrepresentableResult {
    double value = 0.0;
    std::vector<Index> violating;          // noise variables with statistic >= 1
    std::vector<double> per_variable;      // statistic for every k (0 on the support)
};

/// max over k outside S of |sign_S' (X_S'X_S)^-1 X_S'X_k|.
///
/// Without `signs` the maximum over all sign patterns is reported, which is
/// the l1 norm of (X_S'X_S)^-1 X_S'X_k.
IrrepresentableResult irrepresentable(const Matrix& x, const std::vector<Index>& support,
                                      const std::optional<std::vector<int>>& signs = std::nullopt);

/// max over k outside S of ||(X_S'X_S)^-1 X_S'X_k||_1.
double exact_recovery(const Matrix& x, const std::vector<Index>& support);

enum class EigenMode { exact, greedy };

struct SparseEigenvalues {
    double phi_min = 0.0;
    double phi_max = 0.0;
    Index size = 0;     // ceil(k)
    bool exact = true;  // false for the greedy heuristic
};

inline constexpr std::uint64_t kMaxEnumeratedSubsets = 1'000'000;

/// Extreme values of ||X_K a|| / ||a|| over |K| <= ceil(k). Exact mode
/// enumerates subsets and refuses beyond kMaxEnumeratedSubsets; greedy mode
/// grows one subset per side and gives an upper bound on phi_min and a lower
/// bound on phi_max.
SparseEigenvalues sparse_eigenvalues(const Matrix& x, double k, EigenMode mode = EigenMode::exact);

/// Number of subsets with 1 <= |K| <= m out of p, saturating at UINT64_MAX.
std::uint64_t subset_count(Index p, Index m);

struct AssumptionCheck {
    Index s = 0;
    double C = 0.0;
    double kappa = 0.0;
    double m = 0.0;       // C s^2
    double lhs = 0.0;     // phi_max(m) / phi_min(m)^{3/2}, infinite when phi_min = 0
    double rhs = 0.0;     // sqrt(C) / kappa
    bool satisfied = false;
    bool exact = true;
};

AssumptionCheck check_assumption_sparse(const Matrix& x, Index s, double C, double kappa,
                                        EigenMode mode = EigenMode::exact);

struct MaxCorrelation {
    Index column = 0;         // the randomly chosen column
    double value = 0.0;       // max_{k != column} |X_column' X_k|
    double global = 0.0;      // max over all pairs
};

MaxCorrelation max_correlation(const Matrix& x, std::uint64_t seed);

/// Everything reported for one design and support.
struct ConditionReport {
    double irc_value = 0.0;
    Index irc_violation_count = 0;
    double erc_value = 0.0;
    double max_cor = 0.0;
    double max_cor_global = 0.0;
    std::vector<std::pair<double, SparseEigenvalues>> sparse;  // requested k, values
};

ConditionReport condition_report(const Matrix& x, const std::vector<Index>& support,
                                 const std::optional<std::vector<int>>& signs, const std::vector<double>& eigen_sizes,
                                 std::uint64_t seed, EigenMode mode = EigenMode::exact);

/// Flat "key = value" rendering used by the CLI.
std::string to_text(const ConditionReport& report);

}  // namespace stabsel
