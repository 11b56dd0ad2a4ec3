#include "stabsel/diagnostics.hpp"

#include "stabsel/errors.hpp"
#include "stabsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stabsel {

namespace {

// Statistics at or above one are violations; the slack absorbs rounding when
// the design sits exactly on the boundary.
constexpr double kBoundarySlack = 1e-12;

void check_support(const Matrix& x, const std::vector<Index>& support) {
    if (support.empty()) throw ConfigError("support must not be empty");
    std::vector<Index> sorted = support;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("support has duplicates");
    if (sorted.back() >= static_cast<Index>(x.cols()))
        throw ConfigError("support index " + std::to_string(sorted.back() + 1) + " exceeds p = " + std::to_string(x.cols()));
}

Matrix columns(const Matrix& x, const std::vector<Index>& idx) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (Index j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(idx[j]));
    return out;
}

// (X_S'X_S)^-1 X_S'X for all columns; throws on a singular Gram matrix.
Matrix projection_coefficients(const Matrix& x, const std::vector<Index>& support) {
    check_support(x, support);
    const Matrix xs = columns(x, support);
    Eigen::ColPivHouseholderQR<Matrix> qr(xs);
    qr.setThreshold(1e-10);
    if (qr.rank() < xs.cols()) throw NumericalError("X_S'X_S is singular: support columns are linearly dependent");
    const Matrix gram = xs.transpose() * xs;
    return gram.ldlt().solve(xs.transpose() * x);
}

std::vector<Index> complement(Index p, const std::vector<Index>& support) {
    std::vector<bool> in(p, false);
    for (Index k : support) in[k] = true;
    std::vector<Index> out;
    for (Index k = 0; k < p; ++k)
        if (!in[k]) out.push_back(k);
    return out;
}

}  // namespace

IrrepresentableResult irrepresentable(const Matrix& x, const std::vector<Index>& support,
                                      const std::optional<std::vector<int>>& signs) {
    const Matrix coef = projection_coefficients(x, support);
    Vector sign_vec;
    if (signs) {
        if (signs->size() != support.size()) throw ConfigError("need one sign per support member");
        sign_vec.resize(static_cast<Eigen::Index>(signs->size()));
        for (Index j = 0; j < signs->size(); ++j) {
            if ((*signs)[j] != 1 && (*signs)[j] != -1) throw ConfigError("signs must be +1 or -1");
            sign_vec(static_cast<Eigen::Index>(j)) = (*signs)[j];
        }
    }

    IrrepresentableResult out;
    out.per_variable.assign(static_cast<Index>(x.cols()), 0.0);
    for (Index k : complement(static_cast<Index>(x.cols()), support)) {
        const auto c = coef.col(static_cast<Eigen::Index>(k));
        // max over sign patterns of |s'c| is ||c||_1
        const double stat = signs ? std::abs(sign_vec.dot(c)) : c.lpNorm<1>();
        out.per_variable[k] = stat;
        out.value = std::max(out.value, stat);
        if (stat >= 1.0 - kBoundarySlack) out.violating.push_back(k);
    }
    return out;
}

double exact_recovery(const Matrix& x, const std::vector<Index>& support) {
    const Matrix coef = projection_coefficients(x, support);
    double worst = 0.0;
    for (Index k : complement(static_cast<Index>(x.cols()), support))
        worst = std::max(worst, coef.col(static_cast<Eigen::Index>(k)).lpNorm<1>());
    return worst;
}

std::uint64_t subset_count(Index p, Index m) {
    constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t total = 0;
    long double binom = 1.0L;
    for (Index j = 1; j <= std::min(m, p); ++j) {
        binom = binom * static_cast<long double>(p - j + 1) / static_cast<long double>(j);
        if (binom + static_cast<long double>(total) >= static_cast<long double>(cap)) return cap;
        total += static_cast<std::uint64_t>(std::llround(binom));
    }
    return total;
}

namespace {

std::pair<double, double> extreme_singular_values(const Matrix& xk) {
    Eigen::JacobiSVD<Matrix> svd(xk);
    const Vector& sv = svd.singularValues();
    // a subset with more columns than rows has a null direction
    const double smallest = xk.cols() > xk.rows() ? 0.0 : sv(sv.size() - 1);
    return {smallest, sv(0)};
}

Index ceil_size(double k, Index p) {
    if (!(k > 0.0)) throw ConfigError("sparse eigenvalue size must be positive");
    const double c = std::ceil(k - 1e-12);
    if (c > static_cast<double>(p))
        throw ConfigError("sparse eigenvalue size ceil(k) = " + std::to_string(static_cast<long long>(c)) +
                          " exceeds p = " + std::to_string(p));
    return static_cast<Index>(c);
}

SparseEigenvalues enumerate(const Matrix& x, Index m) {
    const Index p = static_cast<Index>(x.cols());
    SparseEigenvalues out{std::numeric_limits<double>::infinity(), 0.0, m, true};
    std::vector<Index> combo;
    for (Index size = 1; size <= m; ++size) {
        combo.resize(size);
        for (Index j = 0; j < size; ++j) combo[j] = j;
        while (true) {
            const auto [lo, hi] = extreme_singular_values(columns(x, combo));
            out.phi_min = std::min(out.phi_min, lo);
            out.phi_max = std::max(out.phi_max, hi);
            // next combination in lexicographic order
            Index i = size;
            while (i > 0 && combo[i - 1] == p - size + i - 1) --i;
            if (i == 0) break;
            ++combo[i - 1];
            for (Index j = i; j < size; ++j) combo[j] = combo[j - 1] + 1;
        }
    }
    return out;
}

SparseEigenvalues greedy(const Matrix& x, Index m) {
    const Index p = static_cast<Index>(x.cols());
    SparseEigenvalues out{std::numeric_limits<double>::infinity(), 0.0, m, false};
    for (int side = 0; side < 2; ++side) {
        const bool minimise = side == 0;
        std::vector<Index> chosen;
        std::vector<bool> used(p, false);
        for (Index size = 1; size <= m; ++size) {
            double best = minimise ? std::numeric_limits<double>::infinity() : -1.0;
            Index best_k = p;
            for (Index k = 0; k < p; ++k) {
                if (used[k]) continue;
                chosen.push_back(k);
                const auto [lo, hi] = extreme_singular_values(columns(x, chosen));
                chosen.pop_back();
                const double v = minimise ? lo : hi;
                if (minimise ? v < best : v > best) {
                    best = v;
                    best_k = k;
                }
            }
            used[best_k] = true;
            chosen.push_back(best_k);
            if (minimise)
                out.phi_min = std::min(out.phi_min, best);
            else
                out.phi_max = std::max(out.phi_max, best);
        }
    }
    return out;
}

}  // namespace

SparseEigenvalues sparse_eigenvalues(const Matrix& x, double k, EigenMode mode) {
    const Index p = static_cast<Index>(x.cols());
    const Index m = ceil_size(k, p);
    if (mode == EigenMode::greedy) return greedy(x, m);
    const std::uint64_t subsets = subset_count(p, m);
    if (subsets > kMaxEnumeratedSubsets)
        throw ConfigError("exact sparse eigenvalues would enumerate " + std::to_string(subsets) + " subsets (limit " +
                          std::to_string(kMaxEnumeratedSubsets) +
                          "); use the greedy mode, which gives non-exact bounds");
    return enumerate(x, m);
}

AssumptionCheck check_assumption_sparse(const Matrix& x, Index s, double C, double kappa, EigenMode mode) {
    if (!(C > 1.0)) throw ConfigError("assumption constant C must exceed 1");
    if (!(kappa >= 9.0)) throw ConfigError("assumption constant kappa must be at least 9");
    if (s < 1) throw ConfigError("sparsity s must be at least 1");
    AssumptionCheck out;
    out.s = s;
    out.C = C;
    out.kappa = kappa;
    out.m = C * static_cast<double>(s) * static_cast<double>(s);
    const SparseEigenvalues phi = sparse_eigenvalues(x, out.m, mode);
    out.exact = phi.exact;
    // a rank-deficient subset shows up as rounding noise, not an exact zero
    const bool singular = !(phi.phi_min > 1e-12 * std::max(1.0, phi.phi_max));
    out.lhs = singular ? std::numeric_limits<double>::infinity() : phi.phi_max / std::pow(phi.phi_min, 1.5);
    out.rhs = std::sqrt(C) / kappa;
    out.satisfied = out.lhs < out.rhs;
    return out;
}

MaxCorrelation max_correlation(const Matrix& x, std::uint64_t seed) {
    const Index p = static_cast<Index>(x.cols());
    if (p < 2) throw ConfigError("max correlation needs at least 2 variables");
    const Vector norms = x.colwise().norm();
    for (Index k = 0; k < p; ++k)
        if (!(norms(static_cast<Eigen::Index>(k)) > 0.0)) throw DataError("column " + std::to_string(k + 1) + " is zero");
    Matrix cor = x.transpose() * x;
    cor = norms.cwiseInverse().asDiagonal() * cor * norms.cwiseInverse().asDiagonal();

    Rng rng = make_rng(seed);
    std::uniform_int_distribution<Index> pick(0, p - 1);
    MaxCorrelation out;
    out.column = pick(rng);
    for (Index j = 0; j < p; ++j)
        for (Index k = 0; k < p; ++k) {
            if (j == k) continue;
            const double c = std::min(1.0, std::abs(cor(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k))));
            out.global = std::max(out.global, c);
            if (j == out.column) out.value = std::max(out.value, c);
        }
    return out;
}

ConditionReport condition_report(const Matrix& x, const std::vector<Index>& support,
                                 const std::optional<std::vector<int>>& signs, const std::vector<double>& eigen_sizes,
                                 std::uint64_t seed, EigenMode mode) {
    ConditionReport out;
    const auto irc = irrepresentable(x, support, signs);
    out.irc_value = irc.value;
    out.irc_violation_count = irc.violating.size();
    out.erc_value = exact_recovery(x, support);
    const auto mc = max_correlation(x, seed);
    out.max_cor = mc.value;
    out.max_cor_global = mc.global;
    for (double k : eigen_sizes) out.sparse.emplace_back(k, sparse_eigenvalues(x, k, mode));
    return out;
}

std::string to_text(const ConditionReport& report) {
    std::ostringstream out;
    out.precision(15);
    out << "irc_value = " << report.irc_value << '\n'
        << "irc_violation_count = " << report.irc_violation_count << '\n'
        << "erc_value = " << report.erc_value << '\n'
        << "max_cor = " << report.max_cor << '\n'
        << "max_cor_global = " << report.max_cor_global << '\n';
    for (const auto& [k, phi] : report.sparse) {
        out << "phi_min[" << k << "] = " << phi.phi_min << '\n'
            << "phi_max[" << k << "] = " << phi.phi_max << '\n'
            << "phi_exact[" << k << "] = " << (phi.exact ? "true" : "false") << '\n';
    }
    return out.str();
}

}  // namespace stabsel
