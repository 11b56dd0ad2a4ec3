#include "stabsel/errors.hpp"
#include "stabsel/solvers.hpp"

#include <cmath>
#include <sstream>

namespace stabsel {

Index edge_index(Index j, Index k, Index d) {
    if (j > k) std::swap(j, k);
    if (j == k || k >= d) throw ConfigError("invalid edge (" + std::to_string(j) + ", " + std::to_string(k) + ")");
    // rows 0..j-1 contribute (d-1) + (d-2) + ... + (d-j) slots
    return j * (2 * d - j - 1) / 2 + (k - j - 1);
}

std::pair<Index, Index> edge_at(Index slot, Index d) {
    Index j = 0;
    while (slot >= d - j - 1) {
        slot -= d - j - 1;
        ++j;
        if (j + 1 >= d) throw ConfigError("edge slot out of range");
    }
    return {j, j + 1 + slot};
}

std::vector<std::pair<Index, Index>> PrecisionEstimate::edges() const {
    std::vector<std::pair<Index, Index>> out;
    for (Index j = 0; j < dim(); ++j)
        for (Index k = j + 1; k < dim(); ++k)
            if (theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) != 0.0) out.emplace_back(j, k);
    return out;
}

SelectionSet PrecisionEstimate::edge_set() const {
    const Index d = dim();
    SelectionSet s(d * (d - 1) / 2);
    for (auto [j, k] : edges()) s.insert(edge_index(j, k, d));
    return s;
}

Matrix sample_covariance(const Matrix& x) {
    const Matrix centered = x.rowwise() - x.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(x.rows());
}

Matrix sample_correlation(const Matrix& x) {
    Matrix s = sample_covariance(x);
    const Vector sd = s.diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j)
        if (!(sd(j) > 0.0)) throw DataError("column " + std::to_string(j + 1) + " is constant");
    s = sd.cwiseInverse().asDiagonal() * s * sd.cwiseInverse().asDiagonal();
    s.diagonal().setOnes();
    return s;
}

double glasso_objective(const Matrix& s, const Matrix& theta, double lambda) {
    Eigen::LLT<Matrix> llt(theta);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    double penalty = 0.0;
    for (Eigen::Index j = 0; j < theta.rows(); ++j)
        for (Eigen::Index k = j + 1; k < theta.cols(); ++k) penalty += std::abs(theta(j, k));
    return -logdet + (s.cwiseProduct(theta)).sum() + lambda * penalty;
}

double glasso_kkt_violation(const Matrix& s, const PrecisionEstimate& estimate) {
    const Matrix sigma = estimate.theta.inverse();
    const double half = 0.5 * estimate.lambda;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < s.rows(); ++j) {
        worst = std::max(worst, std::abs(sigma(j, j) - s(j, j)));
        for (Eigen::Index k = j + 1; k < s.cols(); ++k) {
            const double diff = sigma(j, k) - s(j, k);
            const double t = estimate.theta(j, k);
            const double v = t == 0.0 ? std::max(0.0, std::abs(diff) - half) : std::abs(diff - half * (t > 0 ? 1.0 : -1.0));
            worst = std::max(worst, v);
        }
    }
    return worst;
}

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double log_det(const Matrix& w) {
    Eigen::LLT<Matrix> llt(w);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

// Block coordinate ascent on the working covariance W (one row/column at a
// time, each solving a box-constrained QP through its Lasso dual). The
// diagonal is unpenalized, so W_jj = S_jj throughout. With the penalty summed
// over j<k only, each off-diagonal entry carries weight lambda/2 in the
// symmetric formulation.
PrecisionEstimate graphical_lasso(const Matrix& s, double lambda, const GlassoOptions& options) {
    const Eigen::Index d = s.rows();
    if (d != s.cols() || d < 1) throw DataError("covariance matrix must be square");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("graphical lasso penalty must be >= 0");
    if (!s.allFinite()) throw DataError("covariance matrix has non-finite entries");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, s.cwiseAbs().maxCoeff()))
        throw DataError("covariance matrix is not symmetric");
    for (Eigen::Index j = 0; j < d; ++j)
        if (!(s(j, j) > 0.0)) throw DataError("covariance diagonal entry " + std::to_string(j + 1) + " is not positive");

    const double rho = 0.5 * lambda;
    Matrix w = s;
    Matrix beta = Matrix::Zero(d, d);  // column j: coefficients of row j regressed on the rest

    if (rho == 0.0) {
        Eigen::LLT<Matrix> llt(s);
        if (llt.info() != Eigen::Success || llt.matrixLLT().diagonal().minCoeff() <= 1e-12)
            throw NumericalError("unpenalized graphical lasso needs a positive definite covariance");
    }

    PrecisionEstimate out;
    out.lambda = lambda;
    out.dual_trace.push_back(log_det(w) + static_cast<double>(d));

    std::vector<Eigen::Index> others(static_cast<std::size_t>(d > 0 ? d - 1 : 0));
    bool converged = d == 1;
    long sweep = 0;
    while (!converged && sweep < options.max_sweeps) {
        ++sweep;
        double change = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            // inner Lasso: min 1/2 b'W11 b - s12'b + rho |b|_1, warm-started
            Vector b(d - 1), s12(d - 1);
            for (Eigen::Index a = 0, t = 0; a < d; ++a) {
                if (a == j) continue;
                others[static_cast<std::size_t>(t)] = a;
                b(t) = beta(a, j);
                s12(t) = s(a, j);
                ++t;
            }
            Vector wb(d - 1);  // W11 * b
            for (Eigen::Index t = 0; t < d - 1; ++t) {
                double acc = 0.0;
                for (Eigen::Index u = 0; u < d - 1; ++u) acc += w(others[t], others[u]) * b(u);
                wb(t) = acc;
            }
            long inner = 0;
            for (; inner < options.max_inner_sweeps; ++inner) {
                double delta = 0.0;
                for (Eigen::Index t = 0; t < d - 1; ++t) {
                    const Eigen::Index at = others[static_cast<std::size_t>(t)];
                    const double wtt = w(at, at);
                    const double old = b(t);
                    const double next = soft_threshold(s12(t) - (wb(t) - wtt * old), rho) / wtt;
                    if (next == old) continue;
                    const double diff = next - old;
                    for (Eigen::Index u = 0; u < d - 1; ++u) wb(u) += w(others[static_cast<std::size_t>(u)], at) * diff;
                    b(t) = next;
                    delta = std::max(delta, std::abs(diff));
                }
                if (delta < options.inner_tol) break;
            }
            if (inner == options.max_inner_sweeps)
                throw NumericalError("graphical lasso inner problem for row " + std::to_string(j + 1) + " did not converge");
            for (Eigen::Index t = 0; t < d - 1; ++t) {
                const Eigen::Index at = others[static_cast<std::size_t>(t)];
                change = std::max(change, std::abs(w(at, j) - wb(t)));
                w(at, j) = wb(t);
                w(j, at) = wb(t);
                beta(at, j) = b(t);
            }
        }
        out.dual_trace.push_back(log_det(w) + static_cast<double>(d));
        converged = change < options.tol;
    }
    out.sweeps = sweep;
    if (!converged) {
        std::ostringstream msg;
        msg << "graphical lasso did not converge within " << options.max_sweeps << " sweeps (lambda " << lambda << ")";
        throw NumericalError(msg.str());
    }

    // Recover the precision matrix from the row regressions.
    Matrix theta = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double quad = 0.0;
        for (Eigen::Index a = 0; a < d; ++a)
            if (a != j) quad += w(a, j) * beta(a, j);
        const double tjj = 1.0 / (w(j, j) - quad);
        theta(j, j) = tjj;
        for (Eigen::Index a = 0; a < d; ++a)
            if (a != j) theta(a, j) = -beta(a, j) * tjj;
    }
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = j + 1; k < d; ++k) {
            const double a = theta(j, k), b = theta(k, j);
            const double v = (a == 0.0 || b == 0.0) ? 0.0 : 0.5 * (a + b);
            theta(j, k) = v;
            theta(k, j) = v;
        }

    Eigen::SelfAdjointEigenSolver<Matrix> eig(theta, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0))
        throw NumericalError("graphical lasso estimate lost positive definiteness (lambda " + std::to_string(lambda) + ")");

    out.theta = std::move(theta);
    out.covariance = std::move(w);
    return out;
}

}  // namespace stabsel
