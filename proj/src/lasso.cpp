#include "stabsel/errors.hpp"
#include "stabsel/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stabsel {

namespace {

Vector working_response(const Dataset& data, bool center) {
    Vector y = data.y();
    if (center) y.array() -= y.mean();
    return y;
}

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

class CoordinateDescent {
public:
    CoordinateDescent(const Matrix& x, const Vector& y, const LassoOptions& options)
        : x_(x), y_(y), options_(options), beta_(Vector::Zero(x.cols())), resid_(y), col_sq_(x.colwise().squaredNorm()) {
        all_.resize(static_cast<std::size_t>(x.cols()));
        for (Eigen::Index k = 0; k < x.cols(); ++k) all_[static_cast<std::size_t>(k)] = k;
    }

    // Returns false on hitting the sweep cap. Stops when a sweep moves no
    // coefficient by tol or more, or when the KKT violation drops below
    // kkt_tol (ill-conditioned active sets can creep far longer than that).
    bool solve(double lambda) {
        const double half = 0.5 * lambda;
        long sweeps = 0;
        while (sweeps < options_.max_sweeps) {
            double change = 0.0;
            for (Eigen::Index k = 0; k < x_.cols(); ++k) change = std::max(change, update(k, half));
            ++sweeps;
            if (change < options_.tol) return true;

            active_.clear();
            for (Eigen::Index k = 0; k < x_.cols(); ++k)
                if (beta_(k) != 0.0) active_.push_back(k);
            if (kkt(all_, lambda) < options_.kkt_tol) return true;
            long inner = 0;
            while (sweeps < options_.max_sweeps) {
                change = 0.0;
                for (Eigen::Index k : active_) change = std::max(change, update(k, half));
                ++sweeps;
                if (change < options_.tol) break;
                if (++inner % kPolishEvery == 0) {
                    if (kkt(active_, lambda) < options_.kkt_tol) break;
                    polish(half);
                    active_.clear();
                    for (Eigen::Index k = 0; k < x_.cols(); ++k)
                        if (beta_(k) != 0.0) active_.push_back(k);
                }
            }
        }
        return false;
    }

    const Vector& beta() const { return beta_; }

private:
    static constexpr long kPolishEvery = 32;

    // Exact minimization restricted to the current active set and sign
    // pattern. Coordinate descent crawls when X_A is ill-conditioned or has
    // more columns than its rank; here null-space moves first drop redundant
    // coefficients (objective non-increasing, fit unchanged), then a Newton
    // step solves the sign-constrained quadratic, stopping at the first
    // coefficient that would cross zero.
    void polish(double half) {
        for (Eigen::Index iter = 0; iter <= x_.cols(); ++iter) {
            std::vector<Eigen::Index> act;
            for (Eigen::Index k = 0; k < x_.cols(); ++k)
                if (beta_(k) != 0.0) act.push_back(k);
            if (act.empty()) return;
            const auto m = static_cast<Eigen::Index>(act.size());
            Matrix xa(x_.rows(), m);
            Vector b(m), sgn(m);
            for (Eigen::Index j = 0; j < m; ++j) {
                xa.col(j) = x_.col(act[static_cast<std::size_t>(j)]);
                b(j) = beta_(act[static_cast<std::size_t>(j)]);
                sgn(j) = b(j) > 0 ? 1.0 : -1.0;
            }
            Eigen::ColPivHouseholderQR<Matrix> qr(xa);
            qr.setThreshold(1e-10);
            const Eigen::Index rank = qr.rank();

            Vector target;
            if (rank < m) {
                // X_A P = Q [R11 R12]: columns P [-R11^-1 R12; I] span the null space
                const Matrix r = qr.matrixR().topRows(rank).template triangularView<Eigen::Upper>();
                Matrix null(m, m - rank);
                null.topRows(rank) = -r.leftCols(rank).template triangularView<Eigen::Upper>().solve(r.rightCols(m - rank));
                null.bottomRows(m - rank).setIdentity();
                null = qr.colsPermutation() * null;
                Vector z = -(null.transpose() * sgn);
                if (z.norm() < 1e-12) z = Vector::Unit(m - rank, 0);
                target = b + null * z;  // direction only; step is set by the first zero crossing
                if (!step_toward(act, b, target, /*full_step_allowed=*/false)) return;
            } else {
                // X_A'(y - X_A b) = half * sgn through the QR factors, avoiding the
                // squared conditioning of the Gram matrix
                const auto r = qr.matrixR().topLeftCorner(m, m).template triangularView<Eigen::Upper>();
                const Vector qty = (qr.householderQ().transpose() * y_).head(m);
                const Vector u = r.transpose().solve(qr.colsPermutation().transpose() * sgn);
                target = qr.colsPermutation() * Vector(r.solve(qty - half * u));
                if (step_toward(act, b, target, /*full_step_allowed=*/true)) return;
            }
        }
    }

    // Moves the active coefficients from b towards target. Returns true if the
    // full step was taken; otherwise stops where the first coefficient reaches
    // zero and zeroes it. Returns false if no coefficient can be zeroed.
    bool step_toward(const std::vector<Eigen::Index>& act, const Vector& b, const Vector& target, bool full_step_allowed) {
        const Vector d = target - b;
        double t = full_step_allowed ? 1.0 : std::numeric_limits<double>::infinity();
        Eigen::Index hit = -1;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            if (d(j) == 0.0 || (b(j) > 0) == (d(j) > 0)) continue;
            const double tj = -b(j) / d(j);
            if (tj < t) {
                t = tj;
                hit = j;
            }
        }
        if (hit < 0 && !full_step_allowed) return false;
        for (Eigen::Index j = 0; j < b.size(); ++j) beta_(act[static_cast<std::size_t>(j)]) = b(j) + t * d(j);
        if (hit >= 0) beta_(act[static_cast<std::size_t>(hit)]) = 0.0;
        resid_ = y_ - x_ * beta_;
        return hit < 0;
    }

    double kkt(const std::vector<Eigen::Index>& coords, double lambda) const {
        double worst = 0.0;
        for (Eigen::Index k : coords) {
            const double grad = 2.0 * x_.col(k).dot(resid_);
            const double b = beta_(k);
            worst = std::max(worst, b == 0.0 ? std::abs(grad) - lambda : std::abs(grad - (b > 0 ? lambda : -lambda)));
        }
        return worst;
    }

    double update(Eigen::Index k, double half) {
        const double c = col_sq_(k);
        if (c <= 0.0) return 0.0;
        const double old = beta_(k);
        const double z = x_.col(k).dot(resid_) + c * old;
        const double next = soft_threshold(z, half) / c;
        if (next == old) return 0.0;
        resid_.noalias() -= (next - old) * x_.col(k);
        beta_(k) = next;
        return std::abs(next - old);
    }

    const Matrix& x_;
    const Vector& y_;
    LassoOptions options_;
    Vector beta_;
    Vector resid_;
    Vector col_sq_;
    std::vector<Eigen::Index> active_;
    std::vector<Eigen::Index> all_;
};

double kkt_violation(const Matrix& x, const Vector& y, const Vector& beta, double lambda) {
    const Vector grad = 2.0 * (x.transpose() * (y - x * beta));
    double worst = 0.0;
    for (Eigen::Index k = 0; k < grad.size(); ++k) {
        const double v = beta(k) == 0.0 ? std::max(0.0, std::abs(grad(k)) - lambda)
                                        : std::abs(grad(k) - lambda * (beta(k) > 0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

CoefficientPath fit_path(const Matrix& x, const Vector& y, const LambdaGrid& grid, const LassoOptions& options) {
    CoordinateDescent cd(x, y, options);
    Matrix coef = Matrix::Zero(x.cols(), static_cast<Eigen::Index>(grid.size()));
    // zero is exact down to lambda_max; skip the solver there so rounding in
    // the coordinate updates cannot leave a 1e-16 coefficient behind
    const double lambda_max = 2.0 * (x.transpose() * y).cwiseAbs().maxCoeff();
    for (Index g = 0; g < grid.size(); ++g) {
        if (grid[g] >= lambda_max) continue;
        if (!cd.solve(grid[g])) {
            const double gap = kkt_violation(x, y, cd.beta(), grid[g]);
            std::ostringstream msg;
            msg << "lasso did not converge at grid index " << g << " (lambda " << grid[g] << ") within "
                << options.max_sweeps << " sweeps; KKT violation " << gap << ", " << (cd.beta().array() != 0.0).count()
                << " active";
            throw NumericalError(msg.str());
        }
        coef.col(static_cast<Eigen::Index>(g)) = cd.beta();
    }
    return CoefficientPath{std::move(coef), grid};
}

}  // namespace

double lasso_lambda_max(const Dataset& data, bool center_response) {
    const Vector y = working_response(data, center_response);
    return 2.0 * (data.x().transpose() * y).cwiseAbs().maxCoeff();
}

CoefficientPath lasso_path(const Dataset& data, const LambdaGrid& grid, const LassoOptions& options) {
    return fit_path(data.x(), working_response(data, options.center_response), grid, options);
}

double lasso_kkt_violation(const Dataset& data, const Vector& beta, double lambda, bool center_response) {
    return kkt_violation(data.x(), working_response(data, center_response), beta, lambda);
}

double lasso_objective(const Dataset& data, const Vector& beta, double lambda, bool center_response) {
    const Vector r = working_response(data, center_response) - data.x() * beta;
    return r.squaredNorm() + lambda * beta.lpNorm<1>();
}

WeightVector WeightVector::sample(Index p, double alpha, double p_w, Rng& rng) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("weakness alpha must lie in (0, 1]");
    if (!(p_w > 0.0 && p_w < 1.0)) throw ConfigError("weight probability p_w must lie in (0, 1)");
    WeightVector out{Vector::Ones(static_cast<Eigen::Index>(p)), alpha, p_w};
    std::bernoulli_distribution low(p_w);
    for (Index k = 0; k < p; ++k)
        if (low(rng)) out.w(static_cast<Eigen::Index>(k)) = alpha;
    return out;
}

WeightVector WeightVector::ones(Index p) { return WeightVector{Vector::Ones(static_cast<Eigen::Index>(p)), 1.0, 0.5}; }

CoefficientPath randomised_lasso_path(const Dataset& data, const LambdaGrid& grid, const WeightVector& weights,
                                      const LassoOptions& options) {
    if (weights.w.size() != static_cast<Eigen::Index>(data.p())) throw ConfigError("weight vector has wrong length");
    const Matrix xw = data.x() * weights.w.asDiagonal();
    CoefficientPath path = fit_path(xw, working_response(data, options.center_response), grid, options);
    path.coef = weights.w.asDiagonal() * path.coef;
    return path;
}

CoefficientPath randomised_lasso_path(const Dataset& data, const LambdaGrid& grid, double alpha, double p_w,
                                      std::uint64_t seed, const LassoOptions& options) {
    Rng rng = make_rng(seed);
    return randomised_lasso_path(data, grid, WeightVector::sample(data.p(), alpha, p_w, rng), options);
}

}  // namespace stabsel
