#include "stabsel/errors.hpp"
#include "stabsel/solvers.hpp"

#include <cmath>
#include <optional>

namespace stabsel {

SelectionSet OmpTrace::selected(Index step) const {
    if (step > order.size()) throw ConfigError("OMP trace has only " + std::to_string(order.size()) + " steps");
    return SelectionSet(p, std::span<const Index>(order.data(), step));
}

namespace {

// Shared driver: `pick` chooses the next variable from the correlation vector,
// returning nullopt when the residual is orthogonal to every candidate.
template <class Pick>
OmpTrace pursue(const Dataset& data, Index steps, const OmpOptions& options, Pick&& pick) {
    if (steps > data.p() || steps + 1 > data.n())
        throw ConfigError("OMP steps must satisfy q <= min(n - 1, p); got q = " + std::to_string(steps));

    Vector y = data.y();
    if (options.center_response) y.array() -= y.mean();
    const Matrix& x = data.x();

    OmpTrace trace;
    trace.p = data.p();
    trace.residual_norms.push_back(y.norm());
    std::vector<bool> in_set(data.p(), false);
    Vector resid = y;

    for (Index m = 1; m <= steps; ++m) {
        const Vector corr = x.transpose() * resid;
        std::optional<Index> chosen = pick(corr, in_set);
        if (!chosen) {
            trace.degenerate = true;
            for (Index k = 0; k < data.p(); ++k)
                if (!in_set[k]) {
                    chosen = k;
                    break;
                }
        }
        in_set[*chosen] = true;
        trace.order.push_back(*chosen);

        Matrix xs(x.rows(), static_cast<Eigen::Index>(trace.order.size()));
        for (Index j = 0; j < trace.order.size(); ++j)
            xs.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(trace.order[j]));
        Eigen::ColPivHouseholderQR<Matrix> qr(xs);
        qr.setThreshold(options.rank_tol);
        if (qr.rank() < xs.cols())
            throw NumericalError("OMP step " + std::to_string(m) + ": selected columns are rank deficient (added " +
                                 data.names()[*chosen] + ")");
        resid = y - xs * qr.solve(y);
        trace.residual_norms.push_back(resid.norm());
    }
    return trace;
}

// Zero correlation relative to the response scale counts as orthogonal.
double orthogonality_floor(const Dataset& data) {
    return 1e-12 * std::max(1.0, data.y().norm());
}

}  // namespace

OmpTrace omp(const Dataset& data, Index steps, const OmpOptions& options) {
    const double floor = orthogonality_floor(data);
    return pursue(data, steps, options, [&](const Vector& corr, const std::vector<bool>& in_set) -> std::optional<Index> {
        std::optional<Index> best;
        double best_abs = floor;
        for (Index k = 0; k < in_set.size(); ++k) {
            if (in_set[k]) continue;
            const double a = std::abs(corr(static_cast<Eigen::Index>(k)));
            if (a > best_abs) {
                best_abs = a;
                best = k;
            }
        }
        return best;
    });
}

OmpTrace romp(const Dataset& data, Index steps, double alpha, std::uint64_t seed, const OmpOptions& options) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("ROMP weakness alpha must lie in (0, 1]");
    Rng rng = make_rng(seed);
    const double floor = orthogonality_floor(data);
    std::vector<Index> candidates;
    return pursue(data, steps, options, [&](const Vector& corr, const std::vector<bool>& in_set) -> std::optional<Index> {
        double rho_max = 0.0;
        for (Index k = 0; k < in_set.size(); ++k)
            if (!in_set[k]) rho_max = std::max(rho_max, std::abs(corr(static_cast<Eigen::Index>(k))));
        if (!(rho_max > floor)) return std::nullopt;
        candidates.clear();
        for (Index k = 0; k < in_set.size(); ++k)
            if (!in_set[k] && std::abs(corr(static_cast<Eigen::Index>(k))) >= alpha * rho_max) candidates.push_back(k);
        std::uniform_int_distribution<Index> draw(0, candidates.size() - 1);
        return candidates[draw(rng)];
    });
}

}  // namespace stabsel
