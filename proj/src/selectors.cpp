#include "stabsel/selectors.hpp"

#include "stabsel/errors.hpp"

namespace stabsel {

Selector lasso_selector(LassoOptions options) {
    return [options](const Dataset& data, const LambdaGrid& grid, std::uint64_t) {
        return lasso_path(data, grid, options).supports();
    };
}

Selector randomised_lasso_selector(double alpha, double p_w, LassoOptions options) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("weakness alpha must lie in (0, 1]");
    return [=](const Dataset& data, const LambdaGrid& grid, std::uint64_t seed) {
        return randomised_lasso_path(data, grid, alpha, p_w, seed, options).supports();
    };
}

namespace {

std::vector<SelectionSet> nested_sets(const OmpTrace& trace, const LambdaGrid& grid) {
    std::vector<SelectionSet> out;
    out.reserve(grid.size());
    for (Index g = 0; g < grid.size(); ++g) out.push_back(trace.selected(g + 1));
    return out;
}

}  // namespace

Selector omp_selector(OmpOptions options) {
    return [options](const Dataset& data, const LambdaGrid& grid, std::uint64_t) {
        return nested_sets(omp(data, grid.size(), options), grid);
    };
}

Selector romp_selector(double alpha, OmpOptions options) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("ROMP weakness alpha must lie in (0, 1]");
    return [=](const Dataset& data, const LambdaGrid& grid, std::uint64_t seed) {
        return nested_sets(romp(data, grid.size(), alpha, seed, options), grid);
    };
}

void KktMonitor::record(double v) {
    ++fits;
    double cur = worst.load();
    while (v > cur && !worst.compare_exchange_weak(cur, v)) {
    }
}

Selector glasso_selector(GlassoOptions options, std::shared_ptr<KktMonitor> monitor) {
    return [options, monitor](const Dataset& data, const LambdaGrid& grid, std::uint64_t) {
        const Matrix s = sample_correlation(data.x());
        std::vector<SelectionSet> out;
        out.reserve(grid.size());
        for (Index g = 0; g < grid.size(); ++g) {
            const PrecisionEstimate est = graphical_lasso(s, grid[g], options);
            if (monitor) monitor->record(glasso_kkt_violation(s, est));
            out.push_back(est.edge_set());
        }
        return out;
    };
}

Selector constant_selector(SelectionSet set) {
    return [set = std::move(set)](const Dataset&, const LambdaGrid& grid, std::uint64_t) {
        return std::vector<SelectionSet>(grid.size(), set);
    };
}

}  // namespace stabsel
