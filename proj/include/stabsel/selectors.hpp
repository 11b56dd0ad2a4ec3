#pragma once

#include "stabsel/solvers.hpp"
#include "stabsel/stability.hpp"

#include <atomic>
#include <memory>

namespace stabsel {

/// Lasso supports along the grid.
Selector lasso_selector(LassoOptions options = {});

/// Randomised Lasso with a fresh weight draw per call (i.e. per resample).
Selector randomised_lasso_selector(double alpha, double p_w = kDefaultWeightProbability, LassoOptions options = {});

/// OMP on a step grid (LambdaGrid::steps): grid index g selects g+1 variables.
Selector omp_selector(OmpOptions options = {});
Selector romp_selector(double alpha, OmpOptions options = {});

/// Running maximum of the graphical-Lasso KKT violation over all fits made by
/// a selector; safe to update from parallel resamples.
struct KktMonitor {
    std::atomic<double> worst{0.0};
    std::atomic<long> fits{0};
    void record(double v);
};

/// Graphical Lasso on the sample correlation of each subsample; the selection
/// at grid point g is the estimated edge set over d(d-1)/2 slots. The dataset
/// passed in must carry the d variables as columns (no response needed).
Selector glasso_selector(GlassoOptions options = {}, std::shared_ptr<KktMonitor> monitor = nullptr);

/// Selector that ignores the data and returns `set` at every grid point.
Selector constant_selector(SelectionSet set);

}  // namespace stabsel
