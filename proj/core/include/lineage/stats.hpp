#pragma once

#include <optional>
#include <span>
#include <vector>

namespace lineage::analytics {

/// 1-based ranks; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks. Throws std::invalid_argument on a
/// length mismatch or fewer than 3 points; nullopt when either input is constant.
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

struct LowessOptions {
    /// Share of the points in each local fit, in (0, 1].
    double frac = 0.3;
    /// Bisquare re-weighting passes after the initial fit.
    int robust_iters = 2;
};

/// Locally weighted linear regression (tricube kernel over the frac * n
/// nearest neighbours) with robust re-weighting. Returns smoothed values in
/// input order; points sharing an x share a fitted value.
/// Throws std::invalid_argument for fewer than 5 points or bad options.
std::vector<double> lowess(std::span<const double> xs, std::span<const double> ys, const LowessOptions& options = {});

}  // namespace lineage::analytics
