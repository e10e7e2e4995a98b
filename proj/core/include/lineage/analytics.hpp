#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lineage/disruption.hpp"
#include "lineage/graph.hpp"
#include "lineage/param_scale.hpp"
#include "lineage/stats.hpp"
#include "lineage/timestamp.hpp"

namespace lineage::analytics {

using disruption::MdiResult;
using disruption::MdiTable;

inline constexpr std::size_t kHistogramBins = 20;

/// Distribution of MDI values over one group of focal models.
struct MdiSummary {
    std::string scope;
    std::size_t n = 0;
    /// Rows with at least one subsequent model in the window (x + y + z > 0).
    std::size_t n_nonempty = 0;
    std::optional<double> mean;
    std::optional<double> median;
    std::optional<double> positive_fraction;
    /// Equal-width bins over [-1, 1]; the last bin is closed.
    std::array<std::size_t, kHistogramBins> histogram{};

    nlohmann::json to_json() const;
};

MdiSummary summarize(std::string scope, std::span<const MdiResult* const> rows);

/// Rows of `table` evaluated at `window_days`, eligible only.
std::vector<const MdiResult*> rows_at_window(const MdiTable& table, int window_days);

struct TrendPoint {
    double in_degree = 0.0;
    double smoothed_mdi = 0.0;
};

struct TrendOptions {
    LowessOptions lowess;
    /// Smooth against ln(in-degree) instead of the raw in-degree.
    bool log_x = false;
};

/// MDI against in-degree: Spearman rho plus a LOWESS curve (one point per
/// distinct in-degree, ascending) and where it first turns positive.
struct TrendFit {
    std::vector<TrendPoint> points;
    std::optional<double> spearman_rho;
    std::optional<double> zero_crossing;
    std::size_t n = 0;
    TrendOptions options;

    nlohmann::json to_json() const;
};

/// In-degree at which the curve first goes from <= 0 to > 0, linearly
/// interpolated between the two bracketing points. `points` must be ascending.
std::optional<double> zero_crossing(std::span<const TrendPoint> points);

/// Smoothed values are clamped into the [min, max] range of the input MDI.
TrendFit build_trend(const MdiTable& table, const graph::LineageGraph& graph, int window_days,
                     const TrendOptions& options = {});

struct GroupSummaries {
    /// small, medium, large, unknown
    std::vector<MdiSummary> by_scale;
    /// finetune, adapter, quantized, merge. A multi-parent focal contributes
    /// once to each relation type among its outgoing edges.
    std::vector<MdiSummary> by_relation;
    /// Focal ids holding more than one size token.
    std::size_t ambiguous_scale_ids = 0;

    nlohmann::json to_json() const;
};

GroupSummaries group_summaries(const MdiTable& table, const graph::LineageGraph& graph, int window_days);

struct MonthRow {
    YearMonth month;
    /// Every listed model created this month, eligible or not.
    std::size_t new_models = 0;
    /// Eligible focal models created this month.
    std::size_t eligible = 0;
    std::optional<double> positive_fraction;
};

struct PeriodRow {
    std::optional<Timestamp> start;
    std::optional<Timestamp> end;
    MdiSummary summary;
};

struct WindowRow {
    int window_days = 0;
    MdiSummary summary;
    std::size_t x_total = 0;
    std::size_t y_total = 0;
    std::size_t z_total = 0;
};

struct TemporalReport {
    std::vector<MonthRow> monthly;
    std::vector<PeriodRow> periods;
    std::vector<WindowRow> windows;

    nlohmann::json to_json() const;
};

/// 2023-03-01, 2024-04-01, 2025-04-01
std::vector<Timestamp> default_period_boundaries();

/// Monthly counts (UTC calendar months, contiguous from the first to the last
/// month with a listed model), half-open periods [b_k, b_k+1) around the
/// boundaries, and one summary per observation window in the table.
/// Throws std::invalid_argument when boundaries are not strictly ascending.
TemporalReport temporal_report(const MdiTable& table, const graph::LineageGraph& graph,
                               std::span<const Timestamp> period_boundaries, int main_window_days);

// CSV exports.
void write_summaries_csv(std::span<const MdiSummary> summaries, const std::filesystem::path& path);
void write_histograms_csv(std::span<const MdiSummary> summaries, const std::filesystem::path& path);
void write_trend_csv(const TrendFit& trend, const std::filesystem::path& path);
void write_monthly_csv(const TemporalReport& report, const std::filesystem::path& path);
void write_periods_csv(const TemporalReport& report, const std::filesystem::path& path);
void write_windows_csv(const TemporalReport& report, const std::filesystem::path& path);

}  // namespace lineage::analytics
