#include "lineage/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

namespace lineage::analytics {

namespace {

using graph::LineageGraph;

std::ofstream open_csv(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw DataError{fmt::format("cannot write '{}'", path.string())};
    }
    return out;
}

std::string fixed(const std::optional<double>& value) {
    return value ? fmt::format("{:.6f}", *value) : std::string{};
}

nlohmann::json optional_json(const std::optional<double>& value) {
    return value ? nlohmann::json(*value) : nlohmann::json(nullptr);
}

std::size_t bin_of(double mdi) {
    const double scaled = (mdi + 1.0) * static_cast<double>(kHistogramBins) / 2.0;
    const auto bin = static_cast<long>(std::floor(scaled));
    return static_cast<std::size_t>(std::clamp<long>(bin, 0, static_cast<long>(kHistogramBins) - 1));
}

double bin_lower(std::size_t bin) {
    return -1.0 + 2.0 * static_cast<double>(bin) / static_cast<double>(kHistogramBins);
}

std::string period_label(const PeriodRow& row) {
    if (row.start && row.end) {
        return fmt::format("{}..{}", format_date(*row.start), format_date(*row.end));
    }
    if (row.end) {
        return fmt::format("..{}", format_date(*row.end));
    }
    if (row.start) {
        return fmt::format("{}..", format_date(*row.start));
    }
    return "all";
}

}  // namespace

// ---------------------------------------------------------------------------
// Summaries

MdiSummary summarize(std::string scope, std::span<const MdiResult* const> rows) {
    MdiSummary s;
    s.scope = std::move(scope);
    s.n = rows.size();
    if (rows.empty()) {
        return s;
    }
    std::vector<double> values;
    values.reserve(rows.size());
    double sum = 0.0;
    std::size_t positive = 0;
    for (const MdiResult* row : rows) {
        values.push_back(row->mdi);
        sum += row->mdi;
        if (row->mdi > 0.0) {
            ++positive;
        }
        if (row->x + row->y + row->z > 0) {
            ++s.n_nonempty;
        }
        ++s.histogram[bin_of(row->mdi)];
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    s.mean = std::clamp(sum / static_cast<double>(values.size()), -1.0, 1.0);
    s.positive_fraction = static_cast<double>(positive) / static_cast<double>(values.size());
    return s;
}

nlohmann::json MdiSummary::to_json() const {
    return {{"scope", scope},
            {"n", n},
            {"n_nonempty", n_nonempty},
            {"mean", optional_json(mean)},
            {"median", optional_json(median)},
            {"positive_fraction", optional_json(positive_fraction)},
            {"histogram", histogram}};
}

std::vector<const MdiResult*> rows_at_window(const MdiTable& table, int window_days) {
    std::vector<const MdiResult*> out;
    for (const auto& row : table) {
        if (row.eligible && row.window_days == window_days) {
            out.push_back(&row);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// In-degree trend

std::optional<double> zero_crossing(std::span<const TrendPoint> points) {
    for (std::size_t i = 1; i < points.size(); ++i) {
        const TrendPoint& a = points[i - 1];
        const TrendPoint& b = points[i];
        if (a.smoothed_mdi <= 0.0 && b.smoothed_mdi > 0.0) {
            const double t = -a.smoothed_mdi / (b.smoothed_mdi - a.smoothed_mdi);
            return a.in_degree + t * (b.in_degree - a.in_degree);
        }
    }
    return std::nullopt;
}

TrendFit build_trend(const MdiTable& table, const LineageGraph& graph, int window_days, const TrendOptions& options) {
    TrendFit fit;
    fit.options = options;
    const auto rows = rows_at_window(table, window_days);
    fit.n = rows.size();

    std::vector<double> degree;
    std::vector<double> mdi;
    degree.reserve(rows.size());
    mdi.reserve(rows.size());
    for (const MdiResult* row : rows) {
        degree.push_back(static_cast<double>(graph.in_degree(graph.at(row->focal_id))));
        mdi.push_back(row->mdi);
    }
    if (rows.size() >= 3) {
        fit.spearman_rho = spearman(degree, mdi);
    }
    if (rows.size() < 5) {
        return fit;
    }

    std::vector<double> axis = degree;
    if (options.log_x) {
        for (double& v : axis) {
            v = std::log(std::max(v, 1.0));
        }
    }
    const auto smoothed = lowess(axis, mdi, options.lowess);
    const auto [lo, hi] = std::minmax_element(mdi.begin(), mdi.end());

    std::map<double, double> by_degree;
    for (std::size_t i = 0; i < degree.size(); ++i) {
        by_degree.emplace(degree[i], std::clamp(smoothed[i], *lo, *hi));
    }
    fit.points.reserve(by_degree.size());
    for (const auto& [d, s] : by_degree) {
        fit.points.push_back({d, s});
    }
    fit.zero_crossing = zero_crossing(fit.points);
    return fit;
}

nlohmann::json TrendFit::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) {
        pts.push_back({p.in_degree, p.smoothed_mdi});
    }
    return {{"n", n},
            {"spearman_rho", optional_json(spearman_rho)},
            {"zero_crossing", optional_json(zero_crossing)},
            {"lowess_frac", options.lowess.frac},
            {"lowess_robust_iters", options.lowess.robust_iters},
            {"log_x", options.log_x},
            {"points", pts}};
}

// ---------------------------------------------------------------------------
// Scale and relation groups

GroupSummaries group_summaries(const MdiTable& table, const LineageGraph& graph, int window_days) {
    const auto rows = rows_at_window(table, window_days);
    std::map<ScaleBucket, std::vector<const MdiResult*>> by_bucket;
    std::map<graph::RelationType, std::vector<const MdiResult*>> by_relation;
    GroupSummaries out;

    for (const MdiResult* row : rows) {
        const auto id = graph.at(row->focal_id);
        const auto& scale = graph.node(id).param_scale;
        by_bucket[scale ? bucket_for(*scale) : ScaleBucket::unknown].push_back(row);
        if (extract_param_scale(row->focal_id).ambiguous()) {
            ++out.ambiguous_scale_ids;
        }
        std::vector<graph::RelationType> seen;
        for (const auto& e : graph.outgoing(id)) {
            if (std::find(seen.begin(), seen.end(), e.relation) == seen.end()) {
                seen.push_back(e.relation);
                by_relation[e.relation].push_back(row);
            }
        }
    }
    for (const ScaleBucket bucket : kAllBuckets) {
        out.by_scale.push_back(summarize(to_string(bucket), by_bucket[bucket]));
    }
    for (const auto relation : graph::kTypedRelations) {
        out.by_relation.push_back(summarize(graph::to_string(relation), by_relation[relation]));
    }
    return out;
}

nlohmann::json GroupSummaries::to_json() const {
    nlohmann::json scale = nlohmann::json::array();
    for (const auto& s : by_scale) {
        scale.push_back(s.to_json());
    }
    nlohmann::json relation = nlohmann::json::array();
    for (const auto& s : by_relation) {
        relation.push_back(s.to_json());
    }
    return {{"by_scale", scale}, {"by_relation", relation}, {"ambiguous_scale_ids", ambiguous_scale_ids}};
}

// ---------------------------------------------------------------------------
// Temporal report

std::vector<Timestamp> default_period_boundaries() {
    return {*parse_date("2023-03-01"), *parse_date("2024-04-01"), *parse_date("2025-04-01")};
}

TemporalReport temporal_report(const MdiTable& table, const LineageGraph& graph,
                               std::span<const Timestamp> period_boundaries, int main_window_days) {
    for (std::size_t i = 1; i < period_boundaries.size(); ++i) {
        if (!(period_boundaries[i - 1] < period_boundaries[i])) {
            throw std::invalid_argument{"period boundaries must be strictly ascending"};
        }
    }
    TemporalReport report;
    const auto main_rows = rows_at_window(table, main_window_days);

    // Monthly rows.
    std::map<YearMonth, MonthRow> months;
    for (const auto& node : graph.nodes()) {
        if (node.created_at) {
            const auto ym = year_month_of(*node.created_at);
            months[ym].new_models += 1;
        }
    }
    std::map<YearMonth, std::size_t> positive;
    for (const MdiResult* row : main_rows) {
        const auto ym = year_month_of(*graph.node(graph.at(row->focal_id)).created_at);
        months[ym].eligible += 1;
        if (row->mdi > 0.0) {
            ++positive[ym];
        }
    }
    if (!months.empty()) {
        const YearMonth last = months.rbegin()->first;
        for (YearMonth ym = months.begin()->first; ym <= last; ym = ym.next()) {
            MonthRow row = months[ym];
            row.month = ym;
            if (row.eligible > 0) {
                row.positive_fraction = static_cast<double>(positive[ym]) / static_cast<double>(row.eligible);
            }
            report.monthly.push_back(row);
        }
    }

    // Periods.
    const std::size_t period_count = period_boundaries.size() + 1;
    std::vector<std::vector<const MdiResult*>> period_rows(period_count);
    for (const MdiResult* row : main_rows) {
        const Timestamp created = *graph.node(graph.at(row->focal_id)).created_at;
        const auto k = static_cast<std::size_t>(
            std::upper_bound(period_boundaries.begin(), period_boundaries.end(), created) -
            period_boundaries.begin());
        period_rows[k].push_back(row);
    }
    for (std::size_t k = 0; k < period_count; ++k) {
        PeriodRow row;
        if (k > 0) {
            row.start = period_boundaries[k - 1];
        }
        if (k < period_boundaries.size()) {
            row.end = period_boundaries[k];
        }
        row.summary = summarize(period_label(row), period_rows[k]);
        report.periods.push_back(std::move(row));
    }

    // Window sensitivity.
    std::vector<int> windows;
    for (const auto& row : table) {
        windows.push_back(row.window_days);
    }
    std::sort(windows.begin(), windows.end());
    windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
    for (const int w : windows) {
        const auto rows = rows_at_window(table, w);
        WindowRow row;
        row.window_days = w;
        row.summary = summarize(fmt::format("{}d", w), rows);
        for (const MdiResult* r : rows) {
            row.x_total += r->x;
            row.y_total += r->y;
            row.z_total += r->z;
        }
        report.windows.push_back(std::move(row));
    }
    return report;
}

nlohmann::json TemporalReport::to_json() const {
    nlohmann::json monthly_json = nlohmann::json::array();
    for (const auto& m : monthly) {
        monthly_json.push_back({{"month", m.month.str()},
                                {"new_models", m.new_models},
                                {"eligible", m.eligible},
                                {"positive_fraction", optional_json(m.positive_fraction)}});
    }
    nlohmann::json periods_json = nlohmann::json::array();
    for (const auto& p : periods) {
        periods_json.push_back({{"start", p.start ? nlohmann::json(format_date(*p.start)) : nlohmann::json(nullptr)},
                                {"end", p.end ? nlohmann::json(format_date(*p.end)) : nlohmann::json(nullptr)},
                                {"summary", p.summary.to_json()}});
    }
    nlohmann::json windows_json = nlohmann::json::array();
    for (const auto& w : windows) {
        windows_json.push_back({{"window_days", w.window_days},
                                {"x_total", w.x_total},
                                {"y_total", w.y_total},
                                {"z_total", w.z_total},
                                {"summary", w.summary.to_json()}});
    }
    return {{"monthly", monthly_json}, {"periods", periods_json}, {"windows", windows_json}};
}

// ---------------------------------------------------------------------------
// CSV

void write_summaries_csv(std::span<const MdiSummary> summaries, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "scope,n,n_nonempty,mean,median,positive_fraction\n";
    for (const auto& s : summaries) {
        out << fmt::format("{},{},{},{},{},{}\n", s.scope, s.n, s.n_nonempty, fixed(s.mean), fixed(s.median),
                           fixed(s.positive_fraction));
    }
}

void write_histograms_csv(std::span<const MdiSummary> summaries, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "scope,bin_lower,bin_upper,count\n";
    for (const auto& s : summaries) {
        for (std::size_t b = 0; b < kHistogramBins; ++b) {
            out << fmt::format("{},{:.2f},{:.2f},{}\n", s.scope, bin_lower(b), bin_lower(b + 1), s.histogram[b]);
        }
    }
}

void write_trend_csv(const TrendFit& trend, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "in_degree,smoothed_mdi\n";
    for (const auto& p : trend.points) {
        out << fmt::format("{:.0f},{:.6f}\n", p.in_degree, p.smoothed_mdi);
    }
}

void write_monthly_csv(const TemporalReport& report, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "month,new_models,eligible,positive_fraction\n";
    for (const auto& m : report.monthly) {
        out << fmt::format("{},{},{},{}\n", m.month.str(), m.new_models, m.eligible, fixed(m.positive_fraction));
    }
}

void write_periods_csv(const TemporalReport& report, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "period,start,end,n,n_nonempty,mean,median,positive_fraction\n";
    for (const auto& p : report.periods) {
        const auto& s = p.summary;
        out << fmt::format("{},{},{},{},{},{},{},{}\n", s.scope, p.start ? format_date(*p.start) : "",
                           p.end ? format_date(*p.end) : "", s.n, s.n_nonempty, fixed(s.mean), fixed(s.median),
                           fixed(s.positive_fraction));
    }
}

void write_windows_csv(const TemporalReport& report, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "window_days,n,n_nonempty,x_total,y_total,z_total,mean,median,positive_fraction\n";
    for (const auto& w : report.windows) {
        const auto& s = w.summary;
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", w.window_days, s.n, s.n_nonempty, w.x_total, w.y_total,
                           w.z_total, fixed(s.mean), fixed(s.median), fixed(s.positive_fraction));
    }
}

}  // namespace lineage::analytics
