#include <cmath>

#include <gtest/gtest.h>

#include "lineage/analytics.hpp"
#include "lineage/synth.hpp"
#include "oracles.hpp"

using namespace lineage;
using namespace lineage::analytics;
using lineage::testing::record;
using lineage::testing::snapshot_of;

namespace {

MdiResult row(std::string id, double mdi, std::size_t x = 1, int window = 90) {
    MdiResult r;
    r.focal_id = std::move(id);
    r.window_days = window;
    r.x = x;
    r.mdi = mdi;
    r.eligible = true;
    return r;
}

graph::LineageGraph synth_graph(std::uint64_t seed, std::size_t nodes) {
    synth::SynthOptions o;
    o.seed = seed;
    o.nodes = nodes;
    return graph::build_graph(synth::generate(o)).graph;
}

}  // namespace

TEST(Summarize, BasicStatistics) {
    const std::vector<MdiResult> rows{row("a", -1.0), row("b", -0.5), row("c", 0.25), row("d", 1.0), row("e", 0.0, 0)};
    std::vector<const MdiResult*> ptrs;
    for (const auto& r : rows) {
        ptrs.push_back(&r);
    }
    const auto s = summarize("all", ptrs);
    EXPECT_EQ(s.n, 5u);
    EXPECT_EQ(s.n_nonempty, 4u);
    EXPECT_DOUBLE_EQ(*s.mean, -0.05);
    EXPECT_DOUBLE_EQ(*s.median, 0.0);
    EXPECT_DOUBLE_EQ(*s.positive_fraction, 0.4);
    EXPECT_EQ(s.histogram[0], 1u);
    EXPECT_EQ(s.histogram[5], 1u);
    EXPECT_EQ(s.histogram[10], 1u);
    EXPECT_EQ(s.histogram[12], 1u);
    EXPECT_EQ(s.histogram[19], 1u);

    const auto empty = summarize("none", {});
    EXPECT_EQ(empty.n, 0u);
    EXPECT_FALSE(empty.mean);
    EXPECT_TRUE(empty.to_json()["mean"].is_null());
}

TEST(ZeroCrossing, Interpolates) {
    const std::vector<TrendPoint> pts{{1, -0.8}, {10, -0.2}, {20, 0.3}, {30, -0.1}, {40, 0.5}};
    EXPECT_NEAR(*zero_crossing(pts), 10.0 + 10.0 * 0.2 / 0.5, 1e-12);
    const std::vector<TrendPoint> never{{1, -0.8}, {2, -0.1}};
    EXPECT_FALSE(zero_crossing(never));
    const std::vector<TrendPoint> at_zero{{1, -0.5}, {2, 0.0}, {3, 0.5}};
    EXPECT_NEAR(*zero_crossing(at_zero), 2.0, 1e-12);
}

TEST(Trend, OnSynthGraph) {
    const auto g = synth_graph(4, 3000);
    const auto table = disruption::mdi_sweep(g, {});
    const auto trend = build_trend(table, g, 90);
    EXPECT_EQ(trend.n, rows_at_window(table, 90).size());
    ASSERT_TRUE(trend.spearman_rho);
    EXPECT_GE(*trend.spearman_rho, -1.0);
    EXPECT_LE(*trend.spearman_rho, 1.0);
    double lo = 1.0, hi = -1.0;
    for (const auto* r : rows_at_window(table, 90)) {
        lo = std::min(lo, r->mdi);
        hi = std::max(hi, r->mdi);
    }
    for (std::size_t i = 0; i < trend.points.size(); ++i) {
        EXPECT_GE(trend.points[i].smoothed_mdi, lo);
        EXPECT_LE(trend.points[i].smoothed_mdi, hi);
        if (i > 0) {
            EXPECT_LT(trend.points[i - 1].in_degree, trend.points[i].in_degree);
        }
    }
}

TEST(Trend, TooFewRows) {
    const auto g = graph::build_graph(ingest::read_dump(std::filesystem::path{LINEAGE_FIXTURE_DIR} / "worked_example.jsonl",
                                                        ingest::Strictness::strict))
                       .graph;
    const auto trend = build_trend(disruption::mdi_sweep(g, {}), g, 90);
    EXPECT_EQ(trend.n, 1u);
    EXPECT_FALSE(trend.spearman_rho);
    EXPECT_TRUE(trend.points.empty());
}

TEST(Groups, PartitionEligibleRows) {
    const auto g = synth_graph(6, 2000);
    const auto table = disruption::mdi_sweep(g, {});
    const auto groups = group_summaries(table, g, 90);
    ASSERT_EQ(groups.by_scale.size(), 4u);
    ASSERT_EQ(groups.by_relation.size(), 4u);
    std::size_t scale_total = 0;
    for (const auto& s : groups.by_scale) {
        scale_total += s.n;
    }
    EXPECT_EQ(scale_total, rows_at_window(table, 90).size());
    std::size_t relation_total = 0;
    for (const auto& s : groups.by_relation) {
        relation_total += s.n;
    }
    EXPECT_GE(relation_total, scale_total);
}

TEST(Groups, MultiRelationFocalCountsOnce) {
    const auto g = graph::build_graph(snapshot_of({
                                          record("p/a-7B", "2024-01-01"),
                                          record("p/b", "2024-01-01"),
                                          record("p/c", "2024-01-01"),
                                          record("f/m-14B", "2024-01-02",
                                                 {"base_model:merge:p/a-7B", "base_model:merge:p/b",
                                                  "base_model:finetune:p/c"}),
                                          record("k/x", "2024-01-03", {"base_model:adapter:f/m-14B"}),
                                      }))
                       .graph;
    const auto groups = group_summaries(disruption::mdi_sweep(g, {}), g, 90);
    EXPECT_EQ(groups.by_relation[0].n, 1u);  // finetune
    EXPECT_EQ(groups.by_relation[1].n, 0u);  // adapter
    EXPECT_EQ(groups.by_relation[3].n, 1u);  // merge
    EXPECT_EQ(groups.by_scale[2].n, 1u);     // large
}

TEST(Temporal, MonthlyAndPeriods) {
    const auto g = synth_graph(8, 3000);
    const auto table = disruption::mdi_sweep(g, disruption::SweepOptions{{30, 90, 180}});
    const auto bounds = default_period_boundaries();
    const auto report = temporal_report(table, g, bounds, 90);

    std::size_t listed = 0, eligible = 0;
    for (std::size_t i = 0; i < report.monthly.size(); ++i) {
        listed += report.monthly[i].new_models;
        eligible += report.monthly[i].eligible;
        if (i > 0) {
            EXPECT_EQ(report.monthly[i - 1].month.next(), report.monthly[i].month);
        }
    }
    EXPECT_EQ(listed, g.node_count());
    EXPECT_EQ(eligible, rows_at_window(table, 90).size());

    ASSERT_EQ(report.periods.size(), bounds.size() + 1);
    std::size_t in_periods = 0;
    for (const auto& p : report.periods) {
        in_periods += p.summary.n;
    }
    EXPECT_EQ(in_periods, eligible);
    EXPECT_FALSE(report.periods.front().start);
    EXPECT_FALSE(report.periods.back().end);

    ASSERT_EQ(report.windows.size(), 3u);
    for (std::size_t i = 1; i < report.windows.size(); ++i) {
        EXPECT_GE(report.windows[i].x_total, report.windows[i - 1].x_total);
        EXPECT_GE(report.windows[i].y_total, report.windows[i - 1].y_total);
        EXPECT_GE(report.windows[i].z_total, report.windows[i - 1].z_total);
    }

    const std::vector<Timestamp> bad{bounds[1], bounds[0]};
    EXPECT_THROW(temporal_report(table, g, bad, 90), std::invalid_argument);
}


