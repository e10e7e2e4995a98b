#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "lineage/graph.hpp"
#include "lineage/synth.hpp"

using namespace lineage;

namespace {

double top_percent_edge_share(const graph::LineageGraph& g, double percent) {
    std::vector<std::size_t> deg;
    for (graph::NodeId v = 0; v < g.node_count(); ++v) {
        deg.push_back(g.in_degree(v));
    }
    std::sort(deg.rbegin(), deg.rend());
    const auto k = static_cast<std::size_t>(g.node_count() * percent / 100.0);
    const auto top = std::accumulate(deg.begin(), deg.begin() + k, std::size_t{0});
    return static_cast<double>(top) / g.edge_count();
}

}  // namespace

TEST(Synth, Deterministic) {
    synth::SynthOptions o;
    o.seed = 99;
    o.nodes = 500;
    EXPECT_EQ(synth::generate(o).records, synth::generate(o).records);
    o.seed = 100;
    auto other = synth::generate(o);
    o.seed = 99;
    EXPECT_NE(synth::generate(o).records, other.records);
}

TEST(Synth, ShapeOfOutput) {
    synth::SynthOptions o;
    o.nodes = 2000;
    const auto snap = synth::generate(o);
    EXPECT_EQ(snap.records.size(), 2000u);
    const auto [g, report] = graph::build_graph(snap);
    EXPECT_EQ(report.stub_nodes, 0u);
    EXPECT_GT(report.raw_links_by_source.at(graph::LinkSource::peft_config), 0u);
    for (const auto rel : graph::kTypedRelations) {
        EXPECT_TRUE(std::any_of(g.edges().begin(), g.edges().end(),
                                [rel](const graph::Edge& e) { return e.relation == rel; }));
    }
    for (const auto& e : g.edges()) {
        EXPECT_LT(*g.nodes()[e.parent].created_at, *g.nodes()[e.child].created_at);
    }
    EXPECT_TRUE(synth::generate(synth::SynthOptions{.nodes = 0}).records.empty());
}

TEST(Synth, PreferentialIsHeavierTailedThanUniform) {
    synth::SynthOptions o;
    o.nodes = 5000;
    const auto pref = graph::build_graph(synth::generate(o)).graph;
    o.attachment = synth::Attachment::uniform;
    const auto unif = graph::build_graph(synth::generate(o)).graph;
    EXPECT_GT(top_percent_edge_share(pref, 1.0), 0.20);
    EXPECT_GT(top_percent_edge_share(pref, 1.0), top_percent_edge_share(unif, 1.0));
}
