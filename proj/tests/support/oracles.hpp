#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "lineage/graph.hpp"
#include "lineage/ingest.hpp"

namespace lineage::testing {

/// Samples from P(x) = x^-alpha / zeta(alpha, x_min), x >= x_min, by
/// inverting a tabulated CDF. The table runs to `table_size`; the remaining
/// tail mass is handled by the continuous inverse.
class DiscretePowerLaw {
public:
    DiscretePowerLaw(double alpha, std::size_t x_min, std::size_t table_size = 1'000'000);

    std::size_t operator()(std::mt19937_64& rng) const;
    std::vector<std::size_t> sample(std::size_t n, std::uint64_t seed) const;

private:
    double alpha_;
    std::size_t x_min_;
    std::vector<double> cdf_;
};

/// Hurwitz zeta by Euler-Maclaurin, accurate to ~1e-12 for s > 1, q >= 1.
double hurwitz_zeta(double s, double q);

/// Partition of node ids into weak components found by breadth-first search
/// over an undirected adjacency list built from scratch.
std::set<std::set<graph::NodeId>> bfs_components(const graph::LineageGraph& graph);

/// Partition implied by a label vector.
std::set<std::set<graph::NodeId>> partition_from_labels(const std::vector<graph::NodeId>& labels);

/// Random DAG on `nodes` nodes: every edge points from a later node to an
/// earlier one, so there are no cycles. Some nodes get no timestamp.
graph::LineageGraph random_dag(std::size_t nodes, double edge_probability, std::uint64_t seed,
                               double unknown_time_fraction = 0.0);

/// Snapshot with a single record per id, for building small graphs by hand.
ingest::Snapshot snapshot_of(const std::vector<ingest::ModelRecord>& records);

ingest::ModelRecord record(std::string id, std::string created_at, std::vector<std::string> tags = {});

}  // namespace lineage::testing
