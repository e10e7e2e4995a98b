#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lineage/graph.hpp"

namespace lineage::disruption {

inline constexpr double kDefaultEpsilon = 1e-9;
inline constexpr int kMainWindowDays = 90;

enum class IneligibleReason { base_model, terminal_model, timestamp_unknown };

const char* to_string(IneligibleReason reason);

/// Direct parents of a focal model; several for merged or multi-parent models.
struct ParentSet {
    graph::NodeId focal = 0;
    std::vector<graph::NodeId> parents;
};

ParentSet parent_set(const graph::LineageGraph& graph, graph::NodeId focal);

struct MdiResult {
    std::string focal_id;
    int window_days = 0;
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t z = 0;
    double mdi = 0.0;
    bool eligible = false;
    std::optional<IneligibleReason> reason;

    bool operator==(const MdiResult&) const = default;
};

/// Sorted by (focal_id, window_days).
using MdiTable = std::vector<MdiResult>;

/// Why `id` cannot be a focal model, or nullopt when it can: it needs at least
/// one parent, at least one child anywhere in the graph, and a known timestamp.
std::optional<IneligibleReason> ineligibility(const graph::LineageGraph& graph, graph::NodeId id);

/// Intermediate models, ascending.
std::vector<graph::NodeId> eligible_focal_models(const graph::LineageGraph& graph);

/// Subsequent models of a focal, each in exactly one group.
struct Partition {
    /// Derive from the focal but from no member of its parent set.
    std::vector<graph::NodeId> x;
    /// Derive from the focal and from at least one parent.
    std::vector<graph::NodeId> y;
    /// Derive from at least one parent but not from the focal.
    std::vector<graph::NodeId> z;
};

/// Classifies models created in (focal, focal + window_days] that have a
/// direct edge to the focal and/or a member of its parent set.
/// Throws std::invalid_argument for window_days <= 0 or an unknown focal timestamp.
Partition classify_subsequent(const graph::LineageGraph& graph, const ParentSet& focal, int window_days);

/// (x - z) / (x + y + z + epsilon). Throws std::invalid_argument for epsilon <= 0.
double compute_mdi(std::size_t x, std::size_t y, std::size_t z, double epsilon = kDefaultEpsilon);

struct SweepOptions {
    std::vector<int> windows{kMainWindowDays};
    double epsilon = kDefaultEpsilon;
    unsigned workers = 1;
    /// Also emit rows (with a reason) for models that are not eligible.
    bool include_ineligible = false;
};

/// One row per eligible focal per window. Result order does not depend on
/// the worker count.
MdiTable mdi_sweep(const graph::LineageGraph& graph, const SweepOptions& options);

/// Brute-force reference: scans every node and edge with no adjacency index.
MdiResult mdi_oracle(const graph::LineageGraph& graph, std::string_view focal_id, int window_days,
                     double epsilon = kDefaultEpsilon);

/// CSV "focal_id,window_days,x,y,z,mdi,eligible,reason".
void write_mdi_csv(const MdiTable& table, const std::filesystem::path& path);

}  // namespace lineage::disruption
