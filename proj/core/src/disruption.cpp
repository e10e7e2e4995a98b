#include "lineage/disruption.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace lineage::disruption {

namespace {

using graph::LineageGraph;
using graph::NodeId;

enum class Group : std::uint8_t { x, y, z };

std::int64_t window_seconds(int window_days) {
    return static_cast<std::int64_t>(window_days) * kSecondsPerDay;
}

bool shares_any(std::span<const NodeId> a, std::span<const NodeId> b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia == *ib) {
            return true;
        }
        if (*ia < *ib) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return false;
}

struct Subsequent {
    std::int64_t delay = 0;
    Group group = Group::x;
    NodeId node = 0;
};

// Every subsequent model of the focal with its delay after the focal's
// release and its group. Group membership does not depend on the window.
std::vector<Subsequent> collect_subsequent(const LineageGraph& graph, const ParentSet& focal) {
    const Timestamp t0 = *graph.node(focal.focal).created_at;
    std::vector<Subsequent> out;
    const auto delay_of = [&](NodeId j) -> std::optional<std::int64_t> {
        const auto& ts = graph.node(j).created_at;
        if (!ts || j == focal.focal) {
            return std::nullopt;
        }
        const auto delay = (*ts - t0).count();
        return delay > 0 ? std::optional{delay} : std::nullopt;
    };

    for (const NodeId j : graph.children(focal.focal)) {
        if (const auto delay = delay_of(j)) {
            const bool to_parent = shares_any(graph.parents(j), focal.parents);
            out.push_back({*delay, to_parent ? Group::y : Group::x, j});
        }
    }
    std::vector<NodeId> parent_only;
    for (const NodeId p : focal.parents) {
        for (const NodeId j : graph.children(p)) {
            if (!graph.has_edge(j, focal.focal) && delay_of(j)) {
                parent_only.push_back(j);
            }
        }
    }
    std::sort(parent_only.begin(), parent_only.end());
    parent_only.erase(std::unique(parent_only.begin(), parent_only.end()), parent_only.end());
    for (const NodeId j : parent_only) {
        out.push_back({*delay_of(j), Group::z, j});
    }
    return out;
}

MdiResult ineligible_row(const LineageGraph& graph, NodeId id, int window, IneligibleReason reason) {
    MdiResult row;
    row.focal_id = graph.node(id).id;
    row.window_days = window;
    row.eligible = false;
    row.reason = reason;
    return row;
}

std::vector<int> normalized_windows(std::vector<int> windows) {
    if (windows.empty()) {
        throw std::invalid_argument{"at least one observation window is required"};
    }
    for (const int w : windows) {
        if (w <= 0) {
            throw std::invalid_argument{fmt::format("observation window must be positive, got {}", w)};
        }
    }
    std::sort(windows.begin(), windows.end());
    windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
    return windows;
}

}  // namespace

const char* to_string(IneligibleReason reason) {
    switch (reason) {
        case IneligibleReason::base_model: return "base_model";
        case IneligibleReason::terminal_model: return "terminal_model";
        case IneligibleReason::timestamp_unknown: return "timestamp_unknown";
    }
    return "base_model";
}

ParentSet parent_set(const LineageGraph& graph, NodeId focal) {
    const auto ps = graph.parents(focal);
    return {focal, {ps.begin(), ps.end()}};
}

std::optional<IneligibleReason> ineligibility(const LineageGraph& graph, NodeId id) {
    if (graph.out_degree(id) == 0) {
        return IneligibleReason::base_model;
    }
    if (graph.in_degree(id) == 0) {
        return IneligibleReason::terminal_model;
    }
    if (!graph.node(id).created_at) {
        return IneligibleReason::timestamp_unknown;
    }
    return std::nullopt;
}

std::vector<NodeId> eligible_focal_models(const LineageGraph& graph) {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        if (!ineligibility(graph, v)) {
            out.push_back(v);
        }
    }
    return out;
}

Partition classify_subsequent(const LineageGraph& graph, const ParentSet& focal, int window_days) {
    if (window_days <= 0) {
        throw std::invalid_argument{"observation window must be positive"};
    }
    if (!graph.node(focal.focal).created_at) {
        throw std::invalid_argument{fmt::format("focal '{}' has no creation time", graph.node(focal.focal).id)};
    }
    Partition out;
    const auto limit = window_seconds(window_days);
    for (const auto& s : collect_subsequent(graph, focal)) {
        if (s.delay > limit) {
            continue;
        }
        switch (s.group) {
            case Group::x: out.x.push_back(s.node); break;
            case Group::y: out.y.push_back(s.node); break;
            case Group::z: out.z.push_back(s.node); break;
        }
    }
    for (auto* group : {&out.x, &out.y, &out.z}) {
        std::sort(group->begin(), group->end());
    }
    return out;
}

double compute_mdi(std::size_t x, std::size_t y, std::size_t z, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument{"epsilon must be positive"};
    }
    const double numerator = static_cast<double>(x) - static_cast<double>(z);
    return numerator / (static_cast<double>(x + y + z) + epsilon);
}

MdiTable mdi_sweep(const LineageGraph& graph, const SweepOptions& options) {
    const auto windows = normalized_windows(options.windows);
    if (!(options.epsilon > 0.0)) {
        throw std::invalid_argument{"epsilon must be positive"};
    }

    std::vector<NodeId> focals;
    if (options.include_ineligible) {
        focals.resize(graph.node_count());
        std::iota(focals.begin(), focals.end(), NodeId{0});
    } else {
        focals = eligible_focal_models(graph);
    }

    MdiTable table(focals.size() * windows.size());
    const auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const NodeId f = focals[i];
            MdiResult* rows = &table[i * windows.size()];
            if (const auto reason = ineligibility(graph, f)) {
                for (std::size_t w = 0; w < windows.size(); ++w) {
                    rows[w] = ineligible_row(graph, f, windows[w], *reason);
                }
                continue;
            }
            const auto subsequent = collect_subsequent(graph, parent_set(graph, f));
            for (std::size_t w = 0; w < windows.size(); ++w) {
                const auto limit = window_seconds(windows[w]);
                MdiResult& row = rows[w];
                row.focal_id = graph.node(f).id;
                row.window_days = windows[w];
                row.eligible = true;
                for (const auto& s : subsequent) {
                    if (s.delay > limit) {
                        continue;
                    }
                    switch (s.group) {
                        case Group::x: ++row.x; break;
                        case Group::y: ++row.y; break;
                        case Group::z: ++row.z; break;
                    }
                }
                row.mdi = compute_mdi(row.x, row.y, row.z, options.epsilon);
            }
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(focals.size(), 1));
    if (workers == 1) {
        work(0, focals.size());
    } else {
        std::vector<std::jthread> threads;
        const std::size_t chunk = (focals.size() + workers - 1) / workers;
        for (std::size_t begin = 0; begin < focals.size(); begin += chunk) {
            threads.emplace_back(work, begin, std::min(begin + chunk, focals.size()));
        }
    }
    return table;
}

MdiResult mdi_oracle(const LineageGraph& graph, std::string_view focal_id, int window_days, double epsilon) {
    if (window_days <= 0) {
        throw std::invalid_argument{"observation window must be positive"};
    }
    const auto nodes = graph.nodes();
    const auto edges = graph.edges();

    std::size_t focal = nodes.size();
    for (std::size_t v = 0; v < nodes.size(); ++v) {
        if (nodes[v].id == focal_id) {
            focal = v;
        }
    }
    if (focal == nodes.size()) {
        throw std::out_of_range{fmt::format("unknown model id '{}'", focal_id)};
    }

    std::vector<bool> in_parent_set(nodes.size(), false);
    bool has_parent = false;
    bool has_child = false;
    for (const auto& e : edges) {
        if (e.child == focal) {
            in_parent_set[e.parent] = true;
            has_parent = true;
        }
        if (e.parent == focal) {
            has_child = true;
        }
    }

    MdiResult row;
    row.focal_id = std::string{focal_id};
    row.window_days = window_days;
    if (!has_parent) {
        row.reason = IneligibleReason::base_model;
    } else if (!has_child) {
        row.reason = IneligibleReason::terminal_model;
    } else if (!nodes[focal].created_at) {
        row.reason = IneligibleReason::timestamp_unknown;
    }
    if (row.reason) {
        return row;
    }
    row.eligible = true;

    std::vector<bool> to_focal(nodes.size(), false);
    std::vector<bool> to_parent(nodes.size(), false);
    for (const auto& e : edges) {
        if (e.parent == focal) {
            to_focal[e.child] = true;
        }
        if (in_parent_set[e.parent]) {
            to_parent[e.child] = true;
        }
    }

    const Timestamp start = *nodes[focal].created_at;
    const Timestamp end = start + std::chrono::seconds{window_seconds(window_days)};
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (j == focal || !nodes[j].created_at) {
            continue;
        }
        const Timestamp t = *nodes[j].created_at;
        if (t <= start || t > end) {
            continue;
        }
        if (to_focal[j] && !to_parent[j]) {
            ++row.x;
        } else if (to_focal[j] && to_parent[j]) {
            ++row.y;
        } else if (!to_focal[j] && to_parent[j]) {
            ++row.z;
        }
    }
    row.mdi = compute_mdi(row.x, row.y, row.z, epsilon);
    return row;
}

void write_mdi_csv(const MdiTable& table, const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw DataError{fmt::format("cannot write '{}'", path.string())};
    }
    out << "focal_id,window_days,x,y,z,mdi,eligible,reason\n";
    for (const auto& row : table) {
        out << fmt::format("{},{},{},{},{},{:.6f},{},{}\n", row.focal_id, row.window_days, row.x, row.y, row.z,
                           row.mdi, row.eligible ? "true" : "false", row.reason ? to_string(*row.reason) : "");
    }
}

}  // namespace lineage::disruption
