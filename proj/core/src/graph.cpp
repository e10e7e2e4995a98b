#include "lineage/graph.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "lineage/param_scale.hpp"

namespace lineage::graph {

namespace {

constexpr std::string_view kTagPrefix = "base_model:";

std::vector<ParentLink> links_from(const std::string& child, const std::vector<std::string>& parents,
                                   RelationType relation, LinkSource source) {
    std::vector<ParentLink> out;
    out.reserve(parents.size());
    for (const auto& parent : parents) {
        out.push_back({child, parent, relation, source});
    }
    return out;
}

// Compressed adjacency from (key, value) pairs sorted by key then value.
void build_csr(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& pairs, std::vector<std::uint32_t>& offsets,
               std::vector<NodeId>& targets) {
    offsets.assign(n + 1, 0);
    for (const auto& [key, value] : pairs) {
        ++offsets[key + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    targets.resize(pairs.size());
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [key, value] : pairs) {
        targets[cursor[key]++] = value;
    }
}

// Iterative DFS over parent links. Returns the edge indices of one directed
// cycle, or an empty vector when the live edge set is acyclic.
std::vector<std::size_t> find_cycle(std::size_t n, const std::vector<std::vector<std::size_t>>& out_edges,
                                    const std::vector<Edge>& edges, const std::vector<bool>& removed) {
    enum : std::uint8_t { white, grey, black };
    std::vector<std::uint8_t> color(n, white);
    struct Frame {
        NodeId node;
        std::size_t next;
        std::size_t via_edge;
    };
    std::vector<Frame> stack;
    for (NodeId root = 0; root < n; ++root) {
        if (color[root] != white) {
            continue;
        }
        stack.push_back({root, 0, 0});
        color[root] = grey;
        while (!stack.empty()) {
            Frame& frame = stack.back();
            const auto& adj = out_edges[frame.node];
            if (frame.next == adj.size()) {
                color[frame.node] = black;
                stack.pop_back();
                continue;
            }
            const std::size_t e = adj[frame.next++];
            if (removed[e]) {
                continue;
            }
            const NodeId next = edges[e].parent;
            if (color[next] == grey) {
                std::vector<std::size_t> cycle{e};
                for (auto it = stack.rbegin(); it != stack.rend() && it->node != next; ++it) {
                    cycle.push_back(it->via_edge);
                }
                return cycle;
            }
            if (color[next] == white) {
                color[next] = grey;
                stack.push_back({next, 0, e});
            }
        }
    }
    return {};
}

}  // namespace

const char* to_string(RelationType relation) {
    switch (relation) {
        case RelationType::finetune: return "finetune";
        case RelationType::adapter: return "adapter";
        case RelationType::quantized: return "quantized";
        case RelationType::merge: return "merge";
        case RelationType::unspecified: return "unspecified";
    }
    return "unspecified";
}

std::optional<RelationType> parse_relation(std::string_view text) {
    for (const auto relation : {RelationType::finetune, RelationType::adapter, RelationType::quantized,
                                RelationType::merge, RelationType::unspecified}) {
        if (text == to_string(relation)) {
            return relation;
        }
    }
    return std::nullopt;
}

const char* to_string(LinkSource source) {
    switch (source) {
        case LinkSource::tag: return "tag";
        case LinkSource::peft_config: return "peft_config";
        case LinkSource::card_base_model: return "card_base_model";
        case LinkSource::card_data_base_model: return "card_data_base_model";
    }
    return "tag";
}

const char* to_string(Role role) {
    switch (role) {
        case Role::base: return "base";
        case Role::finetuned: return "finetuned";
        case Role::adapter: return "adapter";
        case Role::quantized: return "quantized";
        case Role::merged: return "merged";
    }
    return "base";
}

Role role_for(RelationType relation) {
    switch (relation) {
        case RelationType::finetune: return Role::finetuned;
        case RelationType::adapter: return Role::adapter;
        case RelationType::quantized: return Role::quantized;
        case RelationType::merge: return Role::merged;
        case RelationType::unspecified: break;
    }
    throw std::invalid_argument{"unspecified relation has no node role"};
}

std::size_t RoleSet::size() const {
    return static_cast<std::size_t>(std::popcount(bits_));
}

std::string RoleSet::str() const {
    std::string out;
    for (const Role role : kAllRoles) {
        if (contains(role)) {
            if (!out.empty()) {
                out += ',';
            }
            out += to_string(role);
        }
    }
    return out;
}

ExtractedLinks extract_links(const ingest::ModelRecord& record) {
    ExtractedLinks out;
    for (const auto& tag : record.tags) {
        if (!tag.starts_with(kTagPrefix)) {
            continue;
        }
        const std::string_view rest = std::string_view{tag}.substr(kTagPrefix.size());
        const auto colon = rest.find(':');
        if (colon == std::string_view::npos) {
            out.links.push_back({record.model_id, std::string{rest}, RelationType::unspecified, LinkSource::tag});
            continue;
        }
        const auto relation = parse_relation(rest.substr(0, colon));
        const std::string_view parent = rest.substr(colon + 1);
        if (!relation || *relation == RelationType::unspecified || parent.find(':') != std::string_view::npos) {
            ++out.unparseable_tags;
            continue;
        }
        out.links.push_back({record.model_id, std::string{parent}, *relation, LinkSource::tag});
    }
    if (!out.links.empty()) {
        return out;
    }

    if (record.peft_base) {
        out.links.push_back({record.model_id, *record.peft_base, RelationType::adapter, LinkSource::peft_config});
        return out;
    }
    if (record.card_base_model && !record.card_base_model->empty()) {
        out.links = links_from(record.model_id, *record.card_base_model, RelationType::unspecified,
                               LinkSource::card_base_model);
        return out;
    }
    if (record.card_data_base_model && !record.card_data_base_model->empty()) {
        out.links = links_from(record.model_id, *record.card_data_base_model, RelationType::unspecified,
                               LinkSource::card_data_base_model);
    }
    return out;
}

// ---------------------------------------------------------------------------
// LineageGraph

LineageGraph LineageGraph::from_parts(std::vector<Node> nodes, std::vector<EdgeSpec> edges) {
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id.empty()) {
            throw DataError{"node with empty model id"};
        }
        if (i > 0 && nodes[i].id == nodes[i - 1].id) {
            throw DataError{fmt::format("duplicate node '{}'", nodes[i].id)};
        }
    }

    LineageGraph g;
    g.nodes_ = std::move(nodes);

    g.edges_.reserve(edges.size());
    for (const auto& spec : edges) {
        const auto child = g.find(spec.child_id);
        const auto parent = g.find(spec.parent_id);
        if (!child || !parent) {
            throw DataError{fmt::format("edge {} -> {} references an unknown node", spec.child_id, spec.parent_id)};
        }
        if (*child == *parent) {
            throw DataError{fmt::format("self-loop on '{}'", spec.child_id)};
        }
        if (spec.relation == RelationType::unspecified) {
            throw DataError{fmt::format("edge {} -> {} has unspecified relation", spec.child_id, spec.parent_id)};
        }
        g.edges_.push_back({*child, *parent, spec.relation});
    }
    std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.child, a.parent) < std::tie(b.child, b.parent);
    });
    for (std::size_t i = 1; i < g.edges_.size(); ++i) {
        if (g.edges_[i].child == g.edges_[i - 1].child && g.edges_[i].parent == g.edges_[i - 1].parent) {
            throw DataError{fmt::format("duplicate edge {} -> {}", g.nodes_[g.edges_[i].child].id,
                                        g.nodes_[g.edges_[i].parent].id)};
        }
    }

    std::vector<std::pair<NodeId, NodeId>> out_pairs;
    std::vector<std::pair<NodeId, NodeId>> in_pairs;
    out_pairs.reserve(g.edges_.size());
    in_pairs.reserve(g.edges_.size());
    for (const auto& e : g.edges_) {
        out_pairs.emplace_back(e.child, e.parent);
        in_pairs.emplace_back(e.parent, e.child);
    }
    std::sort(in_pairs.begin(), in_pairs.end());
    build_csr(g.nodes_.size(), out_pairs, g.out_offsets_, g.out_targets_);
    build_csr(g.nodes_.size(), in_pairs, g.in_offsets_, g.in_sources_);

    if (!topological_order(g)) {
        throw DataError{"lineage graph contains a directed cycle"};
    }
    return g;
}

std::optional<NodeId> LineageGraph::find(std::string_view model_id) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), model_id,
                                     [](const Node& n, std::string_view id) { return n.id < id; });
    if (it == nodes_.end() || it->id != model_id) {
        return std::nullopt;
    }
    return static_cast<NodeId>(it - nodes_.begin());
}

NodeId LineageGraph::at(std::string_view model_id) const {
    if (const auto id = find(model_id)) {
        return *id;
    }
    throw std::out_of_range{fmt::format("unknown model id '{}'", model_id)};
}

std::span<const NodeId> LineageGraph::parents(NodeId child) const {
    if (out_offsets_.empty()) {
        return {};
    }
    return std::span{out_targets_}.subspan(out_offsets_[child], out_offsets_[child + 1] - out_offsets_[child]);
}

std::span<const NodeId> LineageGraph::children(NodeId parent) const {
    if (in_offsets_.empty()) {
        return {};
    }
    return std::span{in_sources_}.subspan(in_offsets_[parent], in_offsets_[parent + 1] - in_offsets_[parent]);
}

std::span<const Edge> LineageGraph::outgoing(NodeId child) const {
    if (out_offsets_.empty()) {
        return {};
    }
    return std::span{edges_}.subspan(out_offsets_[child], out_offsets_[child + 1] - out_offsets_[child]);
}

bool LineageGraph::has_edge(NodeId child, NodeId parent) const {
    const auto ps = parents(child);
    return std::binary_search(ps.begin(), ps.end(), parent);
}

RoleSet LineageGraph::roles(NodeId id) const {
    RoleSet roles;
    const auto out = outgoing(id);
    if (out.empty()) {
        roles.insert(Role::base);
        return roles;
    }
    for (const auto& e : out) {
        roles.insert(role_for(e.relation));
    }
    return roles;
}

RoleSet node_roles(const LineageGraph& graph, std::string_view model_id) {
    return graph.roles(graph.at(model_id));
}

std::optional<std::vector<NodeId>> topological_order(const LineageGraph& graph) {
    // Kahn's algorithm on child -> parent edges: nodes nobody derives from go first.
    const std::size_t n = graph.node_count();
    std::vector<std::size_t> pending(n);
    std::vector<NodeId> ready;
    for (NodeId v = 0; v < n; ++v) {
        pending[v] = graph.in_degree(v);
        if (pending[v] == 0) {
            ready.push_back(v);
        }
    }
    std::vector<NodeId> order;
    order.reserve(n);
    while (!ready.empty()) {
        const NodeId v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (const NodeId p : graph.parents(v)) {
            if (--pending[p] == 0) {
                ready.push_back(p);
            }
        }
    }
    if (order.size() != n) {
        return std::nullopt;
    }
    return order;
}

nlohmann::json Census::to_json() const {
    nlohmann::json roles = nlohmann::json::object();
    for (const Role role : kAllRoles) {
        const auto it = by_role.find(role);
        roles[to_string(role)] = it == by_role.end() ? 0 : it->second;
    }
    return {{"nodes", nodes}, {"edges", edges}, {"stub_nodes", stub_nodes}, {"roles", roles},
            {"mean_degree", mean_degree}};
}

Census census(const LineageGraph& graph) {
    Census out;
    out.nodes = graph.node_count();
    out.edges = graph.edge_count();
    for (const Role role : kAllRoles) {
        out.by_role[role] = 0;
    }
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        if (graph.node(v).stub) {
            ++out.stub_nodes;
        }
        const RoleSet roles = graph.roles(v);
        for (const Role role : kAllRoles) {
            if (roles.contains(role)) {
                ++out.by_role[role];
            }
        }
    }
    out.mean_degree = out.nodes == 0 ? 0.0 : 2.0 * static_cast<double>(out.edges) / static_cast<double>(out.nodes);
    return out;
}

// ---------------------------------------------------------------------------
// Cleaning and assembly

bool CleaningReport::reconciles() const {
    return edges + empty_parent + self_loop + unspecified + duplicate + cycle_break == raw_links;
}

nlohmann::json CleaningReport::to_json() const {
    nlohmann::json by_source = nlohmann::json::object();
    for (const auto source : {LinkSource::tag, LinkSource::peft_config, LinkSource::card_base_model,
                              LinkSource::card_data_base_model}) {
        const auto it = raw_links_by_source.find(source);
        by_source[to_string(source)] = it == raw_links_by_source.end() ? 0 : it->second;
    }
    return {
        {"records", records},
        {"raw_links", raw_links},
        {"raw_links_by_source", by_source},
        {"dropped",
         {{"empty_parent", empty_parent},
          {"self_loop", self_loop},
          {"unspecified", unspecified},
          {"duplicate", duplicate},
          {"cycle_break", cycle_break}}},
        {"edges", edges},
        {"unparseable_tags", unparseable_tags},
        {"unspecified_rescued", unspecified_rescued},
        {"relation_conflicts", relation_conflicts},
        {"children_without_edges", children_without_edges},
        {"stub_nodes", stub_nodes},
        {"reconciles", reconciles()},
    };
}

BuildResult build_graph(const ingest::Snapshot& snapshot) {
    BuildResult result;
    CleaningReport& report = result.report;
    report.records = snapshot.records.size();
    if (snapshot.records.empty()) {
        spdlog::warn("empty snapshot: lineage graph has no nodes");
        return result;
    }

    std::vector<ParentLink> links;
    std::set<std::string> children_with_links;
    for (const auto& [id, record] : snapshot.records) {
        auto extracted = extract_links(record);
        report.unparseable_tags += extracted.unparseable_tags;
        if (!extracted.links.empty()) {
            children_with_links.insert(id);
        }
        for (auto& link : extracted.links) {
            ++report.raw_links_by_source[link.source];
            links.push_back(std::move(link));
        }
    }
    report.raw_links = links.size();

    // Empty parents, self-loops and unspecified relations go first.
    std::vector<const ParentLink*> typed;
    std::vector<std::pair<std::string_view, std::string_view>> unspecified_links;
    for (const auto& link : links) {
        if (link.parent_id.empty()) {
            ++report.empty_parent;
        } else if (link.parent_id == link.child_id) {
            ++report.self_loop;
        } else if (link.relation == RelationType::unspecified) {
            ++report.unspecified;
            unspecified_links.emplace_back(link.child_id, link.parent_id);
        } else {
            typed.push_back(&link);
        }
    }

    // One edge per ordered pair: tag-sourced links win, then first seen.
    std::map<std::pair<std::string_view, std::string_view>, std::vector<const ParentLink*>> by_pair;
    for (const ParentLink* link : typed) {
        by_pair[{link->child_id, link->parent_id}].push_back(link);
    }
    std::vector<const ParentLink*> kept;
    kept.reserve(by_pair.size());
    for (const auto& [pair, group] : by_pair) {
        const auto chosen =
            std::find_if(group.begin(), group.end(), [](const ParentLink* l) { return l->source == LinkSource::tag; });
        kept.push_back(chosen == group.end() ? group.front() : *chosen);
        report.duplicate += group.size() - 1;
        const bool conflict = std::any_of(group.begin(), group.end(), [&](const ParentLink* l) {
            return l->relation != group.front()->relation;
        });
        if (conflict) {
            ++report.relation_conflicts;
        }
    }
    for (const auto& pair : unspecified_links) {
        if (by_pair.contains(pair)) {
            ++report.unspecified_rescued;
        }
    }

    // Node universe: every record plus stub parents referenced by a kept edge.
    std::vector<Node> nodes;
    nodes.reserve(snapshot.records.size());
    for (const auto& [id, record] : snapshot.records) {
        nodes.push_back({id, record.created_at, analytics::extract_param_scale(id).raw, false});
    }
    std::set<std::string_view> stubs;
    for (const ParentLink* link : kept) {
        if (!snapshot.records.contains(link->parent_id)) {
            stubs.insert(link->parent_id);
        }
    }
    for (const auto stub : stubs) {
        nodes.push_back({std::string{stub}, std::nullopt, analytics::extract_param_scale(stub).raw, true});
    }
    report.stub_nodes = stubs.size();
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });

    const auto index_of = [&](std::string_view id) {
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                                         [](const Node& n, std::string_view key) { return n.id < key; });
        return static_cast<NodeId>(it - nodes.begin());
    };
    std::vector<Edge> edges;
    edges.reserve(kept.size());
    for (const ParentLink* link : kept) {
        edges.push_back({index_of(link->child_id), index_of(link->parent_id), link->relation});
    }

    // Break directed cycles by dropping the in-cycle edge whose child is oldest.
    std::vector<std::vector<std::size_t>> out_edges(nodes.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        out_edges[edges[e].child].push_back(e);
    }
    std::vector<bool> removed(edges.size(), false);
    for (;;) {
        const auto cycle = find_cycle(nodes.size(), out_edges, edges, removed);
        if (cycle.empty()) {
            break;
        }
        const auto victim = *std::min_element(cycle.begin(), cycle.end(), [&](std::size_t a, std::size_t b) {
            const Node& ca = nodes[edges[a].child];
            const Node& cb = nodes[edges[b].child];
            const auto ta = ca.created_at.value_or(Timestamp::max());
            const auto tb = cb.created_at.value_or(Timestamp::max());
            return std::tie(ta, edges[a].child, edges[a].parent) < std::tie(tb, edges[b].child, edges[b].parent);
        });
        removed[victim] = true;
        ++report.cycle_break;
        spdlog::warn("cycle broken by dropping {} -> {}", nodes[edges[victim].child].id,
                     nodes[edges[victim].parent].id);
    }

    std::vector<EdgeSpec> specs;
    specs.reserve(edges.size());
    std::set<NodeId> children_with_edges;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (!removed[e]) {
            specs.push_back({nodes[edges[e].child].id, nodes[edges[e].parent].id, edges[e].relation});
            children_with_edges.insert(edges[e].child);
        }
    }
    report.edges = specs.size();
    for (const auto& id : children_with_links) {
        if (!children_with_edges.contains(index_of(id))) {
            ++report.children_without_edges;
        }
    }

    result.graph = LineageGraph::from_parts(std::move(nodes), std::move(specs));
    return result;
}

}  // namespace lineage::graph
