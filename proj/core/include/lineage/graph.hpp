#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lineage/ingest.hpp"
#include "lineage/timestamp.hpp"

namespace lineage::graph {

enum class RelationType : std::uint8_t { finetune, adapter, quantized, merge, unspecified };

/// The four substantive relation types, in canonical order.
inline constexpr std::array<RelationType, 4> kTypedRelations{
    RelationType::finetune, RelationType::adapter, RelationType::quantized, RelationType::merge};

const char* to_string(RelationType relation);
std::optional<RelationType> parse_relation(std::string_view text);

/// Metadata field a link was read from.
enum class LinkSource : std::uint8_t { tag, peft_config, card_base_model, card_data_base_model };

const char* to_string(LinkSource source);

/// Candidate child -> parent derivation edge before cleaning.
struct ParentLink {
    std::string child_id;
    std::string parent_id;
    RelationType relation = RelationType::unspecified;
    LinkSource source = LinkSource::tag;

    bool operator==(const ParentLink&) const = default;
};

struct ExtractedLinks {
    std::vector<ParentLink> links;
    /// base_model:* tags that matched neither accepted shape.
    std::size_t unparseable_tags = 0;
};

/// Phased extraction: base_model tags first; if they give nothing, the peft
/// config, then card_base_model, then card_data.base_model, stopping at the
/// first phase that yields links.
ExtractedLinks extract_links(const ingest::ModelRecord& record);

enum class Role : std::uint8_t { base = 1, finetuned = 2, adapter = 4, quantized = 8, merged = 16 };

inline constexpr std::array<Role, 5> kAllRoles{Role::base, Role::finetuned, Role::adapter, Role::quantized,
                                               Role::merged};

const char* to_string(Role role);
Role role_for(RelationType relation);

class RoleSet {
public:
    constexpr RoleSet() = default;

    constexpr bool contains(Role role) const { return (bits_ & static_cast<std::uint8_t>(role)) != 0; }
    constexpr void insert(Role role) { bits_ |= static_cast<std::uint8_t>(role); }
    constexpr bool empty() const { return bits_ == 0; }
    std::size_t size() const;

    /// Comma-joined in canonical role order, e.g. "finetuned,merged".
    std::string str() const;

    constexpr bool operator==(const RoleSet&) const = default;

private:
    std::uint8_t bits_ = 0;
};

using NodeId = std::uint32_t;

struct Node {
    std::string id;
    /// Unknown for stub parents that were referenced but never listed.
    std::optional<Timestamp> created_at;
    /// Parameter count parsed from the id, when it carries one.
    std::optional<double> param_scale;
    bool stub = false;
};

struct Edge {
    NodeId child = 0;
    NodeId parent = 0;
    RelationType relation = RelationType::finetune;
};

struct EdgeSpec {
    std::string child_id;
    std::string parent_id;
    RelationType relation = RelationType::finetune;
};

/// Immutable cleaned lineage DAG. Edges point child -> parent.
/// Node ids are assigned in lexicographic model-id order and every adjacency
/// list is sorted, so iteration order is reproducible.
class LineageGraph {
public:
    LineageGraph() = default;

    /// Validates and assembles a graph: unique node ids, known endpoints, no
    /// self-loops, no unspecified relations, one edge per ordered pair, no
    /// directed cycles. Throws DataError on any violation.
    static LineageGraph from_parts(std::vector<Node> nodes, std::vector<EdgeSpec> edges);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::span<const Node> nodes() const { return nodes_; }
    /// Sorted by (child, parent).
    std::span<const Edge> edges() const { return edges_; }
    const Node& node(NodeId id) const { return nodes_[id]; }

    std::optional<NodeId> find(std::string_view model_id) const;
    /// Throws std::out_of_range for unknown ids.
    NodeId at(std::string_view model_id) const;

    /// Parents of `child` (out-neighbours), ascending.
    std::span<const NodeId> parents(NodeId child) const;
    /// Children of `parent` (in-neighbours), ascending.
    std::span<const NodeId> children(NodeId parent) const;
    /// Edges leaving `child`, in the same order as parents(child).
    std::span<const Edge> outgoing(NodeId child) const;

    std::size_t in_degree(NodeId id) const { return children(id).size(); }
    std::size_t out_degree(NodeId id) const { return parents(id).size(); }

    bool has_edge(NodeId child, NodeId parent) const;
    RoleSet roles(NodeId id) const;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::vector<std::uint32_t> out_offsets_;
    std::vector<NodeId> out_targets_;
    std::vector<std::uint32_t> in_offsets_;
    std::vector<NodeId> in_sources_;
};

/// Throws std::out_of_range when `model_id` is not a node.
RoleSet node_roles(const LineageGraph& graph, std::string_view model_id);

/// Topological order (children before parents), or nullopt if a cycle exists.
std::optional<std::vector<NodeId>> topological_order(const LineageGraph& graph);

struct Census {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t stub_nodes = 0;
    std::map<Role, std::size_t> by_role;
    double mean_degree = 0.0;

    nlohmann::json to_json() const;
};

Census census(const LineageGraph& graph);

/// Drop counts by reason. edges == raw_links - (empty_parent + self_loop +
/// unspecified + duplicate + cycle_break) always holds.
struct CleaningReport {
    std::size_t records = 0;
    std::size_t raw_links = 0;
    std::map<LinkSource, std::size_t> raw_links_by_source;
    std::size_t empty_parent = 0;
    std::size_t self_loop = 0;
    std::size_t unspecified = 0;
    std::size_t duplicate = 0;
    std::size_t cycle_break = 0;
    std::size_t edges = 0;

    std::size_t unparseable_tags = 0;
    /// Unspecified links whose pair survived through a typed link.
    std::size_t unspecified_rescued = 0;
    /// Pairs declared with two or more distinct typed relations.
    std::size_t relation_conflicts = 0;
    /// Records that produced links but ended with no outgoing edge.
    std::size_t children_without_edges = 0;
    std::size_t stub_nodes = 0;

    bool reconciles() const;
    nlohmann::json to_json() const;
};

struct BuildResult {
    LineageGraph graph;
    CleaningReport report;
};

BuildResult build_graph(const ingest::Snapshot& snapshot);

// Exports: TAB-separated, no header, sorted by model id.
//   edges.tsv  child_id  parent_id  relation
//   nodes.tsv  model_id  created_at  param_scale  roles
void write_edge_list(const LineageGraph& graph, const std::filesystem::path& path);
void write_node_table(const LineageGraph& graph, const std::filesystem::path& path);
LineageGraph read_graph(const std::filesystem::path& node_table, const std::filesystem::path& edge_list);

}  // namespace lineage::graph
