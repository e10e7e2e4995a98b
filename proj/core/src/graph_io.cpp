#include <fstream>

#include <fmt/format.h>

#include "lineage/graph.hpp"

namespace lineage::graph {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw DataError{fmt::format("cannot write '{}'", path.string())};
    }
    return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab - start));
        if (tab == std::string_view::npos) {
            break;
        }
        start = tab + 1;
    }
    return fields;
}

}  // namespace

void write_edge_list(const LineageGraph& graph, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& e : graph.edges()) {
        out << graph.node(e.child).id << '\t' << graph.node(e.parent).id << '\t' << to_string(e.relation) << '\n';
    }
}

void write_node_table(const LineageGraph& graph, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        const Node& n = graph.node(v);
        out << n.id << '\t' << (n.created_at ? format_timestamp(*n.created_at) : std::string{}) << '\t'
            << (n.param_scale ? fmt::format("{:.0f}", *n.param_scale) : std::string{}) << '\t'
            << graph.roles(v).str() << '\n';
    }
}

LineageGraph read_graph(const std::filesystem::path& node_table, const std::filesystem::path& edge_list) {
    std::ifstream nodes_in{node_table};
    if (!nodes_in) {
        throw DataError{fmt::format("cannot read node table '{}'", node_table.string())};
    }
    std::ifstream edges_in{edge_list};
    if (!edges_in) {
        throw DataError{fmt::format("cannot read edge list '{}'", edge_list.string())};
    }

    std::vector<Node> nodes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(nodes_in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 4) {
            throw DataError{fmt::format("{}:{}: expected 4 fields", node_table.string(), line_no)};
        }
        Node node;
        node.id = std::string{fields[0]};
        if (!fields[1].empty()) {
            node.created_at = parse_timestamp(fields[1]);
            if (!node.created_at) {
                throw DataError{fmt::format("{}:{}: bad timestamp", node_table.string(), line_no)};
            }
        }
        node.stub = !node.created_at.has_value();
        if (!fields[2].empty()) {
            try {
                node.param_scale = std::stod(std::string{fields[2]});
            } catch (const std::exception&) {
                throw DataError{fmt::format("{}:{}: bad param_scale", node_table.string(), line_no)};
            }
        }
        nodes.push_back(std::move(node));
    }

    std::vector<EdgeSpec> edges;
    line_no = 0;
    while (std::getline(edges_in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 3) {
            throw DataError{fmt::format("{}:{}: expected 3 fields", edge_list.string(), line_no)};
        }
        const auto relation = parse_relation(fields[2]);
        if (!relation) {
            throw DataError{fmt::format("{}:{}: unknown relation '{}'", edge_list.string(), line_no, fields[2])};
        }
        edges.push_back({std::string{fields[0]}, std::string{fields[1]}, *relation});
    }
    return LineageGraph::from_parts(std::move(nodes), std::move(edges));
}

}  // namespace lineage::graph
