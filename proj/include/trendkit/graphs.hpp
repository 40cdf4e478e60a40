#ifndef TRENDKIT_GRAPHS_HPP
#define TRENDKIT_GRAPHS_HPP

#include "trendkit/bib.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace trendkit::graphs {

enum class GraphKind { Author, Country };

struct GraphNode {
    std::size_t id = 0;     // stable by first appearance; preserved by filters
    std::string label;
    std::uint32_t weight = 0; // number of documents the entity appears in

    bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
    std::size_t a = 0; // a < b always
    std::size_t b = 0;
    std::uint32_t weight = 0; // number of documents where both appear

    bool operator==(const GraphEdge&) const = default;
};

struct CoOccurrenceGraph {
    GraphKind kind = GraphKind::Author;
    std::vector<GraphNode> nodes; // ascending id
    std::vector<GraphEdge> edges; // ascending (a, b)

    const GraphNode* find(std::size_t id) const;
};

// Entities are normalized author names, or canonical countries resolved
// through `table` (required for the country kind). Within one document each
// entity counts once; every unordered pair of distinct entities increments
// one edge.
CoOccurrenceGraph build_cooccurrence(const bib::YearSlice& slice, GraphKind kind,
                                     const bib::CountryTable* table = nullptr);

// Keeps nodes with weight/total_docs > threshold and drops incident edges of
// removed nodes. Node ids are preserved, not renumbered.
CoOccurrenceGraph filter_by_contribution(const CoOccurrenceGraph& graph, double threshold,
                                         std::size_t total_docs);

// node id -> (degree, weighted degree)
std::map<std::size_t, std::pair<std::size_t, std::uint64_t>> degree_centrality(
    const CoOccurrenceGraph& graph);

// `name` overrides the kind-derived graph id ("authors"/"countries").
void write_graphml(std::ostream& out, const CoOccurrenceGraph& graph,
                   const std::string& name = "");
void write_dot(std::ostream& out, const CoOccurrenceGraph& graph, const std::string& name = "");
// id,label,weight table (the id <-> name mapping for plots)
void write_node_table_csv(std::ostream& out, const CoOccurrenceGraph& graph);
// id,label,degree,weighted_degree descending by weighted degree, ties by id
void write_centrality_csv(std::ostream& out, const CoOccurrenceGraph& graph);

} // namespace trendkit::graphs

#endif
