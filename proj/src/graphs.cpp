#include "trendkit/graphs.hpp"

#include "trendkit/error.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <unordered_map>

namespace trendkit::graphs {
namespace {

std::vector<std::string> doc_entities(const bib::BibRecord& rec, GraphKind kind,
                                      const bib::CountryTable* table) {
    std::vector<std::string> out;
    if (kind == GraphKind::Author) {
        for (const auto& a : rec.authors) {
            if (a.normalized.empty()) continue;
            if (std::find(out.begin(), out.end(), a.normalized) == out.end())
                out.push_back(a.normalized);
        }
    } else {
        auto extraction = bib::extract_countries(rec, *table);
        out = std::move(extraction.countries); // already unique, first-appearance order
    }
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string dot_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

} // namespace

const GraphNode* CoOccurrenceGraph::find(std::size_t id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const GraphNode& n, std::size_t v) { return n.id < v; });
    return (it != nodes.end() && it->id == id) ? &*it : nullptr;
}

CoOccurrenceGraph build_cooccurrence(const bib::YearSlice& slice, GraphKind kind,
                                     const bib::CountryTable* table) {
    if (kind == GraphKind::Country && table == nullptr)
        throw Error(ErrorCode::BadConfig, "country graph requires a country table");

    CoOccurrenceGraph graph;
    graph.kind = kind;
    std::unordered_map<std::string, std::size_t> ids;
    std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> edge_weight;

    for (const auto& rec : slice.records) {
        std::vector<std::string> entities = doc_entities(rec, kind, table);
        std::vector<std::size_t> doc_ids;
        doc_ids.reserve(entities.size());
        for (const auto& e : entities) {
            auto [it, inserted] = ids.emplace(e, graph.nodes.size());
            if (inserted) graph.nodes.push_back({it->second, e, 0});
            graph.nodes[it->second].weight += 1;
            doc_ids.push_back(it->second);
        }
        for (std::size_t i = 0; i < doc_ids.size(); ++i)
            for (std::size_t j = i + 1; j < doc_ids.size(); ++j) {
                auto [a, b] = std::minmax(doc_ids[i], doc_ids[j]);
                edge_weight[{a, b}] += 1;
            }
    }

    graph.edges.reserve(edge_weight.size());
    for (const auto& [key, w] : edge_weight) graph.edges.push_back({key.first, key.second, w});
    return graph;
}

CoOccurrenceGraph filter_by_contribution(const CoOccurrenceGraph& graph, double threshold,
                                         std::size_t total_docs) {
    if (!(threshold >= 0.0 && threshold < 1.0))
        throw Error(ErrorCode::BadConfig, "contribution threshold must be in [0, 1)");
    if (total_docs == 0)
        throw Error(ErrorCode::BadConfig, "contribution filter needs a nonzero document count");

    CoOccurrenceGraph out;
    out.kind = graph.kind;
    std::set<std::size_t> kept;
    for (const auto& n : graph.nodes) {
        if (static_cast<double>(n.weight) / static_cast<double>(total_docs) > threshold) {
            out.nodes.push_back(n);
            kept.insert(n.id);
        }
    }
    for (const auto& e : graph.edges)
        if (kept.count(e.a) && kept.count(e.b)) out.edges.push_back(e);
    return out;
}

std::map<std::size_t, std::pair<std::size_t, std::uint64_t>> degree_centrality(
    const CoOccurrenceGraph& graph) {
    std::map<std::size_t, std::pair<std::size_t, std::uint64_t>> out;
    for (const auto& n : graph.nodes) out[n.id] = {0, 0};
    for (const auto& e : graph.edges) {
        out[e.a].first += 1;
        out[e.a].second += e.weight;
        out[e.b].first += 1;
        out[e.b].second += e.weight;
    }
    return out;
}

static std::string graph_name(const CoOccurrenceGraph& graph, const std::string& name) {
    if (!name.empty()) return name;
    return graph.kind == GraphKind::Author ? "authors" : "countries";
}

void write_graphml(std::ostream& out, const CoOccurrenceGraph& graph, const std::string& name) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
        << "  <key id=\"weight\" for=\"node\" attr.name=\"weight\" attr.type=\"int\"/>\n"
        << "  <key id=\"w\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n"
        << "  <graph id=\"" << graph_name(graph, name) << "\" edgedefault=\"undirected\">\n";
    for (const auto& n : graph.nodes) {
        out << "    <node id=\"n" << n.id << "\">\n"
            << "      <data key=\"label\">" << xml_escape(n.label) << "</data>\n"
            << "      <data key=\"weight\">" << n.weight << "</data>\n"
            << "    </node>\n";
    }
    std::size_t eid = 0;
    for (const auto& e : graph.edges) {
        out << "    <edge id=\"e" << eid++ << "\" source=\"n" << e.a << "\" target=\"n" << e.b
            << "\">\n"
            << "      <data key=\"w\">" << e.weight << "</data>\n"
            << "    </edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

void write_dot(std::ostream& out, const CoOccurrenceGraph& graph, const std::string& name) {
    out << "graph " << graph_name(graph, name) << " {\n";
    for (const auto& n : graph.nodes)
        out << "  n" << n.id << " [label=\"" << dot_escape(n.label) << "\", weight=" << n.weight
            << "];\n";
    for (const auto& e : graph.edges)
        out << "  n" << e.a << " -- n" << e.b << " [weight=" << e.weight << "];\n";
    out << "}\n";
}

void write_node_table_csv(std::ostream& out, const CoOccurrenceGraph& graph) {
    out << "id,label,weight\n";
    for (const auto& n : graph.nodes)
        out << n.id << ',' << csv_quote(n.label) << ',' << n.weight << '\n';
}

void write_centrality_csv(std::ostream& out, const CoOccurrenceGraph& graph) {
    auto cent = degree_centrality(graph);
    std::vector<const GraphNode*> order;
    order.reserve(graph.nodes.size());
    for (const auto& n : graph.nodes) order.push_back(&n);
    std::stable_sort(order.begin(), order.end(), [&](const GraphNode* x, const GraphNode* y) {
        const auto& cx = cent[x->id];
        const auto& cy = cent[y->id];
        if (cx.second != cy.second) return cx.second > cy.second;
        return x->id < y->id;
    });
    out << "id,label,degree,weighted_degree\n";
    for (const GraphNode* n : order) {
        const auto& c = cent[n->id];
        out << n->id << ',' << csv_quote(n->label) << ',' << c.first << ',' << c.second << '\n';
    }
}

} // namespace trendkit::graphs
