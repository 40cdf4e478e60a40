#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "trendkit/error.hpp"
#include "trendkit/graphs.hpp"
#include "trendkit/rng.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace trendkit;
using graphs::CoOccurrenceGraph;
using graphs::GraphKind;

namespace {

bib::BibRecord doc(std::vector<std::string> author_labels) {
    bib::BibRecord r;
    for (const auto& name : author_labels) {
        bib::AuthorName a;
        a.family = name;
        a.normalized = name; // tests feed already-normalized labels
        r.authors.push_back(a);
    }
    return r;
}

bib::YearSlice slice_of(std::vector<bib::BibRecord> records) {
    bib::YearSlice s;
    s.label = "test";
    s.records = std::move(records);
    return s;
}

// Label-keyed view, independent of id assignment order.
struct LabeledGraph {
    std::map<std::string, std::uint32_t> nodes;
    std::map<std::pair<std::string, std::string>, std::uint32_t> edges;
};

LabeledGraph by_label(const CoOccurrenceGraph& g) {
    LabeledGraph out;
    std::map<std::size_t, std::string> label;
    for (const auto& n : g.nodes) {
        label[n.id] = n.label;
        out.nodes[n.label] = n.weight;
    }
    for (const auto& e : g.edges) {
        auto key = std::minmax(label[e.a], label[e.b]);
        out.edges[key] = e.weight;
    }
    return out;
}

// Brute-force oracle: count docs per entity and docs per unordered pair.
LabeledGraph oracle(const std::vector<std::vector<std::string>>& docs) {
    LabeledGraph out;
    for (const auto& d : docs) {
        std::set<std::string> uniq(d.begin(), d.end());
        for (const auto& e : uniq) out.nodes[e] += 1;
        for (auto i = uniq.begin(); i != uniq.end(); ++i) {
            auto j = i;
            for (++j; j != uniq.end(); ++j) out.edges[{*i, *j}] += 1;
        }
    }
    return out;
}

} // namespace

TEST_CASE("two documents with the same author pair") {
    auto g = graphs::build_cooccurrence(slice_of({doc({"a", "b"}), doc({"b", "a"})}),
                                        GraphKind::Author);
    REQUIRE(g.nodes.size() == 2);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.nodes[0].label == "a");
    CHECK(g.nodes[0].weight == 2);
    CHECK(g.nodes[1].label == "b");
    CHECK(g.nodes[1].weight == 2);
    CHECK(g.edges[0].a == 0);
    CHECK(g.edges[0].b == 1);
    CHECK(g.edges[0].weight == 2);
}

TEST_CASE("single-author document contributes a node and no edges") {
    auto g = graphs::build_cooccurrence(slice_of({doc({"solo"})}), GraphKind::Author);
    REQUIRE(g.nodes.size() == 1);
    CHECK(g.nodes[0].weight == 1);
    CHECK(g.edges.empty());
}

TEST_CASE("duplicate author within one document counts once, no self-loop") {
    auto g = graphs::build_cooccurrence(slice_of({doc({"a", "a", "b"})}), GraphKind::Author);
    REQUIRE(g.nodes.size() == 2);
    CHECK(g.nodes[0].weight == 1);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].weight == 1);
    for (const auto& e : g.edges) CHECK(e.a < e.b);
}

TEST_CASE("node ids follow first appearance across documents") {
    auto g = graphs::build_cooccurrence(
        slice_of({doc({"c", "a"}), doc({"b", "a"}), doc({"b", "c"})}), GraphKind::Author);
    REQUIRE(g.nodes.size() == 3);
    CHECK(g.nodes[0].label == "c");
    CHECK(g.nodes[1].label == "a");
    CHECK(g.nodes[2].label == "b");
    for (std::size_t i = 0; i < g.nodes.size(); ++i) CHECK(g.nodes[i].id == i);
}

TEST_CASE("forty-document corpus matches the all-pairs counting oracle") {
    Rng rng(40404);
    std::vector<std::string> pool;
    for (int i = 0; i < 12; ++i) pool.push_back("author" + std::to_string(i));

    std::vector<std::vector<std::string>> raw;
    std::vector<bib::BibRecord> records;
    for (int d = 0; d < 40; ++d) {
        std::size_t n = 1 + rng.index(5); // 1..5 authors, repeats allowed
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) names.push_back(pool[rng.index(pool.size())]);
        raw.push_back(names);
        records.push_back(doc(names));
    }

    auto g = graphs::build_cooccurrence(slice_of(records), GraphKind::Author);
    auto got = by_label(g);
    auto want = oracle(raw);
    CHECK(got.nodes == want.nodes);
    CHECK(got.edges == want.edges);
}

TEST_CASE("country graph resolves affiliations and counts a country once per doc") {
    auto table = bib::CountryTable::from_string(
        "India = India\nUSA = United States\nUnited States = United States\n");
    bib::BibRecord r1;
    r1.affiliations = {"Dept. of Mech. Eng., IIT Delhi, India",
                       "School of Management, IIT Bombay, India",
                       "Smith Lab, MIT, USA"};
    bib::BibRecord r2;
    r2.affiliations = {"Some Institute, United States"};

    auto g = graphs::build_cooccurrence(slice_of({r1, r2}), GraphKind::Country, &table);
    auto view = by_label(g);
    REQUIRE(view.nodes.size() == 2);
    CHECK(view.nodes.at("India") == 1); // two Indian affiliations, one doc
    CHECK(view.nodes.at("United States") == 2);
    REQUIRE(view.edges.size() == 1);
    CHECK(view.edges.begin()->second == 1);
}

TEST_CASE("country graph without a table is a configuration error") {
    CHECK_THROWS_WITH_AS(graphs::build_cooccurrence(slice_of({}), GraphKind::Country),
                         doctest::Contains("country table"), Error);
}

TEST_CASE("contribution filter with threshold zero returns the same graph") {
    auto g = graphs::build_cooccurrence(
        slice_of({doc({"a", "b"}), doc({"b", "c"}), doc({"c"})}), GraphKind::Author);
    auto f = graphs::filter_by_contribution(g, 0.0, 3);
    CHECK(f.nodes == g.nodes);
    CHECK(f.edges == g.edges);
}

TEST_CASE("contribution filter removes a weight-1 node out of 1000 documents") {
    CoOccurrenceGraph g;
    g.nodes = {{0, "rare", 1}, {1, "common", 600}};
    g.edges = {{0, 1, 1}};
    auto f = graphs::filter_by_contribution(g, 0.01, 1000);
    REQUIRE(f.nodes.size() == 1);
    CHECK(f.nodes[0].label == "common");
    CHECK(f.nodes[0].id == 1); // id preserved, not renumbered
    CHECK(f.edges.empty());
}

TEST_CASE("contribution filter is strict: exactly-at-threshold nodes are dropped") {
    CoOccurrenceGraph g;
    g.nodes = {{0, "at", 10}, {1, "above", 11}};
    auto f = graphs::filter_by_contribution(g, 0.01, 1000);
    REQUIRE(f.nodes.size() == 1);
    CHECK(f.nodes[0].label == "above");
}

TEST_CASE("contribution filter rejects bad thresholds and zero totals") {
    CoOccurrenceGraph g;
    CHECK_THROWS_AS(graphs::filter_by_contribution(g, -0.1, 10), Error);
    CHECK_THROWS_AS(graphs::filter_by_contribution(g, 1.0, 10), Error);
    CHECK_THROWS_AS(graphs::filter_by_contribution(g, 0.1, 0), Error);
}

TEST_CASE("raising the threshold only shrinks the kept node set") {
    Rng rng(777);
    std::vector<bib::BibRecord> records;
    std::vector<std::string> pool;
    for (int i = 0; i < 8; ++i) pool.push_back("e" + std::to_string(i));
    for (int d = 0; d < 60; ++d) {
        std::vector<std::string> names;
        std::size_t n = 1 + rng.index(4);
        for (std::size_t i = 0; i < n; ++i) names.push_back(pool[rng.index(pool.size())]);
        records.push_back(doc(names));
    }
    auto g = graphs::build_cooccurrence(slice_of(records), GraphKind::Author);

    std::set<std::size_t> prev;
    for (const auto& n : g.nodes) prev.insert(n.id);
    for (double t : {0.02, 0.05, 0.1, 0.2, 0.4}) {
        auto f = graphs::filter_by_contribution(g, t, 60);
        std::set<std::size_t> kept;
        for (const auto& n : f.nodes) kept.insert(n.id);
        CHECK(std::includes(prev.begin(), prev.end(), kept.begin(), kept.end()));
        prev = kept;
    }
}

TEST_CASE("triangle centrality: every node has degree 2 and weighted degree 2") {
    auto g = graphs::build_cooccurrence(slice_of({doc({"a", "b"}), doc({"b", "c"}),
                                                  doc({"a", "c"})}),
                                        GraphKind::Author);
    auto cent = graphs::degree_centrality(g);
    REQUIRE(cent.size() == 3);
    for (const auto& [id, c] : cent) {
        CHECK(c.first == 2);
        CHECK(c.second == 2);
    }
}

TEST_CASE("star centrality: the hub dominates") {
    auto g = graphs::build_cooccurrence(
        slice_of({doc({"hub", "s1"}), doc({"hub", "s2"}), doc({"hub", "s3"})}),
        GraphKind::Author);
    auto cent = graphs::degree_centrality(g);
    CHECK(cent[0].first == 3); // hub got id 0
    CHECK(cent[0].second == 3);
    for (std::size_t id = 1; id <= 3; ++id) {
        CHECK(cent[id].first == 1);
        CHECK(cent[id].second == 1);
    }
}

TEST_CASE("centrality equals brute-force adjacency sums on a random graph") {
    Rng rng(1234);
    std::vector<std::vector<std::string>> raw;
    std::vector<bib::BibRecord> records;
    std::vector<std::string> pool;
    for (int i = 0; i < 10; ++i) pool.push_back("p" + std::to_string(i));
    for (int d = 0; d < 30; ++d) {
        std::vector<std::string> names;
        std::size_t n = 2 + rng.index(3);
        for (std::size_t i = 0; i < n; ++i) names.push_back(pool[rng.index(pool.size())]);
        raw.push_back(names);
        records.push_back(doc(names));
    }
    auto g = graphs::build_cooccurrence(slice_of(records), GraphKind::Author);
    auto cent = graphs::degree_centrality(g);

    for (const auto& n : g.nodes) {
        std::size_t degree = 0;
        std::uint64_t weighted = 0;
        for (const auto& e : g.edges) {
            if (e.a == n.id || e.b == n.id) {
                degree += 1;
                weighted += e.weight;
            }
        }
        CHECK(cent[n.id].first == degree);
        CHECK(cent[n.id].second == weighted);
    }

    SUBCASE("handshake: degrees sum to twice the edge count") {
        std::size_t total = 0;
        for (const auto& [id, c] : cent) total += c.first;
        CHECK(total == 2 * g.edges.size());
    }

    SUBCASE("every edge weight is bounded by its lighter endpoint") {
        for (const auto& e : g.edges) {
            CHECK(e.weight <= std::min(g.find(e.a)->weight, g.find(e.b)->weight));
        }
    }

    SUBCASE("document order does not change the labeled graph") {
        auto reversed = records;
        std::reverse(reversed.begin(), reversed.end());
        auto g2 = graphs::build_cooccurrence(slice_of(reversed), GraphKind::Author);
        auto a = by_label(g);
        auto b = by_label(g2);
        CHECK(a.nodes == b.nodes);
        CHECK(a.edges == b.edges);
    }
}

TEST_CASE("graphml export carries labels and weights") {
    auto g = graphs::build_cooccurrence(slice_of({doc({"smith, j.", "doe & co, a."})}),
                                        GraphKind::Author);
    std::ostringstream out;
    graphs::write_graphml(out, g);
    std::string xml = out.str();
    CHECK(xml.find("<?xml version=\"1.0\"") == 0);
    CHECK(xml.find("edgedefault=\"undirected\"") != std::string::npos);
    CHECK(xml.find("<data key=\"label\">smith, j.</data>") != std::string::npos);
    CHECK(xml.find("doe &amp; co, a.") != std::string::npos); // escaped
    CHECK(xml.find("source=\"n0\" target=\"n1\"") != std::string::npos);
    CHECK(xml.find("<data key=\"w\">1</data>") != std::string::npos);
}

TEST_CASE("dot export states undirected edges with weights") {
    auto g = graphs::build_cooccurrence(slice_of({doc({"a", "b"}), doc({"a", "b"})}),
                                        GraphKind::Author);
    std::ostringstream out;
    graphs::write_dot(out, g);
    std::string dot = out.str();
    CHECK(dot.find("graph authors {") == 0);
    CHECK(dot.find("n0 [label=\"a\", weight=2];") != std::string::npos);
    CHECK(dot.find("n0 -- n1 [weight=2];") != std::string::npos);
}

TEST_CASE("node table csv quotes comma-bearing author labels") {
    auto g = graphs::build_cooccurrence(slice_of({doc({"smith, j.k."})}), GraphKind::Author);
    std::ostringstream out;
    graphs::write_node_table_csv(out, g);
    CHECK(out.str() == "id,label,weight\n0,\"smith, j.k.\",1\n");
}

TEST_CASE("centrality csv ranks by weighted degree with id tiebreak") {
    auto g = graphs::build_cooccurrence(
        slice_of({doc({"a", "b"}), doc({"a", "b"}), doc({"c", "d"})}), GraphKind::Author);
    std::ostringstream out;
    graphs::write_centrality_csv(out, g);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "id,label,degree,weighted_degree");
    std::vector<std::string> rows;
    while (std::getline(in, line)) rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "0,a,1,2");
    CHECK(rows[1] == "1,b,1,2"); // weighted tie with a -> lower id first
    CHECK(rows[2] == "2,c,1,1");
    CHECK(rows[3] == "3,d,1,1");
}
