#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "trendkit/cluster.hpp"
#include "trendkit/error.hpp"
#include "trendkit/rng.hpp"
#include "trendkit/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

using namespace trendkit;
using namespace trendkit::topics;

namespace {

// Ground-truth generative corpus: three disjoint 10-word lexicons, 100 docs
// of 50 tokens, each doc drawn from a single lexicon.
struct Recovery {
    std::vector<std::vector<std::string>> lexicons;
    std::vector<int> labels;
    text::Vocabulary vocab;
    text::DocumentTermMatrix dtm;
    TopicModel model;
    LdaConfig config;
};

const Recovery& recovery() {
    static const Recovery fixture = [] {
        Recovery r;
        r.lexicons = {
            {"inventori", "stock", "replenish", "warehous", "order", "batch", "holding",
             "reorder", "lot", "size"},
            {"schedul", "machin", "job", "shop", "makespan", "dispatch", "sequenc", "tardi",
             "setup", "flow"},
            {"suppli", "chain", "supplier", "network", "logist", "distribut", "procur",
             "vendor", "demand", "coordin"}};
        Rng rng(551);
        std::vector<text::TokenDoc> docs;
        for (int d = 0; d < 100; ++d) {
            int label = d % 3;
            text::TokenDoc doc;
            doc.doc_id = d;
            doc.year = 2011 + d % 7;
            for (int t = 0; t < 50; ++t) {
                doc.stems.push_back(
                    r.lexicons[static_cast<std::size_t>(label)][rng.index(10)]);
            }
            docs.push_back(std::move(doc));
            r.labels.push_back(label);
        }
        std::tie(r.vocab, r.dtm) = text::build_dtm(docs);
        r.config.topics = 3;
        r.config.iterations = 2000;
        r.config.burn_in = 500;
        r.config.seed = 2017;
        r.model = lda_fit(r.dtm, r.vocab, r.config);
        return r;
    }();
    return fixture;
}

// Map each fitted topic to the generating lexicon with the largest top-10
// overlap; returns overlap counts per lexicon.
std::vector<std::size_t> lexicon_overlap(const Recovery& r, std::vector<std::size_t>& topic_of) {
    auto tops = topic_top_words(r.model, r.vocab, 10);
    std::vector<std::size_t> best_overlap(3, 0);
    topic_of.assign(3, 0); // lexicon -> fitted topic
    for (std::size_t lex = 0; lex < 3; ++lex) {
        std::set<std::string> truth(r.lexicons[lex].begin(), r.lexicons[lex].end());
        for (std::size_t k = 0; k < 3; ++k) {
            std::size_t overlap = 0;
            for (const auto& w : tops[k]) overlap += truth.count(w);
            if (overlap > best_overlap[lex]) {
                best_overlap[lex] = overlap;
                topic_of[lex] = k;
            }
        }
    }
    return best_overlap;
}

} // namespace

TEST_CASE("K=1 degenerates to the smoothed corpus unigram distribution") {
    auto [vocab, dtm] = text::build_dtm({{0, 2000, {"a", "a", "b"}}, {1, 2000, {"b", "c"}}});
    LdaConfig config;
    config.topics = 1;
    config.iterations = 10;
    config.burn_in = 1;
    auto model = lda_fit(dtm, vocab, config);

    REQUIRE(model.theta.size() == 2);
    for (const auto& row : model.theta) {
        REQUIRE(row.size() == 1);
        CHECK(row[0] == 1.0);
    }
    // phi = (count + beta) / (N + V*beta) with counts a=2, b=2, c=1
    const double denom = 5.0 + 3.0 * config.beta;
    CHECK(model.phi[0][0] == doctest::Approx((2 + config.beta) / denom).epsilon(1e-12));
    CHECK(model.phi[0][1] == doctest::Approx((2 + config.beta) / denom).epsilon(1e-12));
    CHECK(model.phi[0][2] == doctest::Approx((1 + config.beta) / denom).epsilon(1e-12));
}

TEST_CASE("identical single-word docs produce identical theta rows") {
    // vocabulary is the single word, so K <= V allows only K = 1
    std::vector<text::TokenDoc> docs;
    for (int d = 0; d < 20; ++d) docs.push_back({d, 2000, {"alpha"}});
    auto [vocab, dtm] = text::build_dtm(docs);
    REQUIRE(vocab.size() == 1);

    LdaConfig config;
    config.topics = 1;
    config.iterations = 50;
    config.burn_in = 10;
    config.seed = 5;
    auto model = lda_fit(dtm, vocab, config);

    for (const auto& row : model.theta) {
        CHECK(row == model.theta[0]);
        CHECK(row[0] == 1.0);
    }
    CHECK(model.phi[0][0] > 0.99); // concentrates on the only word
}

TEST_CASE("recovery: disjoint topic lexicons are found") {
    const auto& r = recovery();
    std::vector<std::size_t> topic_of;
    auto overlaps = lexicon_overlap(r, topic_of);
    for (std::size_t lex = 0; lex < 3; ++lex) {
        CHECK_MESSAGE(overlaps[lex] >= 8, "lexicon ", lex, " recovered only ", overlaps[lex],
                      " of 10 top words");
    }
    // the three lexicons map to three distinct topics
    std::set<std::size_t> distinct(topic_of.begin(), topic_of.end());
    CHECK(distinct.size() == 3);

    SUBCASE("top words never escape the union of generating lexicons") {
        std::set<std::string> all;
        for (const auto& lex : r.lexicons) all.insert(lex.begin(), lex.end());
        for (const auto& words : topic_top_words(r.model, r.vocab, 10)) {
            for (const auto& w : words) CHECK(all.count(w) == 1);
        }
    }
    SUBCASE("dominant topic matches the generating label for >= 95% of docs") {
        std::size_t hits = 0;
        for (std::size_t d = 0; d < 100; ++d) {
            if (dominant_topic(r.model, d) == topic_of[static_cast<std::size_t>(r.labels[d])]) {
                ++hits;
            }
        }
        CHECK(hits >= 95);
    }
}

TEST_CASE("recovery: numeric invariants hold") {
    const auto& r = recovery();
    SUBCASE("phi and theta rows sum to one") {
        for (const auto& row : r.model.phi) {
            double sum = std::accumulate(row.begin(), row.end(), 0.0);
            CHECK(std::abs(sum - 1.0) <= 1e-9);
            for (double v : row) CHECK(v > 0.0);
        }
        for (const auto& row : r.model.theta) {
            double sum = std::accumulate(row.begin(), row.end(), 0.0);
            CHECK(std::abs(sum - 1.0) <= 1e-9);
            for (double v : row) CHECK(v > 0.0);
        }
    }
    SUBCASE("final assignments conserve token counts") {
        REQUIRE(r.model.z.size() == 100 * 50);
        // rebuild counts from z using the documented token order
        std::vector<std::vector<int>> n_dk(100, std::vector<int>(3, 0));
        std::vector<long> n_k(3, 0);
        std::size_t i = 0;
        for (std::size_t d = 0; d < r.dtm.rows.size(); ++d) {
            for (const auto& [term, count] : r.dtm.rows[d]) {
                for (std::uint32_t c = 0; c < count; ++c, ++i) {
                    auto k = static_cast<std::size_t>(r.model.z[i]);
                    ++n_dk[d][k];
                    ++n_k[k];
                }
            }
        }
        for (std::size_t d = 0; d < 100; ++d) {
            CHECK(std::accumulate(n_dk[d].begin(), n_dk[d].end(), 0) == 50);
        }
        CHECK(std::accumulate(n_k.begin(), n_k.end(), 0L) == 5000);
    }
    SUBCASE("log-likelihood trace rises and plateaus") {
        const auto& trace = r.model.log_likelihood_trace;
        REQUIRE(trace.size() == 2000);
        double first = std::accumulate(trace.begin(), trace.begin() + 100, 0.0) / 100.0;
        double last = std::accumulate(trace.end() - 100, trace.end(), 0.0) / 100.0;
        CHECK(last >= first);
        for (double v : trace) CHECK(std::isfinite(v));
    }
    SUBCASE("mixtures are soft while k-means is hard") {
        // some document's second-largest theta entry exceeds 0.05
        double best_second = 0.0;
        for (const auto& row : r.model.theta) {
            std::vector<double> sorted(row.begin(), row.end());
            std::sort(sorted.rbegin(), sorted.rend());
            best_second = std::max(best_second, sorted[1]);
        }
        CHECK(best_second > 0.05);

        auto weighted = cluster::tfidf(r.dtm);
        auto km = cluster::kmeans(weighted, 3, 1);
        CHECK(km.assignment.size() == 100); // exactly one cluster per doc
        for (int a : km.assignment) {
            CHECK(a >= 0);
            CHECK(a < 3);
        }
    }
}

TEST_CASE("lda_fit is deterministic") {
    auto [vocab, dtm] = text::build_dtm({{0, 2000, {"a", "b", "a", "c"}},
                                         {1, 2001, {"c", "d", "d"}},
                                         {2, 2002, {"a", "d"}}});
    LdaConfig config;
    config.topics = 2;
    config.iterations = 200;
    config.burn_in = 50;
    config.seed = 33;
    auto m1 = lda_fit(dtm, vocab, config);
    auto m2 = lda_fit(dtm, vocab, config);
    CHECK(m1.phi == m2.phi);
    CHECK(m1.theta == m2.theta);
    CHECK(m1.z == m2.z);
    CHECK(m1.log_likelihood_trace == m2.log_likelihood_trace);
}

TEST_CASE("seeding a topic with a stem never lowers that stem's probability") {
    const auto& r = recovery();
    LdaConfig seeded = r.config;
    // push lexicon 0's words toward topic 0
    for (const auto& stem : r.lexicons[0]) {
        seeded.seed_words[0].emplace_back(stem, 50.0);
    }
    auto seeded_model = lda_fit(r.dtm, r.vocab, seeded);
    for (const auto& stem : r.lexicons[0]) {
        auto w = r.vocab.index.at(stem);
        CHECK(seeded_model.phi[0][w] >= r.model.phi[0][w]);
    }
}

TEST_CASE("dominant topic follows the worked mixture example") {
    TopicModel model;
    model.k = 3;
    model.theta = {{0.6, 0.3, 0.1}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
    CHECK(dominant_topic(model, 0) == 0);
    CHECK(dominant_topic(model, 1) == 0); // uniform row: tie goes to topic 0
    CHECK_THROWS_AS(dominant_topic(model, 2), Error);
    try {
        dominant_topic(model, 9);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DocOutOfRange);
    }
}

TEST_CASE("K=1 top words on a tiny corpus") {
    auto [vocab, dtm] = text::build_dtm({{0, 2000, {"a", "a", "b"}}});
    LdaConfig config;
    config.topics = 1;
    config.iterations = 5;
    config.burn_in = 0;
    auto model = lda_fit(dtm, vocab, config);
    auto tops = topic_top_words(model, vocab, 5);
    REQUIRE(tops.size() == 1);
    CHECK(tops[0] == std::vector<std::string>{"a", "b"});
}

TEST_CASE("joint log-likelihood has the hand-derived closed form for one token") {
    // D=1, V=1, one token: log p(w, z) = -log K for every alpha, beta
    text::DocumentTermMatrix dtm;
    dtm.n_docs = 1;
    dtm.n_terms = 1;
    dtm.rows = {{{0, 1}}};
    dtm.row_year = {2000};
    for (std::size_t k : {std::size_t{1}, std::size_t{2}, std::size_t{5}, std::size_t{64}}) {
        for (double alpha : {0.1, 1.0, 16.7}) {
            for (double beta : {0.01, 0.5}) {
                double ll = joint_log_likelihood(dtm, {0}, k, alpha, beta);
                CHECK(ll == doctest::Approx(-std::log(static_cast<double>(k))).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("validation errors") {
    auto [vocab, dtm] = text::build_dtm({{0, 2000, {"a", "b"}}});
    LdaConfig config;
    config.topics = 3; // only 2 vocabulary terms
    config.iterations = 5;
    config.burn_in = 0;
    try {
        lda_fit(dtm, vocab, config);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::KExceedsVocabulary);
    }

    auto [evocab, edtm] = text::build_dtm({{0, 2000, {}}});
    LdaConfig ok;
    ok.topics = 1;
    ok.iterations = 5;
    ok.burn_in = 0;
    try {
        lda_fit(edtm, evocab, ok);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyCorpus);
    }

    LdaConfig bad = ok;
    bad.burn_in = 5; // == iterations
    CHECK_THROWS_AS(lda_fit(dtm, vocab, bad), Error);
    bad = ok;
    bad.beta = 0.0;
    CHECK_THROWS_AS(lda_fit(dtm, vocab, bad), Error);
    bad = ok;
    bad.seed_words[0].emplace_back("a", -1.0);
    CHECK_THROWS_AS(lda_fit(dtm, vocab, bad), Error);
    bad = ok;
    bad.seed_words[7].emplace_back("a", 1.0); // topic id beyond K
    CHECK_THROWS_AS(lda_fit(dtm, vocab, bad), Error);
}

TEST_CASE("exports: theta csv and topic report json") {
    auto [vocab, dtm] = text::build_dtm({{0, 2000, {"a", "a", "b"}}, {1, 2001, {"b", "c"}}});
    LdaConfig config;
    config.topics = 2;
    config.iterations = 20;
    config.burn_in = 5;
    auto model = lda_fit(dtm, vocab, config);

    std::ostringstream theta;
    write_theta_csv(theta, model);
    CHECK(theta.str().rfind("doc_id,topic_0,topic_1\n0,", 0) == 0);

    std::ostringstream report;
    write_topic_report_json(report, model, vocab, 2);
    CHECK(report.str().find("\"topics\"") != std::string::npos);
    CHECK(report.str().find("\"stem\"") != std::string::npos);
}
