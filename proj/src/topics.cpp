#include "trendkit/topics.hpp"

#include "trendkit/error.hpp"
#include "trendkit/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace trendkit::topics {

namespace {

struct Counts {
    std::vector<std::vector<std::uint32_t>> n_dk; // D x K
    std::vector<std::vector<std::uint32_t>> n_kw; // K x V
    std::vector<std::uint64_t> n_k;               // K
    std::vector<std::uint64_t> n_d;               // D
};

struct Token {
    std::uint32_t doc;
    std::uint32_t word;
};

// Docs ascending, term ids ascending within a doc, repeats adjacent. Every
// consumer of assignment vectors relies on this order.
std::vector<Token> flatten(const text::DocumentTermMatrix& dtm) {
    std::vector<Token> tokens;
    for (std::size_t d = 0; d < dtm.rows.size(); ++d) {
        for (const auto& [term, count] : dtm.rows[d]) {
            for (std::uint32_t c = 0; c < count; ++c) {
                tokens.push_back({static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(term)});
            }
        }
    }
    return tokens;
}

Counts count_state(const text::DocumentTermMatrix& dtm, const std::vector<Token>& tokens,
                   const std::vector<int>& z, std::size_t k) {
    Counts c;
    c.n_dk.assign(dtm.n_docs, std::vector<std::uint32_t>(k, 0));
    c.n_kw.assign(k, std::vector<std::uint32_t>(dtm.n_terms, 0));
    c.n_k.assign(k, 0);
    c.n_d.assign(dtm.n_docs, 0);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto topic = static_cast<std::size_t>(z[i]);
        ++c.n_dk[tokens[i].doc][topic];
        ++c.n_kw[topic][tokens[i].word];
        ++c.n_k[topic];
        ++c.n_d[tokens[i].doc];
    }
    return c;
}

// beta matrix handled as symmetric base + sparse per-topic extras
struct Priors {
    double alpha;
    double beta;
    std::vector<std::vector<double>> extra_dense; // K x V or empty when unseeded
    std::vector<double> beta_sum;                 // per topic: V*beta + sum(extras)
};

double beta_kw(const Priors& p, std::size_t k, std::size_t w) {
    if (p.extra_dense.empty()) return p.beta;
    return p.beta + p.extra_dense[k][w];
}

double ll_from_counts(const Counts& c, const Priors& p, std::size_t k_topics, std::size_t n_terms) {
    double ll = 0.0;
    const double k_alpha = static_cast<double>(k_topics) * p.alpha;
    // p(z | alpha): terms with n_dk = 0 cancel exactly
    for (std::size_t d = 0; d < c.n_dk.size(); ++d) {
        ll += std::lgamma(k_alpha) - std::lgamma(static_cast<double>(c.n_d[d]) + k_alpha);
        for (std::size_t k = 0; k < k_topics; ++k) {
            if (c.n_dk[d][k] == 0) continue;
            ll += std::lgamma(static_cast<double>(c.n_dk[d][k]) + p.alpha) - std::lgamma(p.alpha);
        }
    }
    // p(w | z, beta)
    for (std::size_t k = 0; k < k_topics; ++k) {
        ll += std::lgamma(p.beta_sum[k]) -
              std::lgamma(static_cast<double>(c.n_k[k]) + p.beta_sum[k]);
        for (std::size_t w = 0; w < n_terms; ++w) {
            if (c.n_kw[k][w] == 0) continue;
            double b = beta_kw(p, k, w);
            ll += std::lgamma(static_cast<double>(c.n_kw[k][w]) + b) - std::lgamma(b);
        }
    }
    return ll;
}

Priors resolve_priors(const LdaConfig& config, const text::Vocabulary& vocab,
                      std::size_t n_terms) {
    Priors p;
    p.alpha = config.effective_alpha();
    p.beta = config.beta;
    p.beta_sum.assign(config.topics, static_cast<double>(n_terms) * config.beta);
    if (!config.seed_words.empty()) {
        p.extra_dense.assign(config.topics, std::vector<double>(n_terms, 0.0));
        for (const auto& [topic, words] : config.seed_words) {
            if (topic >= config.topics) {
                throw Error(ErrorCode::BadConfig,
                            "seed words reference topic " + std::to_string(topic) +
                                " but K=" + std::to_string(config.topics));
            }
            for (const auto& [stem, weight] : words) {
                if (weight <= 0.0) {
                    throw Error(ErrorCode::BadConfig, "seed weight for '" + stem +
                                                          "' must be positive");
                }
                auto it = vocab.index.find(stem);
                if (it == vocab.index.end()) continue; // stem absent from this corpus
                p.extra_dense[topic][it->second] += weight;
                p.beta_sum[topic] += weight;
            }
        }
    }
    return p;
}

} // namespace

TopicModel lda_fit(const text::DocumentTermMatrix& dtm, const text::Vocabulary& vocab,
                   const LdaConfig& config) {
    if (config.topics < 1) throw Error(ErrorCode::BadConfig, "K must be >= 1");
    if (config.alpha == 0.0 || config.beta <= 0.0) {
        throw Error(ErrorCode::BadConfig, "alpha and beta must be positive");
    }
    if (config.burn_in >= config.iterations) {
        throw Error(ErrorCode::BadConfig, "burn_in must be smaller than iterations");
    }
    auto tokens = flatten(dtm);
    if (tokens.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "no tokens to sample; every document is empty");
    }
    if (config.topics > dtm.n_terms) {
        throw Error(ErrorCode::KExceedsVocabulary,
                    "K=" + std::to_string(config.topics) + " exceeds vocabulary size " +
                        std::to_string(dtm.n_terms));
    }

    const std::size_t K = config.topics;
    const std::size_t V = dtm.n_terms;
    Priors priors = resolve_priors(config, vocab, V);

    Rng rng(config.seed);
    std::vector<int> z(tokens.size());
    for (auto& t : z) t = static_cast<int>(rng.below(K));
    Counts counts = count_state(dtm, tokens, z, K);

    TopicModel model;
    model.k = K;
    model.log_likelihood_trace.reserve(config.iterations);

    std::vector<double> score(K);
    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const auto d = tokens[i].doc;
            const auto w = tokens[i].word;
            const auto old = static_cast<std::size_t>(z[i]);
            --counts.n_dk[d][old];
            --counts.n_kw[old][w];
            --counts.n_k[old];

            double total = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                double s = (static_cast<double>(counts.n_dk[d][k]) + priors.alpha) *
                           (static_cast<double>(counts.n_kw[k][w]) + beta_kw(priors, k, w)) /
                           (static_cast<double>(counts.n_k[k]) + priors.beta_sum[k]);
                total += s;
                score[k] = total; // cumulative
            }
            double u = rng.uniform01() * total;
            std::size_t chosen = K - 1;
            for (std::size_t k = 0; k < K; ++k) {
                if (score[k] >= u) {
                    chosen = k;
                    break;
                }
            }
            z[i] = static_cast<int>(chosen);
            ++counts.n_dk[d][chosen];
            ++counts.n_kw[chosen][w];
            ++counts.n_k[chosen];
        }
        model.log_likelihood_trace.push_back(ll_from_counts(counts, priors, K, V));
    }

    model.z = std::move(z);
    model.phi.assign(K, std::vector<double>(V, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        double denom = static_cast<double>(counts.n_k[k]) + priors.beta_sum[k];
        for (std::size_t w = 0; w < V; ++w) {
            model.phi[k][w] =
                (static_cast<double>(counts.n_kw[k][w]) + beta_kw(priors, k, w)) / denom;
        }
    }
    model.theta.assign(dtm.n_docs, std::vector<double>(K, 0.0));
    const double k_alpha = static_cast<double>(K) * priors.alpha;
    for (std::size_t d = 0; d < dtm.n_docs; ++d) {
        double denom = static_cast<double>(counts.n_d[d]) + k_alpha;
        for (std::size_t k = 0; k < K; ++k) {
            model.theta[d][k] = (static_cast<double>(counts.n_dk[d][k]) + priors.alpha) / denom;
        }
    }
    return model;
}

std::vector<std::vector<std::string>> topic_top_words(const TopicModel& model,
                                                      const text::Vocabulary& vocab,
                                                      std::size_t n) {
    std::vector<std::vector<std::string>> out;
    out.reserve(model.phi.size());
    for (const auto& row : model.phi) {
        std::vector<std::size_t> order(row.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (row[a] != row[b]) return row[a] > row[b];
            return vocab.terms[a] < vocab.terms[b];
        });
        std::size_t take = std::min(n, order.size());
        std::vector<std::string> words;
        words.reserve(take);
        for (std::size_t i = 0; i < take; ++i) words.push_back(vocab.terms[order[i]]);
        out.push_back(std::move(words));
    }
    return out;
}

std::size_t dominant_topic(const TopicModel& model, std::size_t doc) {
    if (doc >= model.theta.size()) {
        throw Error(ErrorCode::DocOutOfRange, "document " + std::to_string(doc) + " of " +
                                                  std::to_string(model.theta.size()));
    }
    const auto& row = model.theta[doc];
    std::size_t best = 0;
    for (std::size_t k = 1; k < row.size(); ++k) {
        if (row[k] > row[best]) best = k; // strict: ties keep the lowest id
    }
    return best;
}

double joint_log_likelihood(
    const text::DocumentTermMatrix& dtm, const std::vector<int>& z, std::size_t k, double alpha,
    double beta, const std::vector<std::vector<std::pair<std::size_t, double>>>* beta_extra) {
    auto tokens = flatten(dtm);
    if (tokens.size() != z.size()) {
        throw Error(ErrorCode::MissingAssignment,
                    std::to_string(z.size()) + " assignments for " +
                        std::to_string(tokens.size()) + " tokens");
    }
    Priors p;
    p.alpha = alpha;
    p.beta = beta;
    p.beta_sum.assign(k, static_cast<double>(dtm.n_terms) * beta);
    if (beta_extra) {
        p.extra_dense.assign(k, std::vector<double>(dtm.n_terms, 0.0));
        for (std::size_t t = 0; t < beta_extra->size() && t < k; ++t) {
            for (const auto& [w, weight] : (*beta_extra)[t]) {
                p.extra_dense[t][w] += weight;
                p.beta_sum[t] += weight;
            }
        }
    }
    auto counts = count_state(dtm, tokens, z, k);
    return ll_from_counts(counts, p, k, dtm.n_terms);
}

void write_theta_csv(std::ostream& out, const TopicModel& model) {
    out << "doc_id";
    for (std::size_t k = 0; k < model.k; ++k) out << ",topic_" << k;
    out << '\n';
    for (std::size_t d = 0; d < model.theta.size(); ++d) {
        out << d;
        for (std::size_t k = 0; k < model.k; ++k) out << ',' << model.theta[d][k];
        out << '\n';
    }
}

void write_topic_report_json(std::ostream& out, const TopicModel& model,
                             const text::Vocabulary& vocab, std::size_t top_n) {
    auto tops = topic_top_words(model, vocab, top_n);
    nlohmann::json doc;
    doc["k"] = model.k;
    doc["topics"] = nlohmann::json::array();
    for (std::size_t k = 0; k < model.k; ++k) {
        nlohmann::json jt;
        jt["id"] = k;
        jt["words"] = nlohmann::json::array();
        for (const auto& word : tops[k]) {
            jt["words"].push_back(
                nlohmann::json{{"stem", word}, {"p", model.phi[k][vocab.index.at(word)]}});
        }
        doc["topics"].push_back(std::move(jt));
    }
    out << doc.dump(2) << '\n';
}

} // namespace trendkit::topics
