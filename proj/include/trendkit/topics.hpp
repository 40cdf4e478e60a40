#ifndef TRENDKIT_TOPICS_HPP
#define TRENDKIT_TOPICS_HPP

#include "trendkit/textprep.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace trendkit::topics {

struct LdaConfig {
    std::size_t topics = 10; // K
    double alpha = -1.0;     // negative -> default 50/K
    double beta = 0.01;
    std::size_t iterations = 2000;
    std::size_t burn_in = 500;
    std::uint64_t seed = 0;
    // topic id -> (stem, extra prior weight); weights add to that topic's
    // beta for the stem (asymmetric prior)
    std::map<std::size_t, std::vector<std::pair<std::string, double>>> seed_words;

    double effective_alpha() const {
        return alpha > 0.0 ? alpha : 50.0 / static_cast<double>(topics);
    }
};

struct TopicModel {
    std::size_t k = 0;
    std::vector<std::vector<double>> phi;   // K x V, rows sum to 1
    std::vector<std::vector<double>> theta; // D x K, rows sum to 1
    std::vector<int> z;                     // final token-topic assignments
    std::vector<double> log_likelihood_trace; // one value per sweep
};

// Collapsed Gibbs sampling; point estimates are read from the final-state
// counts. Deterministic given the seed.
TopicModel lda_fit(const text::DocumentTermMatrix& dtm, const text::Vocabulary& vocab,
                   const LdaConfig& config);

// n highest-probability words per topic, descending, lexicographic tie-break.
std::vector<std::vector<std::string>> topic_top_words(const TopicModel& model,
                                                      const text::Vocabulary& vocab,
                                                      std::size_t n);

// argmax over the doc's theta row; ties go to the lowest topic id.
std::size_t dominant_topic(const TopicModel& model, std::size_t doc);

// Joint log p(w, z | alpha, beta) for an explicit assignment vector, using
// the same token order lda_fit uses (docs ascending, term ids ascending,
// repeats adjacent). beta_extra mirrors LdaConfig::seed_words resolved to
// term ids.
double joint_log_likelihood(
    const text::DocumentTermMatrix& dtm, const std::vector<int>& z, std::size_t k, double alpha,
    double beta,
    const std::vector<std::vector<std::pair<std::size_t, double>>>* beta_extra = nullptr);

void write_theta_csv(std::ostream& out, const TopicModel& model);
void write_topic_report_json(std::ostream& out, const TopicModel& model,
                             const text::Vocabulary& vocab, std::size_t top_n);

} // namespace trendkit::topics

#endif
