#ifndef TRENDKIT_CLUSTER_HPP
#define TRENDKIT_CLUSTER_HPP

#include "trendkit/textprep.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace trendkit::cluster {

// Same sparse shape as the DTM, but real-valued TF-IDF weights with
// L2-normalized rows (all-zero rows stay zero).
struct WeightedMatrix {
    std::size_t n_docs = 0;
    std::size_t n_terms = 0;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows; // sorted by term id
    std::vector<int> row_year;

    std::size_t nonzero_rows() const;
};

// weight(d,t) = count(d,t) * (1 + ln(N / df(t))), rows L2-normalized.
WeightedMatrix tfidf(const text::DocumentTermMatrix& dtm);

struct ClusterModel {
    std::size_t k = 0;
    std::vector<std::vector<double>> centroids; // k dense rows over the vocabulary
    std::vector<int> assignment;                // doc -> 0..k-1
    double inertia = 0.0;
    std::uint64_t seed = 0;
    std::size_t iterations_run = 0;
};

// Lloyd's algorithm with k-means++ initialization, best of `restarts`
// independent runs (ties: lowest restart index). Deterministic given seed.
ClusterModel kmeans(const WeightedMatrix& matrix, std::size_t k, std::uint64_t seed,
                    std::size_t restarts = 10, std::size_t max_iter = 300);

struct ElbowCurve {
    std::vector<std::pair<std::size_t, double>> points; // (k, inertia), k ascending
    std::size_t selected_k = 0;
};

// The k whose point lies farthest (perpendicular distance) from the chord
// between the first and last curve points; ties go to the smaller k.
std::size_t select_elbow(const std::vector<std::pair<std::size_t, double>>& points);

// Runs kmeans for every k in [k_min, k_max] and applies select_elbow.
ElbowCurve elbow_curve(const WeightedMatrix& matrix, std::size_t k_min, std::size_t k_max,
                       std::uint64_t seed, std::size_t restarts = 10, std::size_t max_iter = 300);

// Per cluster, the n terms with the largest centroid weight (descending,
// lexicographic tie-break).
std::vector<std::vector<std::string>> cluster_top_terms(const ClusterModel& model,
                                                        const text::Vocabulary& vocab,
                                                        std::size_t n);

void write_elbow_csv(std::ostream& out, const ElbowCurve& curve);
void write_cluster_report_json(std::ostream& out, const ClusterModel& model,
                               const WeightedMatrix& matrix, const text::Vocabulary& vocab,
                               std::size_t top_n);

} // namespace trendkit::cluster

#endif
