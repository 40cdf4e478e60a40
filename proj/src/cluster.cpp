#include "trendkit/cluster.hpp"

#include "trendkit/error.hpp"
#include "trendkit/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace trendkit::cluster {

std::size_t WeightedMatrix::nonzero_rows() const {
    std::size_t n = 0;
    for (const auto& row : rows) {
        if (!row.empty()) ++n;
    }
    return n;
}

WeightedMatrix tfidf(const text::DocumentTermMatrix& dtm) {
    if (dtm.n_docs == 0 || dtm.n_terms == 0) {
        throw Error(ErrorCode::EmptyMatrix, "tfidf needs at least one document and one term");
    }
    std::vector<std::size_t> df(dtm.n_terms, 0);
    for (const auto& row : dtm.rows) {
        for (const auto& [term, count] : row) df[term] += 1;
    }
    WeightedMatrix w;
    w.n_docs = dtm.n_docs;
    w.n_terms = dtm.n_terms;
    w.row_year = dtm.row_year;
    w.rows.resize(dtm.n_docs);
    const double n = static_cast<double>(dtm.n_docs);
    for (std::size_t d = 0; d < dtm.rows.size(); ++d) {
        auto& out = w.rows[d];
        out.reserve(dtm.rows[d].size());
        double norm_sq = 0.0;
        for (const auto& [term, count] : dtm.rows[d]) {
            double weight = static_cast<double>(count) *
                            (1.0 + std::log(n / static_cast<double>(df[term])));
            out.emplace_back(term, weight);
            norm_sq += weight * weight;
        }
        if (norm_sq > 0.0) {
            double inv = 1.0 / std::sqrt(norm_sq);
            for (auto& [term, weight] : out) weight *= inv;
        }
    }
    return w;
}

namespace {

double row_norm_sq(const std::vector<std::pair<std::size_t, double>>& row) {
    double s = 0.0;
    for (const auto& [t, v] : row) s += v * v;
    return s;
}

double dot_sparse_dense(const std::vector<std::pair<std::size_t, double>>& row,
                        const std::vector<double>& dense) {
    double s = 0.0;
    for (const auto& [t, v] : row) s += v * dense[t];
    return s;
}

// Squared Euclidean distance, clamped against tiny negative rounding.
double dist_sq(double x_norm_sq, const std::vector<std::pair<std::size_t, double>>& row,
               const std::vector<double>& centroid, double c_norm_sq) {
    double d = x_norm_sq - 2.0 * dot_sparse_dense(row, centroid) + c_norm_sq;
    return d > 0.0 ? d : 0.0;
}

struct LloydResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignment;
    double inertia = 0.0;
    std::size_t iterations = 0;
};

LloydResult lloyd_once(const WeightedMatrix& m, std::size_t k, Rng& rng, std::size_t max_iter) {
    const std::size_t n = m.n_docs;
    std::vector<double> x_norm(n);
    for (std::size_t d = 0; d < n; ++d) x_norm[d] = row_norm_sq(m.rows[d]);

    auto densify = [&](std::size_t d) {
        std::vector<double> v(m.n_terms, 0.0);
        for (const auto& [t, w] : m.rows[d]) v[t] = w;
        return v;
    };

    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    std::vector<double> c_norm;
    c_norm.reserve(k);
    std::vector<double> best_d(n, std::numeric_limits<double>::max());

    std::size_t first = rng.index(n);
    centroids.push_back(densify(first));
    c_norm.push_back(x_norm[first]);
    for (std::size_t d = 0; d < n; ++d) {
        best_d[d] = dist_sq(x_norm[d], m.rows[d], centroids[0], c_norm[0]);
    }
    while (centroids.size() < k) {
        double total = 0.0;
        for (double v : best_d) total += v;
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = rng.index(n); // all points coincide with a centroid
        } else {
            double target = rng.uniform01() * total;
            double cum = 0.0;
            chosen = n - 1;
            for (std::size_t d = 0; d < n; ++d) {
                cum += best_d[d];
                if (cum >= target) {
                    chosen = d;
                    break;
                }
            }
        }
        centroids.push_back(densify(chosen));
        c_norm.push_back(x_norm[chosen]);
        const auto& c = centroids.back();
        for (std::size_t d = 0; d < n; ++d) {
            double dd = dist_sq(x_norm[d], m.rows[d], c, c_norm.back());
            if (dd < best_d[d]) best_d[d] = dd;
        }
    }

    std::vector<int> assignment(n, -1);
    double prev_inertia = std::numeric_limits<double>::max();
    std::size_t iterations = 0;
    double inertia = 0.0;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // assignment step (ties go to the lowest centroid id)
        bool changed = false;
        inertia = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            int best = 0;
            double best_dist = dist_sq(x_norm[d], m.rows[d], centroids[0], c_norm[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double dd = dist_sq(x_norm[d], m.rows[d], centroids[c], c_norm[c]);
                if (dd < best_dist) {
                    best_dist = dd;
                    best = static_cast<int>(c);
                }
            }
            if (assignment[d] != best) {
                assignment[d] = best;
                changed = true;
            }
            inertia += best_dist;
        }
        if (inertia > prev_inertia * (1.0 + 1e-9) + 1e-12) {
            throw std::logic_error("k-means inertia increased within a run");
        }
        prev_inertia = inertia;
        iterations = iter + 1;
        if (!changed && iter > 0) break;

        // update step: means of the members
        std::vector<std::size_t> sizes(k, 0);
        for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t d = 0; d < n; ++d) {
            auto c = static_cast<std::size_t>(assignment[d]);
            ++sizes[c];
            for (const auto& [t, w] : m.rows[d]) centroids[c][t] += w;
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) {
                double inv = 1.0 / static_cast<double>(sizes[c]);
                for (double& v : centroids[c]) v *= inv;
            }
        }
        auto refresh_norm = [&](std::size_t c) {
            c_norm[c] = 0.0;
            for (double v : centroids[c]) c_norm[c] += v * v;
        };
        for (std::size_t c = 0; c < k; ++c) refresh_norm(c);

        // an empty cluster steals the point farthest from its own centroid
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) continue;
            std::size_t worst = 0;
            double worst_dist = -1.0;
            for (std::size_t d = 0; d < n; ++d) {
                auto a = static_cast<std::size_t>(assignment[d]);
                if (sizes[a] <= 1) continue;
                double dd = dist_sq(x_norm[d], m.rows[d], centroids[a], c_norm[a]);
                if (dd > worst_dist) {
                    worst_dist = dd;
                    worst = d;
                }
            }
            auto old = static_cast<std::size_t>(assignment[worst]);
            // remove the stolen point from its old mean
            double old_n = static_cast<double>(sizes[old]);
            for (double& v : centroids[old]) v *= old_n / (old_n - 1.0);
            for (const auto& [t, w] : m.rows[worst]) centroids[old][t] -= w / (old_n - 1.0);
            --sizes[old];
            centroids[c] = densify(worst);
            sizes[c] = 1;
            assignment[worst] = static_cast<int>(c);
            refresh_norm(old);
            refresh_norm(c);
        }
    }

    LloydResult result;
    result.centroids = std::move(centroids);
    result.assignment = std::move(assignment);
    result.inertia = inertia;
    result.iterations = iterations;
    return result;
}

} // namespace

ClusterModel kmeans(const WeightedMatrix& matrix, std::size_t k, std::uint64_t seed,
                    std::size_t restarts, std::size_t max_iter) {
    if (matrix.n_docs == 0) throw Error(ErrorCode::EmptyMatrix, "no documents to cluster");
    std::size_t usable = matrix.nonzero_rows();
    if (k < 1 || k > usable) {
        throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " but only " +
                                              std::to_string(usable) + " nonzero documents");
    }
    if (restarts < 1) restarts = 1;

    ClusterModel best;
    best.inertia = std::numeric_limits<double>::max();
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, r));
        auto run = lloyd_once(matrix, k, rng, max_iter);
        if (run.inertia < best.inertia) {
            best.k = k;
            best.centroids = std::move(run.centroids);
            best.assignment = std::move(run.assignment);
            best.inertia = run.inertia;
            best.seed = seed;
            best.iterations_run = run.iterations;
        }
    }
    return best;
}

std::size_t select_elbow(const std::vector<std::pair<std::size_t, double>>& points) {
    if (points.empty()) throw Error(ErrorCode::BadConfig, "empty elbow curve");
    // chord from the first point to the last; pick the point farthest from it
    const auto [x1, y1] = points.front();
    const auto [x2, y2] = points.back();
    const double dx = static_cast<double>(x2) - static_cast<double>(x1);
    const double dy = y2 - y1;
    const double denom = std::sqrt(dx * dx + dy * dy);
    double best_dist = -1.0;
    std::size_t selected = points.front().first;
    for (const auto& [k, inertia] : points) {
        double num = std::abs(dy * static_cast<double>(k) - dx * inertia +
                              static_cast<double>(x2) * y1 - y2 * static_cast<double>(x1));
        double dist = denom > 0.0 ? num / denom : 0.0;
        if (dist > best_dist + 1e-12) {
            best_dist = dist;
            selected = k;
        }
    }
    return selected;
}

ElbowCurve elbow_curve(const WeightedMatrix& matrix, std::size_t k_min, std::size_t k_max,
                       std::uint64_t seed, std::size_t restarts, std::size_t max_iter) {
    if (k_min < 1 || k_min >= k_max) {
        throw Error(ErrorCode::BadConfig, "elbow range requires 1 <= k_min < k_max");
    }
    ElbowCurve curve;
    curve.points.reserve(k_max - k_min + 1);
    for (std::size_t k = k_min; k <= k_max; ++k) {
        auto model = kmeans(matrix, k, seed, restarts, max_iter);
        curve.points.emplace_back(k, model.inertia);
    }
    curve.selected_k = select_elbow(curve.points);
    return curve;
}

std::vector<std::vector<std::string>> cluster_top_terms(const ClusterModel& model,
                                                        const text::Vocabulary& vocab,
                                                        std::size_t n) {
    std::vector<std::vector<std::string>> out;
    out.reserve(model.centroids.size());
    for (const auto& centroid : model.centroids) {
        std::vector<std::size_t> order(centroid.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (centroid[a] != centroid[b]) return centroid[a] > centroid[b];
            return vocab.terms[a] < vocab.terms[b];
        });
        std::size_t take = std::min(n, order.size());
        std::vector<std::string> terms;
        terms.reserve(take);
        for (std::size_t i = 0; i < take; ++i) terms.push_back(vocab.terms[order[i]]);
        out.push_back(std::move(terms));
    }
    return out;
}

void write_elbow_csv(std::ostream& out, const ElbowCurve& curve) {
    out << "k,inertia,selected\n";
    for (const auto& [k, inertia] : curve.points) {
        out << k << ',' << inertia << ',' << (k == curve.selected_k ? 1 : 0) << '\n';
    }
}

void write_cluster_report_json(std::ostream& out, const ClusterModel& model,
                               const WeightedMatrix& matrix, const text::Vocabulary& vocab,
                               std::size_t top_n) {
    auto tops = cluster_top_terms(model, vocab, top_n);

    std::vector<double> within(model.k, 0.0);
    std::vector<std::size_t> sizes(model.k, 0);
    for (std::size_t d = 0; d < matrix.n_docs; ++d) {
        auto c = static_cast<std::size_t>(model.assignment[d]);
        ++sizes[c];
        double x2 = row_norm_sq(matrix.rows[d]);
        double c2 = 0.0;
        for (double v : model.centroids[c]) c2 += v * v;
        within[c] += dist_sq(x2, matrix.rows[d], model.centroids[c], c2);
    }

    nlohmann::json doc;
    doc["k"] = model.k;
    doc["inertia"] = model.inertia;
    doc["seed"] = model.seed;
    doc["iterations_run"] = model.iterations_run;
    doc["clusters"] = nlohmann::json::array();
    for (std::size_t c = 0; c < model.k; ++c) {
        nlohmann::json jc;
        jc["id"] = c;
        jc["size"] = sizes[c];
        jc["top_terms"] = tops[c];
        jc["inertia_share"] = model.inertia > 0.0 ? within[c] / model.inertia : 0.0;
        doc["clusters"].push_back(std::move(jc));
    }
    out << doc.dump(2) << '\n';
}

} // namespace trendkit::cluster
