#include "trendkit/trends.hpp"

#include "trendkit/error.hpp"

#include <algorithm>
#include <ostream>

namespace trendkit::trends {

YearSeries year_histogram(const bib::YearSlice& slice) {
    YearSeries series;
    series.label = slice.label;
    if (slice.end_year < slice.start_year) return series;
    series.points.reserve(static_cast<std::size_t>(slice.end_year - slice.start_year) + 1);
    for (int y = slice.start_year; y <= slice.end_year; ++y) series.points.emplace_back(y, 0.0);
    for (const auto& rec : slice.records) {
        if (rec.year >= slice.start_year && rec.year <= slice.end_year) {
            series.points[static_cast<std::size_t>(rec.year - slice.start_year)].second += 1.0;
        }
    }
    return series;
}

TermFrequencyTable top_terms(const text::DocumentTermMatrix& dtm, const text::Vocabulary& vocab,
                             std::size_t n) {
    auto sums = dtm.col_sums();
    std::vector<std::size_t> order(sums.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sums[a] != sums[b]) return sums[a] > sums[b];
        return vocab.terms[a] < vocab.terms[b];
    });
    TermFrequencyTable table;
    std::size_t take = std::min(n, order.size());
    table.rows.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        table.rows.emplace_back(vocab.terms[order[i]], sums[order[i]]);
    }
    return table;
}

std::vector<YearSeries> group_year_trend(const std::vector<int>& assignments,
                                         const std::vector<int>& years,
                                         std::pair<int, int> range,
                                         const std::string& label_prefix) {
    if (assignments.size() != years.size()) {
        throw Error(ErrorCode::MissingAssignment,
                    " " + std::to_string(assignments.size()) + " assignments for " +
                        std::to_string(years.size()) + " documents");
    }
    int n_groups = 0;
    for (int g : assignments) {
        if (g < 0) throw Error(ErrorCode::MissingAssignment, "negative group id");
        n_groups = std::max(n_groups, g + 1);
    }
    auto [start, end] = range;
    std::vector<YearSeries> out(static_cast<std::size_t>(n_groups));
    for (int g = 0; g < n_groups; ++g) {
        out[static_cast<std::size_t>(g)].label = label_prefix + " " + std::to_string(g);
        for (int y = start; y <= end; ++y) {
            out[static_cast<std::size_t>(g)].points.emplace_back(y, 0.0);
        }
    }
    for (std::size_t d = 0; d < assignments.size(); ++d) {
        if (years[d] < start || years[d] > end) continue;
        out[static_cast<std::size_t>(assignments[d])]
            .points[static_cast<std::size_t>(years[d] - start)]
            .second += 1.0;
    }
    return out;
}

void write_series_csv(std::ostream& out, const YearSeries& series) {
    out << "year,value\n";
    for (const auto& [year, value] : series.points) {
        out << year << ',' << value << '\n';
    }
}

void write_frequency_csv(std::ostream& out, const TermFrequencyTable& table) {
    out << "rank,stem,count\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        out << (i + 1) << ',' << table.rows[i].first << ',' << table.rows[i].second << '\n';
    }
}

} // namespace trendkit::trends
