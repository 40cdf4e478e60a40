#ifndef TRENDKIT_TRENDS_HPP
#define TRENDKIT_TRENDS_HPP

#include "trendkit/bib.hpp"
#include "trendkit/textprep.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace trendkit::trends {

struct YearSeries {
    std::string label;
    std::vector<std::pair<int, double>> points; // years strictly increasing

    bool operator==(const YearSeries&) const = default;
};

struct TermFrequencyTable {
    // descending by frequency, frequency ties broken lexicographically
    std::vector<std::pair<std::string, std::uint64_t>> rows;

    bool operator==(const TermFrequencyTable&) const = default;
};

// One point per year of the slice range, zero-filled.
YearSeries year_histogram(const bib::YearSlice& slice);

// First min(n, vocabulary) rows of the full descending frequency table.
TermFrequencyTable top_terms(const text::DocumentTermMatrix& dtm, const text::Vocabulary& vocab,
                             std::size_t n);

// Document counts per (group, year) over an inclusive year range; docs
// outside the range are ignored. Throws MissingAssignment when the
// assignment and year vectors disagree in length.
std::vector<YearSeries> group_year_trend(const std::vector<int>& assignments,
                                         const std::vector<int>& years,
                                         std::pair<int, int> range,
                                         const std::string& label_prefix = "group");

void write_series_csv(std::ostream& out, const YearSeries& series);
void write_frequency_csv(std::ostream& out, const TermFrequencyTable& table);

} // namespace trendkit::trends

#endif
