#ifndef TRENDKIT_RENDER_HPP
#define TRENDKIT_RENDER_HPP

#include "trendkit/cluster.hpp"
#include "trendkit/trends.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace trendkit::render {

struct Rect {
    double x = 0, y = 0; // top-left, SVG coordinates
    double w = 0, h = 0;

    bool intersects(const Rect& o) const;
    bool inside(double width, double height) const;
};

struct CloudItem {
    std::string stem;
    std::uint64_t frequency = 0;
    double font_size = 0; // pt
    double x = 0, y = 0;  // bbox center
    Rect bbox;
    int rotation = 0; // 0 or 90 degrees
};

struct WordCloudLayout {
    double width = 0, height = 0;
    std::vector<CloudItem> items;
    std::uint64_t seed = 0;
    std::vector<std::string> dropped; // stems that found no collision-free spot
};

// Glyph extent estimate from a fixed per-character metric profile; no font
// engine involved, so layouts are identical everywhere.
double text_width(std::string_view text, double font_size);

// Places the top max_words terms in descending frequency order on an
// Archimedean spiral from the canvas center, advancing past collisions.
// font_size = s_min + (s_max - s_min) * sqrt(f / f_max). Throws EmptyInput
// for an empty table and CanvasTooSmall when even the first word cannot fit.
WordCloudLayout layout_cloud(const trends::TermFrequencyTable& freqs, std::size_t max_words,
                             double width, double height, std::uint64_t seed);

// SVG 1.1, one <text> element per item; byte-stable for a given layout.
// Throws EmptyInput on a layout with no items.
std::string emit_svg(const WordCloudLayout& layout);

// Chart data: the CSV formats owned by the producing modules, plus minimal
// SVG line/bar variants for quick viewing.
std::string chart_csv(const trends::YearSeries& series);
std::string chart_csv(const cluster::ElbowCurve& curve);
std::string chart_csv(const trends::TermFrequencyTable& table);
std::string chart_svg(const trends::YearSeries& series);
std::string chart_svg(const cluster::ElbowCurve& curve);
std::string chart_svg(const trends::TermFrequencyTable& table, std::size_t max_bars = 50);

// Readers for the CSV formats above; throw Error(IoError) on malformed input.
trends::YearSeries parse_series_csv(std::istream& in);
cluster::ElbowCurve parse_elbow_csv(std::istream& in);
trends::TermFrequencyTable parse_frequency_csv(std::istream& in);

} // namespace trendkit::render

#endif
