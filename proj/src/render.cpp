#include "trendkit/render.hpp"

#include "trendkit/error.hpp"
#include "trendkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

namespace trendkit::render {
namespace {

constexpr double kMinFont = 12.0;
constexpr double kMaxFont = 68.0;
constexpr double kLineHeight = 1.05; // ascent + descent + padding, in em
constexpr double kSideBearing = 0.12;

// Helvetica-flavoured advance widths in em; slight over-estimation only
// loosens the packing.
double char_width(char c) {
    switch (c) {
    case 'i': case 'j': case 'l':
    case '.': case ',': case ';': case ':': case '\'':
        return 0.28;
    case 'f': case 't':
        return 0.34;
    case 'r':
        return 0.38;
    case 'm':
        return 0.86;
    case 'w':
        return 0.74;
    case ' ': case '-':
        return 0.33;
    default:
        if (c >= 'A' && c <= 'Z') return 0.70;
        return 0.56;
    }
}

// Fixed decimals, trailing zeros trimmed: deterministic and tidy.
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s = buf;
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

const char* kPalette[] = {"#1f5f8b", "#1d6e49", "#74428c", "#a85b1f", "#31708e", "#8c3b3b"};

struct LineChartSpec {
    std::vector<std::pair<double, double>> points;
    double mark_x = 0;
    bool marked = false;
    std::string x_label, y_label;
};

std::string line_chart(const LineChartSpec& spec) {
    const double w = 640, h = 400, m = 52;
    double x_min = spec.points.front().first, x_max = spec.points.back().first;
    double y_max = 0;
    for (const auto& [x, y] : spec.points) y_max = std::max(y_max, y);
    if (y_max <= 0) y_max = 1;
    double x_span = x_max > x_min ? x_max - x_min : 1;

    auto px = [&](double x) { return m + (x - x_min) / x_span * (w - 2 * m); };
    auto py = [&](double y) { return h - m - y / y_max * (h - 2 * m); };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(w)
        << "\" height=\"" << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n"
        << "  <rect width=\"" << fmt(w) << "\" height=\"" << fmt(h) << "\" fill=\"white\"/>\n"
        << "  <line x1=\"" << fmt(m) << "\" y1=\"" << fmt(h - m) << "\" x2=\"" << fmt(w - m)
        << "\" y2=\"" << fmt(h - m) << "\" stroke=\"black\"/>\n"
        << "  <line x1=\"" << fmt(m) << "\" y1=\"" << fmt(m) << "\" x2=\"" << fmt(m)
        << "\" y2=\"" << fmt(h - m) << "\" stroke=\"black\"/>\n";
    out << "  <polyline fill=\"none\" stroke=\"" << kPalette[0] << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < spec.points.size(); ++i) {
        if (i) out << ' ';
        out << fmt(px(spec.points[i].first)) << ',' << fmt(py(spec.points[i].second));
    }
    out << "\"/>\n";
    for (const auto& [x, y] : spec.points)
        out << "  <circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y))
            << "\" r=\"3\" fill=\"" << kPalette[0] << "\"/>\n";
    if (spec.marked) {
        double y_at = 0;
        for (const auto& [x, y] : spec.points)
            if (x == spec.mark_x) y_at = y;
        out << "  <circle cx=\"" << fmt(px(spec.mark_x)) << "\" cy=\"" << fmt(py(y_at))
            << "\" r=\"7\" fill=\"none\" stroke=\"" << kPalette[5] << "\" stroke-width=\"2\"/>\n";
    }
    out << "  <text x=\"" << fmt(w / 2) << "\" y=\"" << fmt(h - 14)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
        << xml_escape(spec.x_label) << "</text>\n"
        << "  <text x=\"16\" y=\"" << fmt(h / 2)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << fmt(h / 2) << ")\">" << xml_escape(spec.y_label) << "</text>\n"
        << "  <text x=\"" << fmt(m) << "\" y=\"" << fmt(h - m + 16)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(x_min)
        << "</text>\n"
        << "  <text x=\"" << fmt(w - m) << "\" y=\"" << fmt(h - m + 16)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(x_max)
        << "</text>\n"
        << "  <text x=\"" << fmt(m - 6) << "\" y=\"" << fmt(m + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(y_max)
        << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

} // namespace

bool Rect::intersects(const Rect& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
}

bool Rect::inside(double width, double height) const {
    return x >= 0 && y >= 0 && x + w <= width && y + h <= height;
}

double text_width(std::string_view text, double font_size) {
    double em = 0;
    for (char c : text) em += char_width(c);
    return em * font_size;
}

WordCloudLayout layout_cloud(const trends::TermFrequencyTable& freqs, std::size_t max_words,
                             double width, double height, std::uint64_t seed) {
    if (freqs.rows.empty() || max_words == 0)
        throw Error(ErrorCode::EmptyInput, "word cloud needs at least one term");
    if (width <= 0 || height <= 0)
        throw Error(ErrorCode::CanvasTooSmall, "canvas dimensions must be positive");

    WordCloudLayout layout;
    layout.width = width;
    layout.height = height;
    layout.seed = seed;

    const std::size_t n = std::min(max_words, freqs.rows.size());
    const double f_max = static_cast<double>(freqs.rows.front().second);
    const double cx0 = width / 2, cy0 = height / 2;
    const double aspect = height / width;
    const double r_max = std::hypot(width, height) / 2;

    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [stem, freq] = freqs.rows[i];
        // rng draws happen for every word, placed or dropped, so the
        // stream position never depends on layout outcomes
        const int rotation = rng.below(4) == 0 ? 90 : 0;
        const double start = rng.uniform01() * 2 * M_PI;

        const double font =
            kMinFont + (kMaxFont - kMinFont) * std::sqrt(static_cast<double>(freq) / f_max);
        double bw = text_width(stem, font) + kSideBearing * font;
        double bh = kLineHeight * font;
        if (rotation == 90) std::swap(bw, bh);

        bool placed = false;
        if (bw <= width && bh <= height) {
            for (double theta = 0;; theta += 0.25) {
                const double r = 2.0 * theta;
                if (r > r_max + std::max(bw, bh)) break;
                const double cx = cx0 + r * std::cos(theta + start);
                const double cy = cy0 + r * aspect * std::sin(theta + start);
                Rect box{cx - bw / 2, cy - bh / 2, bw, bh};
                if (!box.inside(width, height)) continue;
                bool hit = false;
                for (const auto& other : layout.items)
                    if (box.intersects(other.bbox)) {
                        hit = true;
                        break;
                    }
                if (hit) continue;
                layout.items.push_back({stem, freq, font, cx, cy, box, rotation});
                placed = true;
                break;
            }
        }
        if (!placed) {
            if (layout.items.empty())
                throw Error(ErrorCode::CanvasTooSmall,
                            "canvas cannot fit the most frequent word '" + stem + "'");
            layout.dropped.push_back(stem);
        }
    }
    return layout;
}

std::string emit_svg(const WordCloudLayout& layout) {
    if (layout.items.empty())
        throw Error(ErrorCode::EmptyInput, "refusing to emit a word cloud with no items");

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
        << fmt(layout.width) << "\" height=\"" << fmt(layout.height) << "\" viewBox=\"0 0 "
        << fmt(layout.width) << ' ' << fmt(layout.height) << "\">\n"
        << "  <rect width=\"" << fmt(layout.width) << "\" height=\"" << fmt(layout.height)
        << "\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < layout.items.size(); ++i) {
        const auto& item = layout.items[i];
        // anchor at the bbox center; the 0.35em drop approximates a
        // central baseline without font metrics
        const double ty = item.y + 0.35 * item.font_size;
        out << "  <text x=\"" << fmt(item.x) << "\" y=\"" << fmt(ty)
            << "\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\""
            << fmt(item.font_size) << "\" fill=\"" << kPalette[i % 6]
            << "\" text-anchor=\"middle\"";
        if (item.rotation == 90)
            out << " transform=\"rotate(90 " << fmt(item.x) << ' ' << fmt(item.y) << ")\"";
        out << '>' << xml_escape(item.stem) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string chart_csv(const trends::YearSeries& series) {
    std::ostringstream out;
    trends::write_series_csv(out, series);
    return out.str();
}

std::string chart_csv(const cluster::ElbowCurve& curve) {
    std::ostringstream out;
    cluster::write_elbow_csv(out, curve);
    return out.str();
}

std::string chart_csv(const trends::TermFrequencyTable& table) {
    std::ostringstream out;
    trends::write_frequency_csv(out, table);
    return out.str();
}

std::string chart_svg(const trends::YearSeries& series) {
    if (series.points.empty()) throw Error(ErrorCode::EmptyInput, "empty series");
    LineChartSpec spec;
    for (const auto& [year, value] : series.points)
        spec.points.emplace_back(static_cast<double>(year), value);
    spec.x_label = "year";
    spec.y_label = series.label.empty() ? "documents" : series.label;
    return line_chart(spec);
}

std::string chart_svg(const cluster::ElbowCurve& curve) {
    if (curve.points.empty()) throw Error(ErrorCode::EmptyInput, "empty elbow curve");
    LineChartSpec spec;
    for (const auto& [k, inertia] : curve.points)
        spec.points.emplace_back(static_cast<double>(k), inertia);
    spec.mark_x = static_cast<double>(curve.selected_k);
    spec.marked = true;
    spec.x_label = "k";
    spec.y_label = "inertia";
    return line_chart(spec);
}

std::string chart_svg(const trends::TermFrequencyTable& table, std::size_t max_bars) {
    if (table.rows.empty() || max_bars == 0)
        throw Error(ErrorCode::EmptyInput, "empty frequency table");
    const std::size_t n = std::min(max_bars, table.rows.size());
    const double w = 640, h = 400, m = 52;
    const double span = w - 2 * m;
    const double bar_w = span / static_cast<double>(n);
    double y_max = static_cast<double>(table.rows.front().second);
    if (y_max <= 0) y_max = 1;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fmt(w)
        << "\" height=\"" << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n"
        << "  <rect width=\"" << fmt(w) << "\" height=\"" << fmt(h) << "\" fill=\"white\"/>\n"
        << "  <line x1=\"" << fmt(m) << "\" y1=\"" << fmt(h - m) << "\" x2=\"" << fmt(w - m)
        << "\" y2=\"" << fmt(h - m) << "\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [stem, count] = table.rows[i];
        const double bh = static_cast<double>(count) / y_max * (h - 2 * m);
        out << "  <rect x=\"" << fmt(m + static_cast<double>(i) * bar_w + 1) << "\" y=\""
            << fmt(h - m - bh) << "\" width=\"" << fmt(std::max(bar_w - 2, 1.0))
            << "\" height=\"" << fmt(bh) << "\" fill=\"" << kPalette[i % 6] << "\"><title>"
            << xml_escape(stem) << " (" << count << ")</title></rect>\n";
    }
    out << "</svg>\n";
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

[[noreturn]] void bad_csv(const std::string& what) {
    throw Error(ErrorCode::IoError, "malformed chart csv: " + what);
}

} // namespace

trends::YearSeries parse_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "year,value") bad_csv("expected 'year,value' header");
    trends::YearSeries series;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2) bad_csv("series row needs two fields: " + line);
        try {
            series.points.emplace_back(std::stoi(fields[0]), std::stod(fields[1]));
        } catch (const std::exception&) {
            bad_csv("non-numeric series row: " + line);
        }
    }
    return series;
}

cluster::ElbowCurve parse_elbow_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "k,inertia,selected")
        bad_csv("expected 'k,inertia,selected' header");
    cluster::ElbowCurve curve;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3) bad_csv("elbow row needs three fields: " + line);
        try {
            std::size_t k = static_cast<std::size_t>(std::stoull(fields[0]));
            curve.points.emplace_back(k, std::stod(fields[1]));
            if (fields[2] == "1") curve.selected_k = k;
        } catch (const std::exception&) {
            bad_csv("non-numeric elbow row: " + line);
        }
    }
    return curve;
}

trends::TermFrequencyTable parse_frequency_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "rank,stem,count")
        bad_csv("expected 'rank,stem,count' header");
    trends::TermFrequencyTable table;
    std::size_t expected_rank = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3) bad_csv("frequency row needs three fields: " + line);
        try {
            if (std::stoull(fields[0]) != expected_rank) bad_csv("rank out of order: " + line);
            table.rows.emplace_back(fields[1], std::stoull(fields[2]));
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            bad_csv("non-numeric frequency row: " + line);
        }
        ++expected_rank;
    }
    return table;
}

} // namespace trendkit::render
