#include "trendkit/pipeline.hpp"

#include "trendkit/cluster.hpp"
#include "trendkit/graphs.hpp"
#include "trendkit/porter.hpp"
#include "trendkit/render.hpp"
#include "trendkit/rng.hpp"
#include "trendkit/topics.hpp"
#include "trendkit/trends.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace trendkit::pipeline {

namespace detail {

namespace {
thread_local bool g_stage_open = false;
}

void stage_enter() {
    if (g_stage_open)
        throw Error(ErrorCode::NestedTiming, "a timing stage is already open on this thread");
    g_stage_open = true;
}

void stage_exit() { g_stage_open = false; }

double cpu_now() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

} // namespace detail

// ---- configuration ----------------------------------------------------------

namespace {

constexpr const char* kDocRow = "No. of Documents";

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::BadConfig, what); }

struct ConfigValue {
    std::vector<std::string> items;
    bool is_array = false;
    int line = 0;
};

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// One scalar or a one-line [a, b, c] array; '#' starts a comment outside quotes.
ConfigValue parse_value(std::string_view text, int line) {
    ConfigValue value;
    value.line = line;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    };
    auto read_scalar = [&]() -> std::string {
        skip_ws();
        if (i < text.size() && text[i] == '"') {
            std::string out;
            ++i;
            while (i < text.size() && text[i] != '"') {
                if (text[i] == '\\' && i + 1 < text.size()) ++i;
                out.push_back(text[i++]);
            }
            if (i >= text.size()) bad("unterminated string on config line " + std::to_string(line));
            ++i;
            return out;
        }
        std::size_t start = i;
        while (i < text.size() && text[i] != ',' && text[i] != ']' && text[i] != '#') ++i;
        std::string out = trim(text.substr(start, i - start));
        if (out.empty()) bad("empty value on config line " + std::to_string(line));
        return out;
    };

    skip_ws();
    if (i < text.size() && text[i] == '[') {
        value.is_array = true;
        ++i;
        skip_ws();
        if (i < text.size() && text[i] == ']') {
            ++i;
        } else {
            while (true) {
                value.items.push_back(read_scalar());
                skip_ws();
                if (i < text.size() && text[i] == ',') {
                    ++i;
                    continue;
                }
                if (i < text.size() && text[i] == ']') {
                    ++i;
                    break;
                }
                bad("array does not close on config line " + std::to_string(line));
            }
        }
    } else {
        value.items.push_back(read_scalar());
    }
    skip_ws();
    if (i < text.size() && text[i] != '#')
        bad("trailing characters on config line " + std::to_string(line));
    return value;
}

const std::string& scalar(const std::string& key, const ConfigValue& value) {
    if (value.is_array || value.items.size() != 1)
        bad("config key '" + key + "' expects a single value");
    return value.items.front();
}

std::uint64_t as_u64(const std::string& key, const ConfigValue& value) {
    const std::string& s = scalar(key, value);
    try {
        std::size_t pos = 0;
        std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        bad("config key '" + key + "' expects an integer, got '" + s + "'");
    }
}

std::size_t as_size(const std::string& key, const ConfigValue& value) {
    return static_cast<std::size_t>(as_u64(key, value));
}

double as_double(const std::string& key, const ConfigValue& value) {
    const std::string& s = scalar(key, value);
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        bad("config key '" + key + "' expects a number, got '" + s + "'");
    }
}

bool as_bool(const std::string& key, const ConfigValue& value) {
    const std::string& s = scalar(key, value);
    if (s == "true") return true;
    if (s == "false") return false;
    bad("config key '" + key + "' expects true or false, got '" + s + "'");
}

std::pair<int, int> parse_year_range(const std::string& key, const std::string& s) {
    try {
        auto dash = s.find('-', 1); // years are positive; a leading '-' is not a separator
        if (dash == std::string::npos) {
            int y = std::stoi(s);
            return {y, y};
        }
        return {std::stoi(s.substr(0, dash)), std::stoi(s.substr(dash + 1))};
    } catch (const std::exception&) {
        bad("config key '" + key + "' expects year ranges like 1991-2010, got '" + s + "'");
    }
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

std::string default_data_file(const char* name) {
    return (fs::path(TRENDKIT_DATA_DIR) / name).string();
}

} // namespace

RunConfig parse_config(std::string_view text, const std::string& base_dir) {
    std::map<std::string, ConfigValue> entries;
    std::string section;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string line = trim(
            text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        ++line_no;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        if (line.empty() || line[0] == '#') continue;
        if (line[0] == '[') {
            if (line.back() != ']') bad("malformed section on config line " + std::to_string(line_no));
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) bad("empty section name on config line " + std::to_string(line_no));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            bad("expected 'key = value' on config line " + std::to_string(line_no));
        std::string key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) bad("empty key on config line " + std::to_string(line_no));
        if (!section.empty()) key = section + "." + key;
        if (entries.count(key)) bad("duplicate config key '" + key + "'");
        entries.emplace(key, parse_value(std::string_view(line).substr(eq + 1), line_no));
    }

    RunConfig cfg;
    for (const auto& [key, value] : entries) {
        if (key == "input.shards") {
            for (const auto& s : value.items) cfg.shards.push_back(resolve_path(base_dir, s));
        } else if (key == "input.slices") {
            for (const auto& s : value.items) cfg.slices.push_back(parse_year_range(key, s));
        } else if (key == "input.countries") {
            cfg.countries_path = resolve_path(base_dir, scalar(key, value));
        } else if (key == "prep.stopwords") {
            cfg.stopwords_path = resolve_path(base_dir, scalar(key, value));
        } else if (key == "prep.unwanted") {
            cfg.unwanted_path = resolve_path(base_dir, scalar(key, value));
        } else if (key == "prep.min_token_len") {
            cfg.prep.min_token_len = as_size(key, value);
        } else if (key == "prep.use_title") {
            cfg.prep.use_title = as_bool(key, value);
        } else if (key == "prep.use_abstract") {
            cfg.prep.use_abstract = as_bool(key, value);
        } else if (key == "prep.stemmer") {
            cfg.prep.stemmer = scalar(key, value);
        } else if (key == "cluster.k_min") {
            cfg.k_min = as_size(key, value);
        } else if (key == "cluster.k_max") {
            cfg.k_max = as_size(key, value);
        } else if (key == "cluster.restarts") {
            cfg.restarts = as_size(key, value);
        } else if (key == "cluster.max_iter") {
            cfg.kmeans_max_iter = as_size(key, value);
        } else if (key == "cluster.seed") {
            cfg.cluster_seed = as_u64(key, value);
        } else if (key == "topics.k") {
            cfg.lda_k = as_size(key, value);
        } else if (key == "topics.alpha") {
            cfg.alpha = as_double(key, value);
        } else if (key == "topics.beta") {
            cfg.beta = as_double(key, value);
        } else if (key == "topics.iterations") {
            cfg.iterations = as_size(key, value);
        } else if (key == "topics.burn_in") {
            cfg.burn_in = as_size(key, value);
        } else if (key == "topics.seed") {
            cfg.topics_seed = as_u64(key, value);
        } else if (key == "graphs.author_threshold") {
            cfg.author_threshold = as_double(key, value);
        } else if (key == "graphs.country_threshold") {
            cfg.country_threshold = as_double(key, value);
        } else if (key == "render.canvas_width") {
            cfg.canvas_width = as_double(key, value);
        } else if (key == "render.canvas_height") {
            cfg.canvas_height = as_double(key, value);
        } else if (key == "render.max_words") {
            cfg.max_words = as_size(key, value);
        } else if (key == "run.out") {
            cfg.out_dir = resolve_path(base_dir, scalar(key, value));
        } else if (key == "run.seed") {
            cfg.seed = as_u64(key, value);
        } else if (key == "run.run_id") {
            cfg.run_id = scalar(key, value);
        } else if (key == "run.top_terms") {
            cfg.top_terms = as_size(key, value);
        } else if (key == "run.prominent_words") {
            cfg.prominent_words = as_size(key, value);
        } else if (key == "run.parallel") {
            cfg.parallel_slices = as_bool(key, value);
        } else if (key == "stages.trends") {
            cfg.stage_trends = as_bool(key, value);
        } else if (key == "stages.frequency") {
            cfg.stage_frequency = as_bool(key, value);
        } else if (key == "stages.cloud") {
            cfg.stage_cloud = as_bool(key, value);
        } else if (key == "stages.graphs") {
            cfg.stage_graphs = as_bool(key, value);
        } else if (key == "stages.cluster") {
            cfg.stage_cluster = as_bool(key, value);
        } else if (key == "stages.topics") {
            cfg.stage_topics = as_bool(key, value);
        } else if (key == "stages.network") {
            cfg.stage_network = as_bool(key, value);
        } else {
            bad("unknown config key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), fs::path(path).parent_path().string());
}

void validate(const RunConfig& cfg) {
    if (cfg.shards.empty()) bad("config needs at least one input shard");
    for (const auto& shard : cfg.shards)
        if (!fs::exists(shard)) bad("input shard not found: " + shard);
    // an empty slice list is allowed: the run spans the full corpus range

    const std::string stopwords =
        cfg.stopwords_path.empty() ? default_data_file("stopwords_en.txt") : cfg.stopwords_path;
    if (!fs::exists(stopwords)) bad("stopword list not found: " + stopwords);
    const std::string countries =
        cfg.countries_path.empty() ? default_data_file("countries.txt") : cfg.countries_path;
    if (cfg.stage_graphs && !fs::exists(countries)) bad("country table not found: " + countries);
    if (!cfg.unwanted_path.empty() && !fs::exists(cfg.unwanted_path))
        bad("unwanted-word list not found: " + cfg.unwanted_path);

    if (cfg.prep.stemmer != "porter") bad("unknown stemmer '" + cfg.prep.stemmer + "'");
    if (cfg.prep.min_token_len < 1) bad("prep.min_token_len must be >= 1");
    if (cfg.k_min < 1) bad("cluster.k_min must be >= 1");
    if (cfg.k_min > cfg.k_max) bad("cluster.k_min must not exceed cluster.k_max");
    if (cfg.restarts < 1) bad("cluster.restarts must be >= 1");
    if (cfg.kmeans_max_iter < 1) bad("cluster.max_iter must be >= 1");
    if (cfg.alpha == 0.0) bad("topics.alpha must be nonzero (negative selects the 50/K default)");
    if (cfg.beta <= 0.0) bad("topics.beta must be positive");
    if (cfg.iterations < 1) bad("topics.iterations must be >= 1");
    if (cfg.burn_in >= cfg.iterations) bad("topics.burn_in must be below topics.iterations");
    if (!(cfg.author_threshold >= 0.0 && cfg.author_threshold < 1.0))
        bad("graphs.author_threshold must be in [0, 1)");
    if (!(cfg.country_threshold >= 0.0 && cfg.country_threshold < 1.0))
        bad("graphs.country_threshold must be in [0, 1)");
    if (cfg.canvas_width <= 0 || cfg.canvas_height <= 0) bad("render canvas must be positive");
    if (cfg.max_words < 1) bad("render.max_words must be >= 1");
    if (cfg.top_terms < 1) bad("run.top_terms must be >= 1");
    if (cfg.prominent_words < 1) bad("run.prominent_words must be >= 1");
    if (cfg.out_dir.empty()) bad("run.out must not be empty");
    if (cfg.run_id.find('/') != std::string::npos) bad("run.run_id must not contain '/'");
    if (cfg.stage_topics && cfg.lda_k == 0 && !cfg.stage_cluster)
        bad("the topics stage needs either the cluster stage (elbow-selected k) or an explicit "
            "topics.k");
    if (cfg.stage_network && !cfg.stage_topics) bad("the topic network needs the topics stage");
}

// ---- timing report ----------------------------------------------------------

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        out.push_back(c);
        if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    return out;
}

std::string cell_text(const std::string& row, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, row == kDocRow ? "%.0f" : "%.3f", v);
    return buf;
}

} // namespace

std::vector<double> StageTimingReport::totals() const {
    std::vector<double> out(slice_labels.size(), 0.0);
    for (const auto& [name, cells] : rows) {
        if (name == kDocRow) continue;
        for (std::size_t i = 0; i < out.size() && i < cells.size(); ++i) out[i] += cells[i];
    }
    return out;
}

void write_timing_csv(std::ostream& out, const StageTimingReport& report) {
    out << "attribute";
    for (const auto& label : report.slice_labels) out << ',' << csv_quote(label);
    out << '\n';
    for (const auto& [name, cells] : report.rows) {
        out << csv_quote(name);
        for (double v : cells) out << ',' << cell_text(name, v);
        out << '\n';
    }
    out << "Total";
    for (double v : report.totals()) out << ',' << cell_text("", v);
    out << '\n';
}

StageTimingReport read_timing_csv(std::istream& in) {
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::string field;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    field.push_back(c);
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                out.push_back(field);
                field.clear();
            } else {
                field.push_back(c);
            }
        }
        out.push_back(field);
        return out;
    };

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "empty timing csv");
    auto header = split(line);
    if (header.empty() || header[0] != "attribute")
        throw Error(ErrorCode::IoError, "timing csv must start with an 'attribute' header");

    StageTimingReport report;
    report.slice_labels.assign(header.begin() + 1, header.end());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != header.size())
            throw Error(ErrorCode::IoError, "ragged timing csv row: " + line);
        if (fields[0] == "Total") continue; // recomputed on demand
        std::vector<double> cells;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            try {
                cells.push_back(std::stod(fields[i]));
            } catch (const std::exception&) {
                throw Error(ErrorCode::IoError, "non-numeric timing cell: " + fields[i]);
            }
        }
        report.rows.emplace_back(fields[0], std::move(cells));
    }
    return report;
}

void write_timing_text(std::ostream& out, const StageTimingReport& report) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& [name, row] : report.rows) {
        std::vector<std::string> line;
        for (double v : row) line.push_back(cell_text(name, v));
        cells.push_back(std::move(line));
    }
    std::vector<std::string> total_cells;
    for (double v : report.totals()) total_cells.push_back(cell_text("", v));

    std::size_t name_w = std::string("ATTRIBUTES").size();
    for (const auto& [name, row] : report.rows) name_w = std::max(name_w, name.size());
    std::vector<std::size_t> col_w(report.slice_labels.size());
    for (std::size_t c = 0; c < col_w.size(); ++c) {
        col_w[c] = report.slice_labels[c].size();
        for (const auto& row : cells)
            if (c < row.size()) col_w[c] = std::max(col_w[c], row[c].size());
        col_w[c] = std::max(col_w[c], total_cells[c].size());
    }

    auto pad = [&](const std::string& s, std::size_t w) {
        return s + std::string(w - s.size() + 2, ' ');
    };

    out << "Computational Performance\n";
    if (report.contended) out << "(slices ran in parallel; timings are contended)\n";
    out << '\n';
    out << pad("S.NO.", 5) << pad("ATTRIBUTES", name_w) << "TIME TAKEN (in secs)\n";
    out << pad("", 5) << pad("", name_w);
    for (std::size_t c = 0; c < col_w.size(); ++c) out << pad(report.slice_labels[c], col_w[c]);
    out << '\n';
    for (std::size_t r = 0; r < report.rows.size(); ++r) {
        out << pad(std::to_string(r + 1) + ".", 5) << pad(report.rows[r].first, name_w);
        for (std::size_t c = 0; c < col_w.size(); ++c)
            out << pad(c < cells[r].size() ? cells[r][c] : "", col_w[c]);
        out << '\n';
    }
    out << pad("", 5) << pad("Total", name_w);
    for (std::size_t c = 0; c < col_w.size(); ++c) out << pad(total_cells[c], col_w[c]);
    out << '\n';
}

// ---- shared helpers ---------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
        throw Error(ErrorCode::IoError, "sha256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out(static_cast<std::size_t>(len) * 2, '0');
    for (unsigned int i = 0; i < len; ++i) {
        out[2 * i] = hex[digest[i] >> 4];
        out[2 * i + 1] = hex[digest[i] & 0xf];
    }
    return out;
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

void write_diagnostics_jsonl(std::ostream& out, const std::vector<bib::ParseDiagnostic>& diags) {
    for (const auto& d : diags) {
        json j{{"file", d.file}, {"line", d.line}, {"reason", d.reason}};
        out << j.dump() << '\n';
    }
}

std::vector<bib::ParseDiagnostic> read_diagnostics_jsonl(std::istream& in) {
    std::vector<bib::ParseDiagnostic> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw Error(ErrorCode::IoError, "malformed diagnostics line: " + line);
        bib::ParseDiagnostic d;
        d.file = j.value("file", "");
        d.line = j.value("line", 0);
        d.reason = j.value("reason", "");
        out.push_back(std::move(d));
    }
    return out;
}

void write_prominent_text(std::ostream& out, const std::vector<std::string>& slice_labels,
                          const std::vector<std::vector<std::vector<std::string>>>& topics) {
    std::size_t n_rows = 0;
    for (const auto& slice_topics : topics) n_rows = std::max(n_rows, slice_topics.size());

    auto cell = [&](std::size_t s, std::size_t row) -> std::string {
        if (s >= topics.size() || row >= topics[s].size() || topics[s][row].empty()) return "--";
        std::string joined;
        for (std::size_t i = 0; i < topics[s][row].size(); ++i) {
            if (i) joined += ", ";
            joined += topics[s][row][i];
        }
        joined[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(joined[0])));
        return joined;
    };

    std::size_t label_w = std::string("Topic No").size();
    for (std::size_t r = 0; r < n_rows; ++r)
        label_w = std::max(label_w, ("Cluster " + std::to_string(r + 1)).size());
    std::vector<std::size_t> col_w(slice_labels.size());
    for (std::size_t s = 0; s < slice_labels.size(); ++s) {
        col_w[s] = slice_labels[s].size();
        for (std::size_t r = 0; r < n_rows; ++r) col_w[s] = std::max(col_w[s], cell(s, r).size());
    }

    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w - s.size() + 2, ' ');
    };

    out << "Prominent Words\n\n";
    out << pad("Topic No", label_w);
    for (std::size_t s = 0; s < slice_labels.size(); ++s) out << pad(slice_labels[s], col_w[s]);
    out << '\n';
    for (std::size_t r = 0; r < n_rows; ++r) {
        out << pad("Cluster " + std::to_string(r + 1), label_w);
        for (std::size_t s = 0; s < slice_labels.size(); ++s) out << pad(cell(s, r), col_w[s]);
        out << '\n';
    }
}

// ---- run orchestration ------------------------------------------------------

namespace {

struct Artifact {
    std::string path; // relative to the run directory
    std::string sha256;
    std::size_t bytes = 0;
    bool is_volatile = false; // recomputed every run; excluded from checksums
};

class ArtifactLog {
public:
    explicit ArtifactLog(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& rel, std::string_view bytes, bool is_volatile = false) {
        fs::path path = dir_ / rel;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());

        Artifact a{rel, is_volatile ? "" : sha256_hex(bytes), bytes.size(), is_volatile};
        std::lock_guard<std::mutex> lock(mu_);
        entries_.push_back(std::move(a));
    }

    std::vector<Artifact> sorted() const {
        std::vector<Artifact> out = entries_;
        std::sort(out.begin(), out.end(),
                  [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
        return out;
    }

private:
    fs::path dir_;
    mutable std::mutex mu_;
    std::vector<Artifact> entries_;
};

std::string stamp_run_name(const fs::path& parent) {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    localtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "run-%Y%m%d-%H%M%S", &tm);
    std::string base = buf;
    std::string name = base;
    for (int i = 2; fs::exists(parent / name); ++i) name = base + "-" + std::to_string(i);
    return name;
}

// Internal carrier so the orchestrator can name the failing stage.
struct StagedError {
    std::string stage;
    ErrorCode code;
    std::string what;
};

trends::TermFrequencyTable counts_to_table(const std::map<std::size_t, std::uint64_t>& counts,
                                           const text::Vocabulary& vocab) {
    trends::TermFrequencyTable table;
    for (const auto& [term, count] : counts) table.rows.emplace_back(vocab.terms[term], count);
    std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return table;
}

std::string wide_trend_csv(const std::vector<trends::YearSeries>& series) {
    std::ostringstream out;
    out << "year";
    for (const auto& s : series) out << ',' << csv_quote(s.label);
    out << '\n';
    if (!series.empty()) {
        for (std::size_t i = 0; i < series.front().points.size(); ++i) {
            out << series.front().points[i].first;
            for (const auto& s : series) out << ',' << s.points[i].second;
            out << '\n';
        }
    }
    return out.str();
}

json config_echo(const RunConfig& cfg, const std::vector<std::pair<int, int>>& boundaries,
                 const std::string& stopwords, const std::string& countries) {
    json j;
    j["input"]["shards"] = cfg.shards;
    json slices = json::array();
    for (const auto& [lo, hi] : boundaries)
        slices.push_back(std::to_string(lo) + "-" + std::to_string(hi));
    j["input"]["slices"] = slices;
    j["input"]["countries"] = countries;
    j["prep"]["stopwords"] = stopwords;
    j["prep"]["unwanted"] = cfg.unwanted_path;
    j["prep"]["min_token_len"] = cfg.prep.min_token_len;
    j["prep"]["use_title"] = cfg.prep.use_title;
    j["prep"]["use_abstract"] = cfg.prep.use_abstract;
    j["prep"]["stemmer"] = cfg.prep.stemmer;
    j["cluster"]["k_min"] = cfg.k_min;
    j["cluster"]["k_max"] = cfg.k_max;
    j["cluster"]["restarts"] = cfg.restarts;
    j["cluster"]["max_iter"] = cfg.kmeans_max_iter;
    j["topics"]["k"] = cfg.lda_k;
    j["topics"]["alpha"] = cfg.alpha;
    j["topics"]["beta"] = cfg.beta;
    j["topics"]["iterations"] = cfg.iterations;
    j["topics"]["burn_in"] = cfg.burn_in;
    j["graphs"]["author_threshold"] = cfg.author_threshold;
    j["graphs"]["country_threshold"] = cfg.country_threshold;
    j["render"]["canvas_width"] = cfg.canvas_width;
    j["render"]["canvas_height"] = cfg.canvas_height;
    j["render"]["max_words"] = cfg.max_words;
    j["run"]["seed"] = cfg.seed;
    j["run"]["top_terms"] = cfg.top_terms;
    j["run"]["prominent_words"] = cfg.prominent_words;
    j["run"]["parallel"] = cfg.parallel_slices;
    j["stages"] = {{"trends", cfg.stage_trends},   {"frequency", cfg.stage_frequency},
                   {"cloud", cfg.stage_cloud},     {"graphs", cfg.stage_graphs},
                   {"cluster", cfg.stage_cluster}, {"topics", cfg.stage_topics},
                   {"network", cfg.stage_network}};
    return j;
}

} // namespace

RunResult run(const RunConfig& cfg) {
    validate(cfg);

    const std::string stopwords_path =
        cfg.stopwords_path.empty() ? default_data_file("stopwords_en.txt") : cfg.stopwords_path;
    const std::string countries_path =
        cfg.countries_path.empty() ? default_data_file("countries.txt") : cfg.countries_path;

    text::PrepConfig prep = cfg.prep;
    prep.stopwords = text::load_word_list(stopwords_path);
    if (!cfg.unwanted_path.empty()) prep.unwanted = text::load_word_list(cfg.unwanted_path);
    bib::CountryTable countries;
    if (cfg.stage_graphs) countries = bib::CountryTable::from_file(countries_path);

    fs::create_directories(cfg.out_dir);
    const std::string run_name = cfg.run_id.empty() ? stamp_run_name(cfg.out_dir) : cfg.run_id;
    const fs::path dir = fs::path(cfg.out_dir) / run_name;
    if (!cfg.run_id.empty() && fs::exists(dir))
        bad("run directory already exists: " + dir.string());
    fs::create_directories(dir);
    ArtifactLog log(dir);

    // Row layout mirrors the timing table: document counts first, then one
    // row per enabled stage in execution order.
    std::vector<std::string> row_names = {kDocRow, "Tokenization", "Cleaning of Data"};
    if (cfg.stage_trends) row_names.push_back("Formation Of Overall Trend");
    if (cfg.stage_cloud) row_names.push_back("Word Cloud Formation");
    if (cfg.stage_frequency)
        row_names.push_back("Formation Of Frequency Distribution (top 200 words)");
    if (cfg.stage_graphs) {
        row_names.push_back("Formation of Author Association");
        row_names.push_back("Formation of Country Association");
    }
    if (cfg.stage_cluster) row_names.push_back("Formation Of Elbow Chart");
    if (cfg.stage_topics) {
        row_names.push_back("Topic Formation");
        row_names.push_back("Formation of Word Cloud Of All Cluster");
    }
    if (cfg.stage_network) row_names.push_back("Network Of Topics");

    auto row_index = [&](const std::string& name) {
        return static_cast<std::size_t>(
            std::find(row_names.begin(), row_names.end(), name) - row_names.begin());
    };

    std::vector<std::vector<double>> wall, cpu; // sized once the slice count is known
    std::vector<std::vector<std::vector<std::string>>> prominent;
    std::vector<json> slice_info;
    std::vector<std::pair<int, int>> boundaries = cfg.slices;

    bib::Partition part;
    bib::Corpus corpus;
    auto fail = [&](const std::string& stage, const Error& e) -> StagedError {
        return StagedError{stage, e.code(), e.what()};
    };

    try {
        try {
            // ingest: parse every shard, merge, dedup, partition
            std::vector<std::vector<bib::BibRecord>> shards;
            std::vector<bib::ParseDiagnostic> diagnostics;
            for (const auto& path : cfg.shards) {
                std::ifstream in(path, std::ios::binary);
                if (!in) throw Error(ErrorCode::IoError, "cannot read shard " + path);
                std::ostringstream buf;
                buf << in.rdbuf();
                auto parsed = bib::parse_bibtex(buf.str(), fs::path(path).filename().string());
                shards.push_back(std::move(parsed.records));
                diagnostics.insert(diagnostics.end(), parsed.diagnostics.begin(),
                                   parsed.diagnostics.end());
            }
            corpus = bib::merge_and_dedup(shards);
            if (boundaries.empty()) {
                // no slices configured: one slice spanning the corpus
                if (corpus.records.empty())
                    throw Error(ErrorCode::EmptyCorpus, "no records found in the input shards");
                int lo = corpus.records.front().year, hi = lo;
                for (const auto& rec : corpus.records) {
                    lo = std::min(lo, rec.year);
                    hi = std::max(hi, rec.year);
                }
                boundaries = {{lo, hi}};
            }
            part = bib::partition_by_year(corpus, boundaries);

            std::ostringstream diag;
            write_diagnostics_jsonl(diag, diagnostics);
            log.write("diagnostics.jsonl", diag.str());
            log.write("corpus.bib", bib::serialize_bibtex(corpus.records));
            if (!part.unsliced.empty())
                log.write("unsliced.bib", bib::serialize_bibtex(part.unsliced));
        } catch (const Error& e) {
            throw fail("ingest", e);
        }

        const std::size_t n_slices = part.slices.size();
        wall.assign(row_names.size(), std::vector<double>(n_slices, 0.0));
        cpu.assign(row_names.size(), std::vector<double>(n_slices, 0.0));
        prominent.resize(n_slices);
        slice_info.resize(n_slices);

        // ---- per-slice pipeline ----
        auto run_slice = [&](std::size_t s) {
            const bib::YearSlice& slice = part.slices[s];
            const std::string& slug = slice.label;
            const std::uint64_t slice_seed = derive_seed(cfg.seed, s);
            const std::uint64_t km_seed =
                derive_seed(cfg.cluster_seed.value_or(slice_seed), 1);
            const std::uint64_t lda_seed = derive_seed(cfg.topics_seed.value_or(slice_seed), 2);
            const std::uint64_t cloud_seed = derive_seed(slice_seed, 3);

            json& info = slice_info[s];
            info["label"] = slug;
            info["documents"] = slice.records.size();
            info["seeds"] = {{"cluster", km_seed}, {"topics", lda_seed}, {"cloud", cloud_seed}};

            wall[row_index(kDocRow)][s] = static_cast<double>(slice.records.size());
            if (slice.records.empty()) return;

            auto stage = [&](const std::string& name, auto&& body) {
                StageTiming t;
                try {
                    t = time_stage(name, body);
                } catch (const Error& e) {
                    throw fail(name + " [" + slug + "]", e);
                }
                std::size_t r = row_index(name);
                wall[r][s] = t.wall_seconds;
                cpu[r][s] = t.cpu_seconds;
            };

            // tokenization: raw casefolded tokens straight off the records
            std::vector<std::vector<std::string>> raw(slice.records.size());
            stage("Tokenization", [&] {
                for (std::size_t i = 0; i < slice.records.size(); ++i) {
                    const auto& rec = slice.records[i];
                    std::string body;
                    if (prep.use_title) body += rec.title;
                    if (prep.use_abstract) {
                        if (!body.empty()) body += ' ';
                        body += rec.abstract;
                    }
                    raw[i] = text::tokenize(body);
                }
            });

            // cleaning: stop/unwanted filtering, stemming, matrix formation
            text::Vocabulary vocab;
            text::DocumentTermMatrix dtm;
            stage("Cleaning of Data", [&] {
                std::vector<text::TokenDoc> docs(slice.records.size());
                for (std::size_t i = 0; i < slice.records.size(); ++i) {
                    auto tokens = text::filter_tokens(raw[i], prep);
                    for (auto& t : tokens) t = text::porter_stem(t);
                    tokens = text::filter_tokens(std::move(tokens), prep);
                    docs[i] = {static_cast<int>(i), slice.records[i].year, std::move(tokens)};
                }
                std::tie(vocab, dtm) = text::build_dtm(docs);

                std::ostringstream mtx, voc, years;
                text::write_dtm(mtx, dtm);
                text::write_vocabulary(voc, vocab);
                text::write_doc_years(years, dtm);
                log.write(slug + "_dtm.mtx", mtx.str());
                log.write(slug + "_vocabulary.txt", voc.str());
                log.write(slug + "_doc_years.csv", years.str());
            });
            info["vocabulary"] = vocab.size();
            const auto col_sums = dtm.col_sums();
            info["tokens"] = std::accumulate(col_sums.begin(), col_sums.end(), std::uint64_t{0});

            if (cfg.stage_trends) {
                stage("Formation Of Overall Trend", [&] {
                    auto hist = trends::year_histogram(slice);
                    log.write(slug + "_trend.csv", render::chart_csv(hist));
                    log.write(slug + "_trend.svg", render::chart_svg(hist));
                });
            }

            if (cfg.stage_cloud && vocab.size() > 0) {
                stage("Word Cloud Formation", [&] {
                    auto table = trends::top_terms(dtm, vocab, cfg.max_words);
                    auto layout = render::layout_cloud(table, cfg.max_words, cfg.canvas_width,
                                                       cfg.canvas_height, cloud_seed);
                    log.write(slug + "_cloud.svg", render::emit_svg(layout));
                });
            }

            if (cfg.stage_frequency && vocab.size() > 0) {
                stage("Formation Of Frequency Distribution (top 200 words)", [&] {
                    auto table = trends::top_terms(dtm, vocab, cfg.top_terms);
                    log.write(slug + "_frequency.csv", render::chart_csv(table));
                    log.write(slug + "_frequency.svg", render::chart_svg(table, cfg.top_terms));
                });
            }

            auto write_graph = [&](const graphs::CoOccurrenceGraph& g, const std::string& base) {
                std::ostringstream gml, dot, nodes, cent;
                graphs::write_graphml(gml, g);
                graphs::write_dot(dot, g);
                graphs::write_node_table_csv(nodes, g);
                graphs::write_centrality_csv(cent, g);
                log.write(base + ".graphml", gml.str());
                log.write(base + ".dot", dot.str());
                log.write(base + "_nodes.csv", nodes.str());
                log.write(base + "_centrality.csv", cent.str());
            };

            if (cfg.stage_graphs) {
                stage("Formation of Author Association", [&] {
                    auto g = graphs::build_cooccurrence(slice, graphs::GraphKind::Author);
                    g = graphs::filter_by_contribution(g, cfg.author_threshold,
                                                       slice.records.size());
                    write_graph(g, slug + "_authors");
                });
                stage("Formation of Country Association", [&] {
                    auto g = graphs::build_cooccurrence(slice, graphs::GraphKind::Country,
                                                        &countries);
                    g = graphs::filter_by_contribution(g, cfg.country_threshold,
                                                       slice.records.size());
                    write_graph(g, slug + "_countries");
                });
            }

            cluster::WeightedMatrix weighted;
            cluster::ElbowCurve curve;
            bool have_curve = false;
            if (cfg.stage_cluster && vocab.size() > 0) {
                stage("Formation Of Elbow Chart", [&] {
                    weighted = cluster::tfidf(dtm);
                    const std::size_t nz = weighted.nonzero_rows();
                    if (nz == 0) return;
                    // a handful of documents cannot support the full default
                    // k range; clamp to the number of distinct points
                    const std::size_t lo = std::min(cfg.k_min, nz);
                    const std::size_t hi = std::min(cfg.k_max, nz);
                    if (lo < hi) {
                        curve = cluster::elbow_curve(weighted, lo, hi, km_seed, cfg.restarts,
                                                     cfg.kmeans_max_iter);
                    } else {
                        auto m = cluster::kmeans(weighted, lo, km_seed, cfg.restarts,
                                                 cfg.kmeans_max_iter);
                        curve.points = {{lo, m.inertia}};
                        curve.selected_k = lo;
                    }
                    have_curve = true;
                    log.write(slug + "_elbow.csv", render::chart_csv(curve));
                    log.write(slug + "_elbow.svg", render::chart_svg(curve));
                });
                if (have_curve) info["selected_k"] = curve.selected_k;
            }

            topics::TopicModel lda;
            cluster::ClusterModel km;
            bool have_topics = false, have_km = false;
            if (cfg.stage_topics && vocab.size() > 0 && (have_curve || cfg.lda_k > 0)) {
                stage("Topic Formation", [&] {
                    std::size_t k = cfg.lda_k > 0 ? cfg.lda_k : curve.selected_k;
                    k = std::min(k, vocab.size());
                    if (k == 0) return;

                    if (have_curve) {
                        const std::size_t km_k = std::min(k, weighted.nonzero_rows());
                        km = cluster::kmeans(weighted, km_k, km_seed, cfg.restarts,
                                             cfg.kmeans_max_iter);
                        have_km = true;
                        std::ostringstream report;
                        cluster::write_cluster_report_json(report, km, weighted, vocab,
                                                           cfg.prominent_words);
                        log.write(slug + "_clusters.json", report.str());
                        auto series = trends::group_year_trend(
                            km.assignment, dtm.row_year,
                            {slice.start_year, slice.end_year}, "cluster");
                        log.write(slug + "_cluster_trends.csv", wide_trend_csv(series));
                    }

                    topics::LdaConfig lc;
                    lc.topics = k;
                    lc.alpha = cfg.alpha;
                    lc.beta = cfg.beta;
                    lc.iterations = cfg.iterations;
                    lc.burn_in = cfg.burn_in;
                    lc.seed = lda_seed;
                    lda = topics::lda_fit(dtm, vocab, lc);
                    have_topics = true;

                    std::ostringstream report, theta;
                    topics::write_topic_report_json(report, lda, vocab, cfg.prominent_words);
                    topics::write_theta_csv(theta, lda);
                    log.write(slug + "_topics.json", report.str());
                    log.write(slug + "_theta.csv", theta.str());
                    prominent[s] = topics::topic_top_words(lda, vocab, cfg.prominent_words);
                });
                if (have_topics) info["lda_k"] = lda.k;

                if (have_km) {
                    stage("Formation of Word Cloud Of All Cluster", [&] {
                        for (std::size_t c = 0; c < km.k; ++c) {
                            std::map<std::size_t, std::uint64_t> counts;
                            for (std::size_t d = 0; d < dtm.n_docs; ++d) {
                                if (km.assignment[d] != static_cast<int>(c)) continue;
                                for (const auto& [term, count] : dtm.rows[d])
                                    counts[term] += count;
                            }
                            if (counts.empty()) continue;
                            auto table = counts_to_table(counts, vocab);
                            auto layout = render::layout_cloud(
                                table, cfg.max_words, cfg.canvas_width, cfg.canvas_height,
                                derive_seed(slice_seed, 16 + c));
                            log.write(slug + "_cloud_cluster" + std::to_string(c) + ".svg",
                                      render::emit_svg(layout));
                        }
                    });
                }
            }

            if (cfg.stage_network && have_topics) {
                stage("Network Of Topics", [&] {
                    graphs::CoOccurrenceGraph g;
                    for (std::size_t k = 0; k < lda.k; ++k) {
                        std::string label = "topic " + std::to_string(k);
                        if (s < prominent.size() && k < prominent[s].size() &&
                            !prominent[s][k].empty())
                            label += ": " + prominent[s][k].front();
                        g.nodes.push_back({k, label, 0});
                    }
                    // a topic is "in" a document when it beats the uniform share
                    const double threshold = 1.0 / static_cast<double>(lda.k);
                    std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> edge;
                    for (std::size_t d = 0; d < dtm.n_docs; ++d) {
                        std::vector<std::size_t> present;
                        for (std::size_t k = 0; k < lda.k; ++k)
                            if (lda.theta[d][k] > threshold) present.push_back(k);
                        for (std::size_t k : present) g.nodes[k].weight += 1;
                        for (std::size_t i = 0; i < present.size(); ++i)
                            for (std::size_t j = i + 1; j < present.size(); ++j)
                                edge[{present[i], present[j]}] += 1;
                    }
                    for (const auto& [key, w] : edge) g.edges.push_back({key.first, key.second, w});

                    std::ostringstream gml, dot;
                    graphs::write_graphml(gml, g, "topics");
                    graphs::write_dot(dot, g, "topics");
                    log.write(slug + "_topic_network.graphml", gml.str());
                    log.write(slug + "_topic_network.dot", dot.str());
                });
            }
        };

        if (cfg.parallel_slices) {
            std::vector<std::optional<StagedError>> errors(n_slices);
            std::vector<std::thread> workers;
            for (std::size_t s = 0; s < n_slices; ++s) {
                workers.emplace_back([&, s] {
                    try {
                        run_slice(s);
                    } catch (const StagedError& e) {
                        errors[s] = e;
                    } catch (const Error& e) {
                        errors[s] = StagedError{"slice " + part.slices[s].label, e.code(), e.what()};
                    }
                });
            }
            for (auto& w : workers) w.join();
            for (const auto& e : errors)
                if (e) throw *e;
        } else {
            for (std::size_t s = 0; s < n_slices; ++s) run_slice(s);
        }

        // ---- corpus-level reports ----
        StageTimingReport report;
        for (const auto& slice : part.slices) report.slice_labels.push_back(slice.label);
        report.contended = cfg.parallel_slices;
        for (std::size_t r = 0; r < row_names.size(); ++r)
            report.rows.emplace_back(row_names[r], wall[r]);

        StageTimingReport cpu_report = report;
        for (std::size_t r = 0; r < row_names.size(); ++r)
            if (row_names[r] != kDocRow) cpu_report.rows[r].second = cpu[r];

        if (cfg.stage_topics) {
            std::ostringstream prom;
            write_prominent_text(prom, report.slice_labels, prominent);
            log.write("prominent_words.txt", prom.str());
        }

        std::ostringstream timing_csv, timing_cpu_csv, timing_txt;
        write_timing_csv(timing_csv, report);
        write_timing_csv(timing_cpu_csv, cpu_report);
        write_timing_text(timing_txt, report);
        log.write("timing.csv", timing_csv.str(), /*is_volatile=*/true);
        log.write("timing_cpu.csv", timing_cpu_csv.str(), /*is_volatile=*/true);
        log.write("timing.txt", timing_txt.str(), /*is_volatile=*/true);

        // ---- manifest ----
        json manifest;
        manifest["config"] = config_echo(cfg, boundaries, stopwords_path, countries_path);
        manifest["corpus"] = {{"records", corpus.records.size()},
                              {"duplicates_removed", corpus.dedup_count},
                              {"unsliced", part.unsliced.size()},
                              {"shards", corpus.provenance}};
        manifest["contended_timings"] = cfg.parallel_slices;
        manifest["seed"] = cfg.seed;
        manifest["slices"] = slice_info;
        json files = json::array();
        for (const auto& a : log.sorted()) {
            json f{{"path", a.path}, {"bytes", a.bytes}};
            if (a.is_volatile)
                f["volatile"] = true;
            else
                f["sha256"] = a.sha256;
            files.push_back(std::move(f));
        }
        manifest["artifacts"] = files;

        std::string manifest_bytes = manifest.dump(2) + "\n";
        {
            fs::path path = dir / "manifest.json";
            std::ofstream out(path, std::ios::binary);
            if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
            out << manifest_bytes;
        }

        RunResult result;
        result.dir = dir.string();
        result.timing = std::move(report);
        for (const auto& a : log.sorted()) result.artifacts.push_back(a.path);
        result.artifacts.push_back("manifest.json");
        std::sort(result.artifacts.begin(), result.artifacts.end());
        return result;
    } catch (const StagedError& e) {
        std::ofstream marker(dir / "FAILED", std::ios::binary);
        marker << "stage: " << e.stage << "\nerror: " << e.what << "\n";
        throw Error(e.code, "stage '" + e.stage + "' failed: " + e.what);
    } catch (const Error& e) {
        std::ofstream marker(dir / "FAILED", std::ios::binary);
        marker << "stage: setup\nerror: " << e.what() << "\n";
        throw;
    }
}

} // namespace trendkit::pipeline
