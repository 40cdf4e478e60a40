#ifndef TRENDKIT_PIPELINE_HPP
#define TRENDKIT_PIPELINE_HPP

#include "trendkit/bib.hpp"
#include "trendkit/error.hpp"
#include "trendkit/textprep.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace trendkit::pipeline {

// ---- stage timing ---------------------------------------------------------

struct StageTiming {
    std::string name;
    double wall_seconds = 0; // monotonic clock, millisecond resolution
    double cpu_seconds = 0;  // recorded but never compared across machines
};

namespace detail {
void stage_enter(); // throws Error(NestedTiming) when a stage is already open
void stage_exit();
double cpu_now();
} // namespace detail

class StageGuard {
public:
    StageGuard() { detail::stage_enter(); }
    ~StageGuard() { detail::stage_exit(); }
    StageGuard(const StageGuard&) = delete;
    StageGuard& operator=(const StageGuard&) = delete;
};

inline double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

// Runs `work` under the nesting guard and returns (result, timing); timing
// only when the computation is void.
template <typename F>
auto time_stage(const std::string& name, F&& work) {
    StageGuard guard;
    const auto wall0 = std::chrono::steady_clock::now();
    const double cpu0 = detail::cpu_now();
    auto finish = [&] {
        std::chrono::duration<double> wall = std::chrono::steady_clock::now() - wall0;
        return StageTiming{name, round_ms(wall.count()), detail::cpu_now() - cpu0};
    };
    if constexpr (std::is_void_v<std::invoke_result_t<F&>>) {
        work();
        return finish();
    } else {
        auto result = work();
        return std::pair{std::move(result), finish()};
    }
}

// ---- configuration ---------------------------------------------------------

struct RunConfig {
    std::vector<std::string> shards;
    std::vector<std::pair<int, int>> slices; // inclusive year ranges
    std::string countries_path;              // bundled table when empty

    text::PrepConfig prep;      // word sets loaded from the paths below at run time
    std::string stopwords_path; // bundled list when empty
    std::string unwanted_path;  // optional domain noise list

    std::size_t k_min = 1, k_max = 8;
    std::size_t restarts = 10;
    std::size_t kmeans_max_iter = 300;
    std::optional<std::uint64_t> cluster_seed; // default: derived from `seed`

    std::size_t lda_k = 0; // 0 = elbow-selected k
    double alpha = -1.0;   // negative = 50/K
    double beta = 0.01;
    std::size_t iterations = 2000;
    std::size_t burn_in = 500;
    std::optional<std::uint64_t> topics_seed;

    double author_threshold = 0.0;
    double country_threshold = 0.0;

    double canvas_width = 800, canvas_height = 600;
    std::size_t max_words = 100;

    std::uint64_t seed = 2024;
    std::string out_dir = "out";
    std::string run_id; // empty = timestamp-derived directory name
    std::size_t top_terms = 200;
    std::size_t prominent_words = 5;
    bool parallel_slices = false;

    bool stage_trends = true;
    bool stage_frequency = true;
    bool stage_cloud = true;
    bool stage_graphs = true;
    bool stage_cluster = true;
    bool stage_topics = true;
    bool stage_network = true;
};

// TOML-style `key = value` file with [section] headers, '#' comments, quoted
// strings, string arrays, numbers, and booleans. Unknown keys are BadConfig.
// Relative paths are resolved against `base_dir` (for load_config, the
// config file's directory).
RunConfig parse_config(std::string_view text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

// Checks numeric ranges, stage-toggle dependencies, and that every referenced
// file exists. Throws Error(BadConfig).
void validate(const RunConfig& config);

// ---- timing report ---------------------------------------------------------

struct StageTimingReport {
    std::vector<std::string> slice_labels;                         // columns
    std::vector<std::pair<std::string, std::vector<double>>> rows; // per-slice values
    bool contended = false; // slices ran in parallel; rows not comparable

    // Per-slice sums over the duration rows (the document-count row is not a
    // duration and is excluded).
    std::vector<double> totals() const;
};

void write_timing_csv(std::ostream& out, const StageTimingReport& report);
void write_timing_text(std::ostream& out, const StageTimingReport& report);
StageTimingReport read_timing_csv(std::istream& in);

// ---- run orchestration -----------------------------------------------------

struct RunResult {
    std::string dir; // the stamped output directory
    StageTimingReport timing;
    std::vector<std::string> artifacts; // relative paths, sorted
};

// Executes ingest -> prep -> trends -> cluster -> topics -> graphs -> renders
// per year slice, writes every artifact plus manifest.json under a fresh
// directory below config.out_dir, and returns the timing report. On any
// stage error a FAILED marker naming the stage is left behind and the error
// is rethrown.
RunResult run(const RunConfig& config);

// ---- small shared helpers --------------------------------------------------

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

void write_diagnostics_jsonl(std::ostream& out, const std::vector<bib::ParseDiagnostic>& diags);
std::vector<bib::ParseDiagnostic> read_diagnostics_jsonl(std::istream& in);

// Rows-by-year-slot table of prominent words: one row per topic ("Cluster
// n"), one column per slice, "--" where a slice has fewer topics.
void write_prominent_text(std::ostream& out, const std::vector<std::string>& slice_labels,
                          const std::vector<std::vector<std::vector<std::string>>>& topics);

} // namespace trendkit::pipeline

#endif
