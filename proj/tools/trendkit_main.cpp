// trendkit: turn exported BibTeX citation records into research-trend
// artifacts (term trends, clusters, topics, co-authorship networks, word
// clouds) plus a per-stage timing report.
#include "CLI11.hpp"

#include "trendkit/bib.hpp"
#include "trendkit/error.hpp"
#include "trendkit/pipeline.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace trendkit;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> slices;
    std::string run_id;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "TOML-style run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "override the base random seed");
    cmd->add_option("-o,--out", opts.out, "override the output directory");
    cmd->add_option("--slice", opts.slices,
                    "restrict the run to the slices with these labels (repeatable)");
    cmd->add_option("--run-id", opts.run_id,
                    "fixed name for the run directory (default: timestamp)");
}

pipeline::RunConfig make_config(const CommonOpts& opts) {
    pipeline::RunConfig cfg = pipeline::load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (!opts.out.empty()) cfg.out_dir = opts.out;
    if (!opts.run_id.empty()) cfg.run_id = opts.run_id;
    if (!opts.slices.empty()) {
        std::vector<std::pair<int, int>> kept;
        for (const auto& [lo, hi] : cfg.slices) {
            std::string label = std::to_string(lo) + "-" + std::to_string(hi);
            for (const auto& want : opts.slices)
                if (label == want) kept.push_back({lo, hi});
        }
        if (kept.empty())
            throw Error(ErrorCode::BadConfig,
                        "--slice matched none of the configured year slices");
        cfg.slices = kept;
    }
    return cfg;
}

int execute(pipeline::RunConfig cfg) {
    auto result = pipeline::run(cfg);
    std::cout << "run directory: " << result.dir << "\n";
    std::cout << "artifacts: " << result.artifacts.size() << "\n\n";
    pipeline::write_timing_text(std::cout, result.timing);
    return 0;
}

void disable_all(pipeline::RunConfig& cfg) {
    cfg.stage_trends = cfg.stage_frequency = cfg.stage_cloud = cfg.stage_graphs =
        cfg.stage_cluster = cfg.stage_topics = cfg.stage_network = false;
}

// Parses, merges, and slices the corpus without any preprocessing; the
// remaining subcommands all go through pipeline::run with stage toggles.
int run_ingest(const CommonOpts& opts) {
    pipeline::RunConfig cfg = make_config(opts);
    pipeline::validate(cfg);

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
    auto corpus = bib::merge_and_dedup(shards);
    auto part = bib::partition_by_year(corpus, cfg.slices);

    fs::create_directories(cfg.out_dir);
    {
        std::ofstream out(fs::path(cfg.out_dir) / "corpus.bib", std::ios::binary);
        out << bib::serialize_bibtex(corpus.records);
    }
    {
        std::ofstream out(fs::path(cfg.out_dir) / "diagnostics.jsonl", std::ios::binary);
        pipeline::write_diagnostics_jsonl(out, diagnostics);
    }
    if (!part.unsliced.empty()) {
        std::ofstream out(fs::path(cfg.out_dir) / "unsliced.bib", std::ios::binary);
        out << bib::serialize_bibtex(part.unsliced);
    }

    std::cout << "records: " << corpus.records.size() << "\n"
              << "duplicates removed: " << corpus.dedup_count << "\n"
              << "parse diagnostics: " << diagnostics.size() << "\n";
    for (const auto& slice : part.slices)
        std::cout << "slice " << slice.label << ": " << slice.records.size() << " documents\n";
    if (!part.unsliced.empty())
        std::cout << "outside every slice: " << part.unsliced.size() << " documents\n";
    std::cout << "wrote corpus.bib to " << cfg.out_dir << "\n";
    return 0;
}

int run_report(const std::string& dir) {
    fs::path run_dir(dir);
    std::ifstream timing(run_dir / "timing.csv");
    if (!timing)
        throw Error(ErrorCode::IoError, "no timing.csv under " + dir + " (not a run directory?)");
    auto report = pipeline::read_timing_csv(timing);

    std::ifstream manifest_in(run_dir / "manifest.json");
    if (manifest_in) {
        auto manifest = nlohmann::json::parse(manifest_in, nullptr, false);
        if (!manifest.is_discarded())
            report.contended = manifest.value("contended_timings", false);
    }
    pipeline::write_timing_text(std::cout, report);

    std::ifstream prominent(run_dir / "prominent_words.txt");
    if (prominent) {
        std::cout << "\n" << prominent.rdbuf();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"corpus-analysis toolkit for bibliographic research trends"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string report_dir;

    auto* ingest = app.add_subcommand("ingest", "parse, dedup, and slice the corpus");
    add_common(ingest, opts);
    auto* prep = app.add_subcommand("prep", "tokenize, clean, and export document-term matrices");
    add_common(prep, opts);
    auto* trends_cmd =
        app.add_subcommand("trends", "per-year document trends and term frequencies");
    add_common(trends_cmd, opts);
    auto* cluster_cmd = app.add_subcommand("cluster", "TF-IDF k-means with elbow selection");
    add_common(cluster_cmd, opts);
    auto* topics_cmd = app.add_subcommand("topics", "LDA topics over each slice");
    add_common(topics_cmd, opts);
    auto* graphs_cmd =
        app.add_subcommand("graphs", "author and country co-occurrence networks");
    add_common(graphs_cmd, opts);
    auto* cloud_cmd = app.add_subcommand("cloud", "word-cloud SVGs per slice");
    add_common(cloud_cmd, opts);
    auto* run_cmd = app.add_subcommand("run", "the full pipeline, all configured stages");
    add_common(run_cmd, opts);
    auto* report_cmd =
        app.add_subcommand("report", "re-render the timing table of a finished run");
    report_cmd->add_option("dir", report_dir, "run directory holding timing.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return run_ingest(opts);
        if (report_cmd->parsed()) return run_report(report_dir);

        pipeline::RunConfig cfg = make_config(opts);
        if (prep->parsed()) {
            disable_all(cfg);
        } else if (trends_cmd->parsed()) {
            disable_all(cfg);
            cfg.stage_trends = cfg.stage_frequency = true;
        } else if (cluster_cmd->parsed()) {
            disable_all(cfg);
            cfg.stage_cluster = true;
        } else if (topics_cmd->parsed()) {
            disable_all(cfg);
            cfg.stage_cluster = cfg.stage_topics = true;
        } else if (graphs_cmd->parsed()) {
            disable_all(cfg);
            cfg.stage_graphs = true;
        } else if (cloud_cmd->parsed()) {
            disable_all(cfg);
            cfg.stage_cloud = true;
        }
        return execute(std::move(cfg));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
