#ifndef TRENDKIT_BIB_HPP
#define TRENDKIT_BIB_HPP

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trendkit::bib {

// One entry-level problem found while parsing or extracting. Parsing is
// total: a bad entry becomes a diagnostic, never an abort.
struct ParseDiagnostic {
    std::string file;
    int line = 0;
    std::string reason;
};

struct AuthorName {
    std::string family;
    std::string given; // may be empty
    std::string normalized; // casefolded "family, initials", the identity key

    bool operator==(const AuthorName&) const = default;
};

// Pure function of family+given; the only author identity this toolkit uses.
std::string normalize_author(std::string_view family, std::string_view given);

struct BibRecord {
    std::string key;
    std::vector<AuthorName> authors; // source order
    std::string title;
    std::string abstract; // may be empty
    int year = 0;
    std::vector<std::string> affiliations; // raw affiliation strings
    std::string source_shard;

    bool operator==(const BibRecord&) const = default;
};

struct ParseResult {
    std::vector<BibRecord> records;
    std::vector<ParseDiagnostic> diagnostics;
};

// Parses one exported .bib shard. Accepts UTF-8 (BOM tolerated) with a
// Latin-1 fallback; accented characters and LaTeX accent macros are reduced
// to base ASCII letters. Records without a usable year are quarantined as
// diagnostics. Throws Error(UnreadableInput) only when the bytes are not
// text at all.
ParseResult parse_bibtex(std::string_view bytes, const std::string& shard_name = "");

// Writes records back out as @article entries. parse(serialize(parse(x)))
// equals parse(x) on the fields this toolkit models.
std::string serialize_bibtex(const std::vector<BibRecord>& records);

struct Corpus {
    std::vector<BibRecord> records;
    std::vector<std::string> provenance;
    std::size_t dedup_count = 0;
};

// Concatenates shards in order and drops duplicates by (casefolded
// whitespace-collapsed title, year), keeping the first occurrence.
Corpus merge_and_dedup(const std::vector<std::vector<BibRecord>>& shards);

// Dedup identity used by merge_and_dedup, exposed for tests.
std::string normalized_title(std::string_view title);

struct YearSlice {
    std::string label;
    int start_year = 0;
    int end_year = 0; // inclusive
    std::vector<BibRecord> records;
};

struct Partition {
    std::vector<YearSlice> slices;
    std::vector<BibRecord> unsliced; // records outside every boundary
};

// Boundaries must be sorted and non-overlapping (inclusive ranges), or
// Error(OverlappingBoundaries) is thrown.
Partition partition_by_year(const Corpus& corpus,
                            const std::vector<std::pair<int, int>>& boundaries);

// Alias -> canonical country names; aliases are matched ignoring case,
// whitespace runs, and dots, canonical names are kept verbatim for display.
// The file format is one "alias = canonical" per line with '#' comments;
// canonical names map to themselves implicitly.
class CountryTable {
public:
    static CountryTable from_string(std::string_view text);
    static CountryTable from_file(const std::string& path);

    void add(std::string_view alias, std::string_view canonical);
    std::optional<std::string> lookup(std::string_view alias) const;
    std::size_t size() const { return map_.size(); }

private:
    std::unordered_map<std::string, std::string> map_;
};

struct CountryExtraction {
    std::vector<std::string> countries; // canonical, first-appearance order, deduped
    std::vector<ParseDiagnostic> diagnostics; // unmatched trailing segments
};

// Takes the last comma-separated segment of each affiliation and resolves it
// through the table. Matches Scopus affiliation formatting, where the
// country comes last.
CountryExtraction extract_countries(const BibRecord& record, const CountryTable& table);

// Casefolds ASCII and collapses whitespace runs; shared by dedup and country
// lookup.
std::string casefold_collapse(std::string_view text);

} // namespace trendkit::bib

#endif
