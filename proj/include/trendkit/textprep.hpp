#ifndef TRENDKIT_TEXTPREP_HPP
#define TRENDKIT_TEXTPREP_HPP

#include "trendkit/bib.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace trendkit::text {

struct PrepConfig {
    std::size_t min_token_len = 3;
    std::unordered_set<std::string> stopwords;
    std::unordered_set<std::string> unwanted; // domain noise, empty by default
    bool use_title = true;
    bool use_abstract = true;
    std::string stemmer = "porter"; // the only supported algorithm
};

struct TokenDoc {
    int doc_id = 0;
    int year = 0;
    std::vector<std::string> stems;

    bool operator==(const TokenDoc&) const = default;
};

struct Vocabulary {
    std::vector<std::string> terms; // lexicographically sorted
    std::unordered_map<std::string, std::size_t> index;

    std::size_t size() const { return terms.size(); }
};

// Sparse row-major counts; zero entries are never stored.
struct DocumentTermMatrix {
    std::size_t n_docs = 0;
    std::size_t n_terms = 0;
    // per row: (term id, count), sorted by term id, count >= 1
    std::vector<std::vector<std::pair<std::size_t, std::uint32_t>>> rows;
    std::vector<int> row_year; // doc -> publication year

    std::size_t nnz() const;
    std::uint64_t row_sum(std::size_t doc) const;
    std::vector<std::uint64_t> col_sums() const;
};

// Casefolded maximal runs of ASCII letters; digits and punctuation separate.
std::vector<std::string> tokenize(std::string_view text);

// Drops tokens in either word set and tokens shorter than min_token_len.
std::vector<std::string> filter_tokens(std::vector<std::string> tokens, const PrepConfig& config);

// Tokenize -> filter -> stem -> filter again (stemming can collide with the
// stop sets). Every record yields a TokenDoc, even when all tokens fall away.
std::vector<TokenDoc> preprocess(const std::vector<bib::BibRecord>& records,
                                 const PrepConfig& config);

std::pair<Vocabulary, DocumentTermMatrix> build_dtm(const std::vector<TokenDoc>& docs);

// One word per line, '#' comments, casefolded on load.
std::unordered_set<std::string> load_word_list(const std::string& path);
std::unordered_set<std::string> parse_word_list(std::string_view text);

// MatrixMarket coordinate format with 1-based indices plus a vocabulary
// sidecar (one term per line) and an optional doc_id,year sidecar.
void write_dtm(std::ostream& matrix, const DocumentTermMatrix& dtm);
void write_vocabulary(std::ostream& out, const Vocabulary& vocab);
void write_doc_years(std::ostream& out, const DocumentTermMatrix& dtm);

DocumentTermMatrix read_dtm(std::istream& matrix);
Vocabulary read_vocabulary(std::istream& in);
void read_doc_years(std::istream& in, DocumentTermMatrix& dtm);

} // namespace trendkit::text

#endif
