#include "trendkit/textprep.hpp"

#include "trendkit/error.hpp"
#include "trendkit/porter.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace trendkit::text {

std::size_t DocumentTermMatrix::nnz() const {
    std::size_t n = 0;
    for (const auto& row : rows) n += row.size();
    return n;
}

std::uint64_t DocumentTermMatrix::row_sum(std::size_t doc) const {
    std::uint64_t sum = 0;
    for (const auto& [term, count] : rows.at(doc)) sum += count;
    return sum;
}

std::vector<std::uint64_t> DocumentTermMatrix::col_sums() const {
    std::vector<std::uint64_t> sums(n_terms, 0);
    for (const auto& row : rows) {
        for (const auto& [term, count] : row) sums[term] += count;
    }
    return sums;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> filter_tokens(std::vector<std::string> tokens, const PrepConfig& config) {
    std::erase_if(tokens, [&](const std::string& t) {
        return t.size() < config.min_token_len || config.stopwords.count(t) > 0 ||
               config.unwanted.count(t) > 0;
    });
    return tokens;
}

std::vector<TokenDoc> preprocess(const std::vector<bib::BibRecord>& records,
                                 const PrepConfig& config) {
    if (config.stemmer != "porter") {
        throw Error(ErrorCode::BadConfig, "unknown stemmer '" + config.stemmer + "'");
    }
    if (config.min_token_len < 1) {
        throw Error(ErrorCode::BadConfig, "min_token_len must be >= 1");
    }
    std::vector<TokenDoc> docs;
    docs.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        std::string body;
        if (config.use_title) body += rec.title;
        if (config.use_abstract) {
            if (!body.empty()) body += ' ';
            body += rec.abstract;
        }
        auto tokens = filter_tokens(tokenize(body), config);
        for (auto& t : tokens) t = porter_stem(t);
        tokens = filter_tokens(std::move(tokens), config);

        TokenDoc doc;
        doc.doc_id = static_cast<int>(i);
        doc.year = rec.year;
        doc.stems = std::move(tokens);
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::pair<Vocabulary, DocumentTermMatrix> build_dtm(const std::vector<TokenDoc>& docs) {
    Vocabulary vocab;
    {
        std::vector<std::string> all;
        for (const auto& doc : docs) all.insert(all.end(), doc.stems.begin(), doc.stems.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        vocab.terms = std::move(all);
        vocab.index.reserve(vocab.terms.size());
        for (std::size_t i = 0; i < vocab.terms.size(); ++i) vocab.index[vocab.terms[i]] = i;
    }

    DocumentTermMatrix dtm;
    dtm.n_docs = docs.size();
    dtm.n_terms = vocab.terms.size();
    dtm.rows.resize(docs.size());
    dtm.row_year.resize(docs.size(), 0);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        dtm.row_year[d] = docs[d].year;
        std::map<std::size_t, std::uint32_t> counts; // ordered -> sorted row
        for (const auto& stem : docs[d].stems) counts[vocab.index.at(stem)] += 1;
        dtm.rows[d].assign(counts.begin(), counts.end());
    }
    return {std::move(vocab), std::move(dtm)};
}

std::unordered_set<std::string> parse_word_list(std::string_view text) {
    std::unordered_set<std::string> words;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string_view line =
            text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::string word;
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            }
        }
        if (!word.empty()) words.insert(std::move(word));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return words;
}

std::unordered_set<std::string> load_word_list(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open word list '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_word_list(buf.str());
}

void write_dtm(std::ostream& matrix, const DocumentTermMatrix& dtm) {
    matrix << "%%MatrixMarket matrix coordinate integer general\n";
    matrix << dtm.n_docs << ' ' << dtm.n_terms << ' ' << dtm.nnz() << '\n';
    for (std::size_t d = 0; d < dtm.rows.size(); ++d) {
        for (const auto& [term, count] : dtm.rows[d]) {
            matrix << (d + 1) << ' ' << (term + 1) << ' ' << count << '\n';
        }
    }
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
    for (const auto& term : vocab.terms) out << term << '\n';
}

void write_doc_years(std::ostream& out, const DocumentTermMatrix& dtm) {
    out << "doc_id,year\n";
    for (std::size_t d = 0; d < dtm.row_year.size(); ++d) {
        out << d << ',' << dtm.row_year[d] << '\n';
    }
}

DocumentTermMatrix read_dtm(std::istream& matrix) {
    std::string line;
    // header and comments
    do {
        if (!std::getline(matrix, line)) {
            throw Error(ErrorCode::IoError, "matrix stream is empty");
        }
    } while (!line.empty() && line[0] == '%');

    DocumentTermMatrix dtm;
    std::size_t nnz = 0;
    {
        std::istringstream dims(line);
        if (!(dims >> dtm.n_docs >> dtm.n_terms >> nnz)) {
            throw Error(ErrorCode::IoError, "malformed matrix dimension line '" + line + "'");
        }
    }
    dtm.rows.resize(dtm.n_docs);
    dtm.row_year.assign(dtm.n_docs, 0);
    for (std::size_t i = 0; i < nnz; ++i) {
        std::size_t d = 0, t = 0;
        std::uint32_t c = 0;
        if (!(matrix >> d >> t >> c) || d < 1 || d > dtm.n_docs || t < 1 || t > dtm.n_terms) {
            throw Error(ErrorCode::IoError, "malformed matrix entry at line " + std::to_string(i));
        }
        dtm.rows[d - 1].emplace_back(t - 1, c);
    }
    for (auto& row : dtm.rows) std::sort(row.begin(), row.end());
    return dtm;
}

Vocabulary read_vocabulary(std::istream& in) {
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        vocab.index[line] = vocab.terms.size();
        vocab.terms.push_back(line);
    }
    return vocab;
}

void read_doc_years(std::istream& in, DocumentTermMatrix& dtm) {
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        std::size_t d = std::stoul(line.substr(0, comma));
        if (d < dtm.row_year.size()) dtm.row_year[d] = std::stoi(line.substr(comma + 1));
    }
}

} // namespace trendkit::text
