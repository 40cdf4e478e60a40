#include "trendkit/bib.hpp"

#include "trendkit/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace trendkit::bib {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string casefold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(lower(c));
    return out;
}

// ---- byte decoding -------------------------------------------------------
//
// Everything downstream works on plain ASCII, so the decoder folds accented
// letters onto their base letters up front. Exports are UTF-8 these days but
// older ones are Latin-1; an invalid UTF-8 sequence anywhere flips the whole
// file to the Latin-1 reading.

// Base letters for U+0100..U+017F (Latin Extended-A), '?' where a multi-char
// expansion is handled separately.
constexpr const char* kExtendedA =
    "AaAaAaCcCcCcCcDdDd"   // 0100-0111
    "EeEeEeEeEe"           // 0112-011B
    "GgGgGgGgHhHh"         // 011C-0127
    "IiIiIiIiIi"           // 0128-0131
    "??JjKkk"              // 0132-0138 (IJ/ij expanded below)
    "LlLlLlLlLl"           // 0139-0142
    "NnNnNnnNn"            // 0143-014B
    "OoOoOo??"             // 014C-0153 (OE/oe expanded below)
    "RrRrRr"               // 0154-0159
    "SsSsSsSs"             // 015A-0161
    "TtTtTt"               // 0162-0167
    "UuUuUuUuUuUu"         // 0168-0173
    "WwYyY"                // 0174-0178
    "ZzZzZzs";             // 0179-017F

void append_codepoint(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
        return;
    }
    switch (cp) {
    case 0xC6: out += "AE"; return;
    case 0xE6: out += "ae"; return;
    case 0xD0: out += "D"; return;
    case 0xF0: out += "d"; return;
    case 0xDE: out += "Th"; return;
    case 0xFE: out += "th"; return;
    case 0xDF: out += "ss"; return;
    case 0x132: out += "IJ"; return;
    case 0x133: out += "ij"; return;
    case 0x152: out += "OE"; return;
    case 0x153: out += "oe"; return;
    default: break;
    }
    if (cp >= 0xC0 && cp <= 0xFF) {
        static constexpr const char* kLatin1 =
            "AAAAAA?CEEEEIIII?NOOOOO OUUUUY??aaaaaa?ceeeeiiii?nooooo ouuuuy?y";
        char c = kLatin1[cp - 0xC0];
        if (c != '?') {
            out.push_back(c);
            return;
        }
    }
    if (cp >= 0x100 && cp <= 0x17F) {
        char c = kExtendedA[cp - 0x100];
        if (c != '?') {
            out.push_back(c);
            return;
        }
    }
    if ((cp >= 0x2010 && cp <= 0x2015) || cp == 0x2212) {
        out.push_back('-');
        return;
    }
    if (cp >= 0x2018 && cp <= 0x201B) {
        out.push_back('\'');
        return;
    }
    if (cp >= 0x201C && cp <= 0x201F) {
        out.push_back('"');
        return;
    }
    if (cp == 0x2026) {
        out += "...";
        return;
    }
    out.push_back(' '); // anything else is noise for this toolkit
}

bool decode_utf8(std::string_view bytes, std::string& out) {
    out.clear();
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
        unsigned char b = static_cast<unsigned char>(bytes[i]);
        if (b < 0x80) {
            out.push_back(static_cast<char>(b));
            ++i;
            continue;
        }
        int extra;
        unsigned long cp;
        if ((b & 0xE0) == 0xC0) {
            extra = 1;
            cp = b & 0x1F;
        } else if ((b & 0xF0) == 0xE0) {
            extra = 2;
            cp = b & 0x0F;
        } else if ((b & 0xF8) == 0xF0) {
            extra = 3;
            cp = b & 0x07;
        } else {
            return false;
        }
        if (i + extra >= bytes.size()) return false;
        for (int k = 1; k <= extra; ++k) {
            unsigned char cont = static_cast<unsigned char>(bytes[i + k]);
            if ((cont & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cont & 0x3F);
        }
        // reject overlong encodings and surrogates so Latin-1 files with
        // accidental continuation-shaped bytes fall through to the fallback
        if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
            (extra == 3 && cp < 0x10000) || (cp >= 0xD800 && cp <= 0xDFFF) ||
            cp > 0x10FFFF) {
            return false;
        }
        append_codepoint(out, cp);
        i += 1 + extra;
    }
    return true;
}

std::string decode_latin1(std::string_view bytes) {
    std::string out;
    out.reserve(bytes.size());
    for (char c : bytes) append_codepoint(out, static_cast<unsigned char>(c));
    return out;
}

std::string decode_bytes(std::string_view bytes) {
    if (bytes.find('\0') != std::string_view::npos) {
        throw Error(ErrorCode::UnreadableInput, "input contains NUL bytes, not a text file");
    }
    if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xEF &&
        static_cast<unsigned char>(bytes[1]) == 0xBB &&
        static_cast<unsigned char>(bytes[2]) == 0xBF) {
        bytes.remove_prefix(3);
    }
    std::string out;
    if (decode_utf8(bytes, out)) return out;
    return decode_latin1(bytes);
}

// ---- LaTeX cleanup -------------------------------------------------------
//
// Accent macros ("Schl{\"o}gl", "\'{e}") become their base letter; other
// macros are dropped while their braced arguments survive the later brace
// strip. This runs before brace stripping so author-name splitting can still
// see protective braces like {Barnes and Noble}.

bool macro_replacement(const std::string& word, std::string& out) {
    static const std::unordered_map<std::string, std::string> kTable = {
        {"ss", "ss"}, {"ae", "ae"}, {"AE", "AE"}, {"oe", "oe"}, {"OE", "OE"},
        {"aa", "a"},  {"AA", "A"},  {"o", "o"},   {"O", "O"},   {"l", "l"},
        {"L", "L"},   {"i", "i"},   {"j", "j"},   {"dh", "d"},  {"DH", "D"},
        {"th", "th"}, {"TH", "TH"}, {"ng", "n"},  {"NG", "N"},
    };
    auto it = kTable.find(word);
    if (it == kTable.end()) return false;
    out = it->second;
    return true;
}

bool is_word_accent(const std::string& word) {
    return word.size() == 1 && std::string("cvuHkbdrt").find(word[0]) != std::string::npos;
}

// Emits the argument of an accent macro: the next letter, or the contents of
// the next braced group, with \i and \j reduced to plain letters.
void emit_accent_argument(std::string_view s, std::size_t& i, std::string& out) {
    while (i < s.size() && is_space(s[i])) ++i;
    if (i >= s.size()) return;
    if (s[i] == '{') {
        ++i;
        int depth = 1;
        while (i < s.size() && depth > 0) {
            char c = s[i];
            if (c == '{') ++depth;
            else if (c == '}') --depth;
            else if (c == '\\') {
                ++i;
                if (i < s.size() && (s[i] == 'i' || s[i] == 'j')) out.push_back(s[i]);
                ++i;
                continue;
            } else out.push_back(c);
            ++i;
        }
        return;
    }
    if (s[i] == '\\') {
        ++i;
        if (i < s.size() && (s[i] == 'i' || s[i] == 'j')) out.push_back(s[i]);
        ++i;
        return;
    }
    out.push_back(s[i]);
    ++i;
}

std::string latex_strip(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c == '$') { // math delimiters, keep the content
            ++i;
            continue;
        }
        if (c != '\\') {
            out.push_back(c);
            ++i;
            continue;
        }
        ++i;
        if (i >= s.size()) break;
        char next = s[i];
        if (std::string("'`\"^~=.").find(next) != std::string::npos) {
            ++i;
            emit_accent_argument(s, i, out);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(next))) {
            std::string word;
            while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) {
                word.push_back(s[i]);
                ++i;
            }
            std::string repl;
            if (macro_replacement(word, repl)) {
                out += repl;
                if (i + 1 < s.size() && s[i] == '{' && s[i + 1] == '}') i += 2;
            } else if (is_word_accent(word)) {
                emit_accent_argument(s, i, out);
            }
            // other macros vanish; their braced arguments remain as text
            continue;
        }
        switch (next) {
        case '&': case '%': case '$': case '#': case '_':
            out.push_back(next);
            break;
        case '\\': case ',': case ';': case ' ':
            out.push_back(' ');
            break;
        default:
            break; // \{ \} \- and friends contribute nothing
        }
        ++i;
    }
    return out;
}

std::string strip_braces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c != '{' && c != '}') out.push_back(c);
    }
    return out;
}

std::string collapse_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true; // leading whitespace is dropped
    for (char c : s) {
        if (is_space(c)) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

std::string clean_value(std::string_view raw) {
    return collapse_ws(strip_braces(latex_strip(raw)));
}

// ---- author names --------------------------------------------------------

// Splits an author field on " and " at brace depth zero. Runs after LaTeX
// stripping but before brace removal, so {Barnes and Noble} stays whole.
std::vector<std::string> split_authors(std::string_view field) {
    std::vector<std::string> parts;
    int depth = 0;
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < field.size()) {
        char c = field[i];
        if (c == '{') ++depth;
        else if (c == '}') depth = std::max(0, depth - 1);
        else if (depth == 0 && is_space(c)) {
            std::size_t w = i + 1;
            if (w + 3 <= field.size() && lower(field[w]) == 'a' && lower(field[w + 1]) == 'n' &&
                lower(field[w + 2]) == 'd' && (w + 3 == field.size() || is_space(field[w + 3]))) {
                parts.emplace_back(field.substr(start, i - start));
                i = w + 3;
                start = i;
                continue;
            }
        }
        ++i;
    }
    parts.emplace_back(field.substr(start));
    return parts;
}

// True when the trimmed part is one balanced {...} group, e.g. a corporate
// name that must never be split into given/family.
bool fully_braced(std::string_view part, std::string_view& inner) {
    std::size_t a = 0, b = part.size();
    while (a < b && is_space(part[a])) ++a;
    while (b > a && is_space(part[b - 1])) --b;
    if (b - a < 2 || part[a] != '{' || part[b - 1] != '}') return false;
    int depth = 0;
    for (std::size_t i = a; i < b; ++i) {
        if (part[i] == '{') ++depth;
        else if (part[i] == '}') {
            --depth;
            if (depth == 0 && i != b - 1) return false;
        }
    }
    inner = part.substr(a + 1, b - a - 2);
    return depth == 0;
}

std::optional<AuthorName> parse_name(std::string_view part) {
    if (std::string_view inner; fully_braced(part, inner)) {
        AuthorName name;
        name.family = collapse_ws(strip_braces(inner));
        if (name.family.empty()) return std::nullopt;
        name.normalized = normalize_author(name.family, "");
        return name;
    }
    std::string flat = collapse_ws(strip_braces(part));
    if (flat.empty()) return std::nullopt;
    AuthorName name;
    auto comma = flat.find(',');
    if (comma != std::string::npos) {
        name.family = collapse_ws(flat.substr(0, comma));
        name.given = collapse_ws(flat.substr(comma + 1));
    } else {
        auto space = flat.rfind(' ');
        if (space == std::string::npos) {
            name.family = flat;
        } else {
            name.family = flat.substr(space + 1);
            name.given = flat.substr(0, space);
        }
    }
    if (name.family.empty() && name.given.empty()) return std::nullopt;
    if (name.family.empty()) {
        name.family = name.given;
        name.given.clear();
    }
    name.normalized = normalize_author(name.family, name.given);
    return name;
}

// ---- entry lexing --------------------------------------------------------

struct Cursor {
    std::string_view s;
    std::size_t i = 0;
    int line = 1;

    bool eof() const { return i >= s.size(); }
    char peek() const { return s[i]; }
    void advance() {
        if (s[i] == '\n') ++line;
        ++i;
    }
    void skip_ws() {
        while (!eof() && is_space(peek())) advance();
    }
};

std::string read_ident(Cursor& c) {
    std::string out;
    while (!c.eof()) {
        char ch = c.peek();
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.') {
            out.push_back(ch);
            c.advance();
        } else break;
    }
    return out;
}

// Skips a balanced {...} or (...) group; used for @comment/@preamble/@string
// bodies and for abandoning broken entries.
void skip_group(Cursor& c) {
    if (c.eof()) return;
    char open = c.peek();
    char close;
    if (open == '{') close = '}';
    else if (open == '(') close = ')';
    else return;
    c.advance();
    int depth = 1;
    while (!c.eof() && depth > 0) {
        char ch = c.peek();
        if (ch == '{' || (open == '(' && ch == '(')) ++depth;
        else if (ch == close || ch == '}') {
            if (ch == close || depth > 1) --depth;
        }
        c.advance();
    }
}

struct RawValue {
    std::string text;
    bool macro = false; // a bare non-numeric token appeared
    std::string macro_name;
    bool ok = true;
};

RawValue read_value(Cursor& c, char entry_close) {
    RawValue v;
    bool expect_part = true;
    while (true) {
        c.skip_ws();
        if (c.eof()) {
            v.ok = false;
            return v;
        }
        if (expect_part) {
            char ch = c.peek();
            if (ch == '{') {
                c.advance();
                int depth = 1;
                while (!c.eof()) {
                    char in = c.peek();
                    if (in == '{') ++depth;
                    else if (in == '}') {
                        --depth;
                        if (depth == 0) {
                            c.advance();
                            break;
                        }
                    }
                    v.text.push_back(in);
                    c.advance();
                }
                if (depth != 0) {
                    v.ok = false;
                    return v;
                }
            } else if (ch == '"') {
                c.advance();
                int depth = 0;
                bool closed = false;
                while (!c.eof()) {
                    char in = c.peek();
                    if (in == '{') ++depth;
                    else if (in == '}') depth = std::max(0, depth - 1);
                    else if (in == '"' && depth == 0) {
                        c.advance();
                        closed = true;
                        break;
                    }
                    v.text.push_back(in);
                    c.advance();
                }
                if (!closed) {
                    v.ok = false;
                    return v;
                }
            } else {
                std::string token;
                while (!c.eof()) {
                    char in = c.peek();
                    if (is_space(in) || in == ',' || in == '#' || in == entry_close ||
                        in == '}' || in == '@') {
                        break;
                    }
                    token.push_back(in);
                    c.advance();
                }
                if (token.empty()) {
                    v.ok = false;
                    return v;
                }
                bool numeric = std::all_of(token.begin(), token.end(), [](char t) {
                    return std::isdigit(static_cast<unsigned char>(t));
                });
                if (!numeric) {
                    v.macro = true;
                    if (v.macro_name.empty()) v.macro_name = token;
                }
                v.text += token;
            }
            expect_part = false;
        } else if (c.peek() == '#') {
            c.advance();
            expect_part = true;
        } else {
            return v;
        }
    }
}

std::optional<int> parse_year_value(const std::string& cleaned) {
    std::size_t i = 0;
    while (i < cleaned.size() && !std::isdigit(static_cast<unsigned char>(cleaned[i]))) ++i;
    if (i == cleaned.size()) return std::nullopt;
    long y = 0;
    std::size_t digits = 0;
    while (i < cleaned.size() && std::isdigit(static_cast<unsigned char>(cleaned[i]))) {
        y = y * 10 + (cleaned[i] - '0');
        ++i;
        ++digits;
        if (digits > 4) return std::nullopt;
    }
    if (y < 1 || y > 9999) return std::nullopt;
    return static_cast<int>(y);
}

} // namespace

std::string casefold_collapse(std::string_view text) {
    return casefold(collapse_ws(text));
}

std::string normalize_author(std::string_view family, std::string_view given) {
    std::string fam = casefold_collapse(family);
    std::string initials;
    bool in_word = false;
    for (char c : given) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            if (!in_word) {
                initials.push_back(lower(c));
                initials.push_back('.');
            }
            in_word = true;
        } else {
            in_word = false;
        }
    }
    if (initials.empty()) return fam;
    return fam + ", " + initials;
}

std::string normalized_title(std::string_view title) {
    return casefold_collapse(title);
}

ParseResult parse_bibtex(std::string_view bytes, const std::string& shard_name) {
    ParseResult result;
    std::string text = decode_bytes(bytes);
    Cursor c{text};
    auto diag = [&](int line, std::string reason) {
        result.diagnostics.push_back({shard_name, line, std::move(reason)});
    };

    while (!c.eof()) {
        if (c.peek() != '@') {
            c.advance();
            continue;
        }
        int entry_line = c.line;
        c.advance();
        std::string type = casefold(read_ident(c));
        if (type.empty()) {
            diag(entry_line, "stray '@' with no entry type");
            continue;
        }
        c.skip_ws();
        if (type == "comment" || type == "preamble") {
            skip_group(c);
            continue;
        }
        if (type == "string") {
            diag(entry_line, "@string macro definitions are not supported; definition ignored");
            skip_group(c);
            continue;
        }
        if (c.eof() || (c.peek() != '{' && c.peek() != '(')) {
            diag(entry_line, "expected '{' after '@" + type + "'");
            continue;
        }
        char open = c.peek();
        char close = open == '{' ? '}' : ')';
        c.advance();
        c.skip_ws();

        std::string key;
        while (!c.eof()) {
            char ch = c.peek();
            if (ch == ',' || ch == close || is_space(ch) || ch == '@') break;
            key.push_back(ch);
            c.advance();
        }
        if (key.empty()) {
            diag(entry_line, "entry missing citation key; entry skipped");
            while (!c.eof() && c.peek() != close && c.peek() != '@') c.advance();
            if (!c.eof() && c.peek() == close) c.advance();
            continue;
        }

        std::unordered_map<std::string, std::string> fields;
        bool broken = false;
        while (true) {
            c.skip_ws();
            if (c.eof()) {
                diag(entry_line, "unterminated entry '" + key + "'");
                broken = true;
                break;
            }
            char ch = c.peek();
            if (ch == close) {
                c.advance();
                break;
            }
            if (ch == ',') {
                c.advance();
                continue;
            }
            if (ch == '@') {
                diag(entry_line, "unterminated entry '" + key + "'");
                broken = true;
                break;
            }
            int field_line = c.line;
            std::string fname = casefold(read_ident(c));
            c.skip_ws();
            if (fname.empty() || c.eof() || c.peek() != '=') {
                diag(field_line, "malformed field in entry '" + key + "'; entry skipped");
                while (!c.eof() && c.peek() != '@') {
                    if (c.peek() == close) {
                        c.advance();
                        break;
                    }
                    c.advance();
                }
                broken = true;
                break;
            }
            c.advance(); // '='
            RawValue value = read_value(c, close);
            if (!value.ok) {
                diag(field_line, "unterminated value for field '" + fname + "' in entry '" + key + "'");
                broken = true;
                break;
            }
            if (value.macro) {
                diag(field_line, "string macro '" + value.macro_name + "' in entry '" + key +
                                     "' is not expanded");
            }
            fields.emplace(fname, value.text); // first occurrence wins
        }
        if (broken) continue;

        auto year_it = fields.find("year");
        if (year_it == fields.end()) {
            diag(entry_line, "entry '" + key + "' quarantined: missing field 'year'");
            continue;
        }
        auto year = parse_year_value(clean_value(year_it->second));
        if (!year) {
            diag(entry_line, "entry '" + key + "' quarantined: unparseable field 'year' (value '" +
                                 collapse_ws(year_it->second) + "')");
            continue;
        }

        BibRecord rec;
        rec.key = key;
        rec.year = *year;
        rec.source_shard = shard_name;
        if (auto it = fields.find("title"); it != fields.end()) rec.title = clean_value(it->second);
        if (auto it = fields.find("abstract"); it != fields.end())
            rec.abstract = clean_value(it->second);
        if (auto it = fields.find("author"); it != fields.end()) {
            for (const auto& part : split_authors(latex_strip(it->second))) {
                if (auto name = parse_name(part)) rec.authors.push_back(std::move(*name));
            }
        }
        for (const char* fkey : {"affiliation", "affiliations"}) {
            auto it = fields.find(fkey);
            if (it == fields.end()) continue;
            std::string flat = clean_value(it->second);
            std::size_t start = 0;
            while (start <= flat.size()) {
                auto semi = flat.find(';', start);
                std::string aff = collapse_ws(
                    flat.substr(start, semi == std::string::npos ? std::string::npos : semi - start));
                if (!aff.empty()) rec.affiliations.push_back(std::move(aff));
                if (semi == std::string::npos) break;
                start = semi + 1;
            }
            break;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

std::string serialize_bibtex(const std::vector<BibRecord>& records) {
    std::ostringstream out;
    for (const auto& rec : records) {
        out << "@article{" << rec.key << ",\n";
        if (!rec.authors.empty()) {
            out << "  author = {";
            for (std::size_t i = 0; i < rec.authors.size(); ++i) {
                if (i > 0) out << " and ";
                out << rec.authors[i].family;
                if (!rec.authors[i].given.empty()) out << ", " << rec.authors[i].given;
            }
            out << "},\n";
        }
        if (!rec.title.empty()) out << "  title = {" << rec.title << "},\n";
        out << "  year = {" << rec.year << "}";
        if (!rec.abstract.empty()) out << ",\n  abstract = {" << rec.abstract << "}";
        if (!rec.affiliations.empty()) {
            out << ",\n  affiliation = {";
            for (std::size_t i = 0; i < rec.affiliations.size(); ++i) {
                if (i > 0) out << "; ";
                out << rec.affiliations[i];
            }
            out << "}";
        }
        out << "\n}\n\n";
    }
    return out.str();
}

Corpus merge_and_dedup(const std::vector<std::vector<BibRecord>>& shards) {
    Corpus corpus;
    std::unordered_set<std::string> seen;
    std::unordered_set<std::string> shard_names;
    std::size_t total = 0;
    for (const auto& shard : shards) {
        for (const auto& rec : shard) {
            ++total;
            if (!rec.source_shard.empty() && shard_names.insert(rec.source_shard).second) {
                corpus.provenance.push_back(rec.source_shard);
            }
            std::string key = normalized_title(rec.title) + '\x1f' + std::to_string(rec.year);
            if (seen.insert(std::move(key)).second) {
                corpus.records.push_back(rec);
            }
        }
    }
    corpus.dedup_count = total - corpus.records.size();
    return corpus;
}

Partition partition_by_year(const Corpus& corpus,
                            const std::vector<std::pair<int, int>>& boundaries) {
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (boundaries[i].first > boundaries[i].second) {
            throw Error(ErrorCode::OverlappingBoundaries,
                        "boundary " + std::to_string(boundaries[i].first) + "-" +
                            std::to_string(boundaries[i].second) + " is inverted");
        }
        if (i > 0 && boundaries[i].first <= boundaries[i - 1].second) {
            throw Error(ErrorCode::OverlappingBoundaries,
                        "boundaries must be sorted and disjoint; " +
                            std::to_string(boundaries[i - 1].first) + "-" +
                            std::to_string(boundaries[i - 1].second) + " collides with " +
                            std::to_string(boundaries[i].first) + "-" +
                            std::to_string(boundaries[i].second));
        }
    }
    Partition part;
    part.slices.reserve(boundaries.size());
    for (const auto& [lo, hi] : boundaries) {
        part.slices.push_back({std::to_string(lo) + "-" + std::to_string(hi), lo, hi, {}});
    }
    for (const auto& rec : corpus.records) {
        bool placed = false;
        for (auto& slice : part.slices) {
            if (rec.year >= slice.start_year && rec.year <= slice.end_year) {
                slice.records.push_back(rec);
                placed = true;
                break;
            }
        }
        if (!placed) part.unsliced.push_back(rec);
    }
    return part;
}

namespace {

// Lookup keys ignore case, runs of whitespace, and dots, so "U.S.A." and
// "usa" land on the same entry.
std::string country_key(std::string_view s) {
    std::string folded = casefold_collapse(s);
    std::string out;
    out.reserve(folded.size());
    for (char c : folded) {
        if (c != '.') out.push_back(c);
    }
    while (!out.empty() && (out.back() == ' ' || out.back() == ';')) out.pop_back();
    std::size_t i = 0;
    while (i < out.size() && out[i] == ' ') ++i;
    return out.substr(i);
}

} // namespace

CountryTable CountryTable::from_string(std::string_view text) {
    CountryTable table;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string_view line =
            text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq != std::string_view::npos) {
            std::string alias = collapse_ws(line.substr(0, eq));
            std::string canonical = collapse_ws(line.substr(eq + 1));
            if (!alias.empty() && !canonical.empty()) table.add(alias, canonical);
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return table;
}

CountryTable CountryTable::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open country table '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

void CountryTable::add(std::string_view alias, std::string_view canonical) {
    std::string canon = collapse_ws(canonical);
    map_[country_key(alias)] = canon;
    map_.emplace(country_key(canon), canon);
}

std::optional<std::string> CountryTable::lookup(std::string_view alias) const {
    auto it = map_.find(country_key(alias));
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

CountryExtraction extract_countries(const BibRecord& record, const CountryTable& table) {
    CountryExtraction out;
    std::unordered_set<std::string> seen;
    for (const auto& aff : record.affiliations) {
        auto comma = aff.rfind(',');
        std::string_view segment = comma == std::string::npos
                                       ? std::string_view(aff)
                                       : std::string_view(aff).substr(comma + 1);
        auto country = table.lookup(segment);
        if (!country) {
            out.diagnostics.push_back(
                {record.source_shard, 0,
                 "entry '" + record.key + "': no country match for affiliation segment '" +
                     collapse_ws(segment) + "'"});
            continue;
        }
        if (seen.insert(*country).second) out.countries.push_back(*country);
    }
    return out;
}

} // namespace trendkit::bib
