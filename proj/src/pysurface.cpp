#include "repocompose/pysurface.hpp"

#include "repocompose/core_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace repocompose::pysurface {

namespace {

constexpr std::size_t npos = std::string_view::npos;

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",       "assert", "async", "await", "break",
    "class", "continue", "def",   "del",      "elif",     "else",   "except", "finally", "for",
    "from",  "global", "if",      "import",   "in",       "is",     "lambda", "nonlocal", "not",
    "or",    "pass",   "raise",   "return",   "try",      "while",  "with",  "yield",
};

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c >= 0x80;
}

bool is_string_prefix(std::string_view word) {
    if (word.empty() || word.size() > 2) return false;
    std::string lower;
    for (char c : word) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" ||
           lower == "rb" || lower == "fr" || lower == "rf";
}

struct PhysLine {
    std::string_view text;
    /// Same length as `text`; string interiors and comments become spaces.
    std::string masked;
    std::size_t comment_col = npos;
    bool starts_in_string = false;
};

bool comment_only(const PhysLine& line) {
    if (line.starts_in_string || line.comment_col == npos) return false;
    return is_blank(line.text.substr(0, line.comment_col));
}

struct Logical {
    std::size_t first = 0;
    std::size_t last = 0;
    UnitKind kind = UnitKind::code;
    std::size_t colon_line = npos;
    std::size_t colon_col = npos;
    std::size_t indent = 0;
};

struct Scan {
    std::vector<PhysLine> lines;
    std::vector<Logical> logical;
};

enum class TokenClass { none, comment, string, word, other };

Scan scan(std::string_view content) {
    Scan out;
    {
        std::size_t start = 0;
        while (start < content.size()) {
            auto nl = content.find('\n', start);
            if (nl == npos) nl = content.size();
            PhysLine line;
            line.text = content.substr(start, nl - start);
            line.masked = std::string(line.text);
            out.lines.push_back(std::move(line));
            start = nl + 1;
        }
    }

    const std::size_t n = out.lines.size();
    // string state carried across physical lines
    bool in_string = false;
    bool triple = false;
    char quote = 0;

    std::size_t i = 0;
    while (i < n) {
        Logical logical;
        logical.first = i;
        int depth = 0;
        TokenClass first_token = TokenClass::none;
        bool only_strings = true;
        bool broken = false;
        std::string first_word;
        std::string second_word;
        bool saw_import_word = false;
        std::size_t word_count = 0;

        std::size_t j = i;
        for (; j < n; ++j) {
            PhysLine& line = out.lines[j];
            line.starts_in_string = in_string;
            const std::string_view text = line.text;
            bool continuation = false;
            std::size_t k = 0;
            if (j == i) {
                while (k < text.size() && (text[k] == ' ' || text[k] == '\t' || text[k] == '\f')) ++k;
                logical.indent = k;
            }
            while (k < text.size()) {
                const char c = text[k];
                if (in_string) {
                    if (c == '\\') {
                        if (k + 1 < text.size()) {
                            line.masked[k] = ' ';
                            line.masked[k + 1] = ' ';
                            k += 2;
                            continue;
                        }
                        // backslash-newline inside a string
                        line.masked[k] = ' ';
                        continuation = true;
                        ++k;
                        continue;
                    }
                    if (c == quote) {
                        if (!triple) {
                            in_string = false;
                            ++k;
                            continue;
                        }
                        if (k + 2 < text.size() && text[k + 1] == quote && text[k + 2] == quote) {
                            in_string = false;
                            k += 3;
                            continue;
                        }
                    }
                    line.masked[k] = ' ';
                    ++k;
                    continue;
                }

                if (c == ' ' || c == '\t' || c == '\f') {
                    ++k;
                    continue;
                }
                if (c == '#') {
                    line.comment_col = k;
                    for (std::size_t m = k; m < text.size(); ++m) line.masked[m] = ' ';
                    if (first_token == TokenClass::none) first_token = TokenClass::comment;
                    break;
                }
                if (c == '"' || c == '\'') {
                    if (first_token == TokenClass::none) first_token = TokenClass::string;
                    quote = c;
                    in_string = true;
                    triple = k + 2 < text.size() && text[k + 1] == c && text[k + 2] == c;
                    k += triple ? 3 : 1;
                    continue;
                }
                if (is_ident_start(static_cast<unsigned char>(c)) ||
                    std::isdigit(static_cast<unsigned char>(c))) {
                    std::size_t end = k;
                    while (end < text.size() && is_ident_char(static_cast<unsigned char>(text[end])))
                        ++end;
                    std::string_view word = text.substr(k, end - k);
                    if (end < text.size() && (text[end] == '"' || text[end] == '\'') &&
                        is_string_prefix(word)) {
                        k = end; // prefix of a string literal
                        continue;
                    }
                    if (first_token == TokenClass::none) first_token = TokenClass::word;
                    only_strings = false;
                    if (word_count == 0) first_word = std::string(word);
                    if (word_count == 1) second_word = std::string(word);
                    if (word == "import") saw_import_word = true;
                    ++word_count;
                    k = end;
                    continue;
                }
                if (c == '\\' && k + 1 == text.size()) {
                    continuation = true;
                    ++k;
                    continue;
                }
                if (first_token == TokenClass::none) first_token = TokenClass::other;
                only_strings = false;
                if (c == '(' || c == '[' || c == '{') {
                    ++depth;
                } else if (c == ')' || c == ']' || c == '}') {
                    if (depth > 0) --depth;
                } else if (c == ':' && depth == 0 && logical.colon_line == npos) {
                    logical.colon_line = j;
                    logical.colon_col = k;
                }
                ++k;
            }

            if (in_string && !triple && !continuation) {
                // single-quoted string cut by a newline: close it here
                in_string = false;
                broken = true;
            }
            const bool more = in_string || depth > 0 || continuation;
            if (!more) break;
            if (j + 1 == n) {
                broken = true;
                in_string = false;
            }
        }
        if (j >= n) j = n - 1;
        logical.last = j;

        if (broken) {
            logical.kind = UnitKind::code;
        } else if (first_token == TokenClass::none) {
            logical.kind = UnitKind::blank;
        } else if (first_token == TokenClass::comment) {
            logical.kind = UnitKind::comment;
        } else if (first_token == TokenClass::string && only_strings) {
            logical.kind = UnitKind::docstring;
        } else if (first_word == "import" || (first_word == "from" && saw_import_word)) {
            logical.kind = UnitKind::import;
        } else if (first_word == "def" || first_word == "class" ||
                   (first_word == "async" && second_word == "def")) {
            logical.kind = UnitKind::declaration_header;
        } else {
            logical.kind = UnitKind::code;
        }
        if (first_token != TokenClass::word) {
            // a leading word is required for import/declaration kinds
            if (logical.kind == UnitKind::import || logical.kind == UnitKind::declaration_header)
                logical.kind = UnitKind::code;
        }
        out.logical.push_back(logical);
        i = j + 1;
    }
    return out;
}

std::string join_raw(const Scan& s, std::size_t first, std::size_t last) {
    std::string text;
    for (std::size_t l = first; l <= last; ++l) {
        if (l != first) text += '\n';
        text += s.lines[l].text;
    }
    return text;
}

std::string rstrip(std::string_view text) {
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\f'))
        text.remove_suffix(1);
    return std::string(text);
}

std::string render(const std::vector<SourceLine>& lines) {
    std::string out;
    for (const auto& l : lines) {
        out += l.text;
        out += '\n';
    }
    return out;
}

bool is_identifier(std::string_view word) {
    if (word.empty() || !is_ident_start(static_cast<unsigned char>(word.front()))) return false;
    return std::all_of(word.begin(), word.end(),
                       [](char c) { return is_ident_char(static_cast<unsigned char>(c)); });
}

std::vector<std::string_view> split_top_level(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t k = 0; k < text.size(); ++k) {
        const char c = text[k];
        if (c == '(' || c == '[' || c == '{') ++depth;
        else if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
        else if (c == sep && depth == 0) {
            parts.push_back(text.substr(start, k - start));
            start = k + 1;
        }
    }
    parts.push_back(text.substr(start));
    return parts;
}

bool contains_word(std::string_view text, std::string_view word) {
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != npos) {
        const bool left_ok = pos == 0 || !is_ident_char(static_cast<unsigned char>(text[pos - 1]));
        const std::size_t end = pos + word.size();
        const bool right_ok = end >= text.size() || !is_ident_char(static_cast<unsigned char>(text[end]));
        if (left_ok && right_ok) return true;
        pos = end;
    }
    return false;
}

void collect_targets(std::string_view target, std::set<std::string>& out) {
    target = trim(target);
    // strip annotation
    auto parts = split_top_level(target, ':');
    if (parts.size() > 1) target = trim(parts.front());
    while (target.size() >= 2 && ((target.front() == '(' && target.back() == ')') ||
                                  (target.front() == '[' && target.back() == ']'))) {
        target = trim(target.substr(1, target.size() - 2));
    }
    for (auto item : split_top_level(target, ',')) {
        item = trim(item);
        if (!item.empty() && item.front() == '*') item = trim(item.substr(1));
        if (item.size() >= 2 && (item.front() == '(' || item.front() == '[')) {
            collect_targets(item, out);
            continue;
        }
        if (is_identifier(item) && !is_keyword(item)) out.insert(std::string(item));
    }
}

} // namespace

std::string_view to_string(UnitKind kind) {
    switch (kind) {
    case UnitKind::code: return "code";
    case UnitKind::comment: return "comment";
    case UnitKind::docstring: return "docstring";
    case UnitKind::import: return "import";
    case UnitKind::declaration_header: return "declaration_header";
    case UnitKind::blank: return "blank";
    }
    return "code";
}

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<LexUnit> lex_python(std::string_view content) {
    const Scan s = scan(content);
    std::vector<LexUnit> units;
    auto emit = [&](UnitKind kind, std::size_t first, std::size_t last) {
        units.push_back({kind, first + 1, last + 1, join_raw(s, first, last)});
    };
    for (const auto& logical : s.logical) {
        const bool splittable = logical.kind == UnitKind::code || logical.kind == UnitKind::import ||
                                logical.kind == UnitKind::declaration_header;
        if (!splittable || logical.first == logical.last) {
            emit(logical.kind, logical.first, logical.last);
            continue;
        }
        std::size_t run_start = logical.first;
        for (std::size_t l = logical.first + 1; l <= logical.last; ++l) {
            if (!comment_only(s.lines[l])) continue;
            if (run_start < l) emit(logical.kind, run_start, l - 1);
            emit(UnitKind::comment, l, l);
            run_start = l + 1;
        }
        if (run_start <= logical.last) emit(logical.kind, run_start, logical.last);
    }
    return units;
}

std::vector<SourceLine> code_lines(std::string_view content) {
    const Scan s = scan(content);
    struct Tagged {
        SourceLine line;
        bool collapsible;
    };
    std::vector<Tagged> kept;
    for (const auto& logical : s.logical) {
        switch (logical.kind) {
        case UnitKind::comment:
        case UnitKind::docstring:
        case UnitKind::import:
            break;
        case UnitKind::blank:
            kept.push_back({{logical.first + 1, std::string()}, true});
            break;
        case UnitKind::code:
        case UnitKind::declaration_header:
            for (std::size_t l = logical.first; l <= logical.last; ++l) {
                const PhysLine& line = s.lines[l];
                if (line.comment_col == npos) {
                    kept.push_back({{l + 1, std::string(line.text)}, false});
                    continue;
                }
                std::string prefix = rstrip(line.text.substr(0, line.comment_col));
                if (is_blank(prefix)) continue;
                kept.push_back({{l + 1, std::move(prefix)}, false});
            }
            break;
        }
    }

    std::vector<SourceLine> out;
    bool previous_blank = true; // drops leading blank lines
    for (auto& t : kept) {
        if (t.collapsible) {
            if (previous_blank) continue;
            previous_blank = true;
        } else {
            previous_blank = false;
        }
        out.push_back(std::move(t.line));
    }
    if (!out.empty() && previous_blank) out.pop_back();
    return out;
}

std::string strip_to_code(std::string_view content) {
    return render(code_lines(content));
}

std::vector<SourceLine> declaration_lines(std::string_view content) {
    const Scan s = scan(content);
    std::vector<SourceLine> out;
    for (const auto& logical : s.logical) {
        if (logical.kind != UnitKind::declaration_header) continue;
        const std::size_t stop = logical.colon_line == npos ? logical.last : logical.colon_line;
        for (std::size_t l = logical.first; l <= stop; ++l) {
            const PhysLine& line = s.lines[l];
            if (l != logical.first && comment_only(line)) continue;
            std::string_view text = line.text;
            if (l == logical.colon_line) {
                text = text.substr(0, logical.colon_col + 1);
            } else if (line.comment_col != npos) {
                text = text.substr(0, line.comment_col);
            }
            std::string kept = line.comment_col != npos || l == logical.colon_line
                                   ? rstrip(text)
                                   : std::string(text);
            out.push_back({l + 1, std::move(kept)});
        }
    }
    return out;
}

std::string extract_declarations(std::string_view content) {
    return render(declaration_lines(content));
}

std::vector<SourceLine> text_chunk_lines(std::string_view content) {
    std::vector<SourceLine> out;
    const Scan s = scan(content);
    for (const auto& unit : lex_python(content)) {
        if (unit.kind != UnitKind::comment && unit.kind != UnitKind::docstring) continue;
        for (std::size_t l = unit.first_line; l <= unit.last_line; ++l) {
            out.push_back({l, std::string(s.lines[l - 1].text)});
        }
    }
    return out;
}

std::string extract_text_chunks(std::string_view content) {
    return render(text_chunk_lines(content));
}

std::set<std::string> declared_identifiers(std::string_view content) {
    const Scan s = scan(content);
    std::set<std::string> names;
    for (const auto& logical : s.logical) {
        if (logical.kind == UnitKind::declaration_header) {
            const std::string& masked = s.lines[logical.first].masked;
            std::size_t k = logical.indent;
            auto next_word = [&]() {
                while (k < masked.size() && (masked[k] == ' ' || masked[k] == '\t')) ++k;
                std::size_t end = k;
                while (end < masked.size() && is_ident_char(static_cast<unsigned char>(masked[end])))
                    ++end;
                std::string word = masked.substr(k, end - k);
                k = end;
                return word;
            };
            std::string word = next_word();
            if (word == "async") word = next_word();
            std::string name = next_word();
            if (is_identifier(name) && !is_keyword(name)) names.insert(name);
            continue;
        }
        if (logical.kind != UnitKind::code || logical.indent != 0) continue;

        std::string text;
        for (std::size_t l = logical.first; l <= logical.last; ++l) {
            if (l != logical.first) text += ' ';
            text += s.lines[l].masked;
        }
        // split on bare '=' at bracket depth 0
        std::vector<std::string_view> segments;
        std::string_view view(text);
        int depth = 0;
        std::size_t start = 0;
        for (std::size_t k = 0; k < view.size(); ++k) {
            const char c = view[k];
            if (c == '(' || c == '[' || c == '{') ++depth;
            else if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
            else if (c == '=' && depth == 0) {
                const char prev = k > 0 ? view[k - 1] : ' ';
                const char next = k + 1 < view.size() ? view[k + 1] : ' ';
                if (next == '=' || std::string_view("=!<>+-*/%&|^@:~").find(prev) != npos) {
                    if (next == '=') ++k;
                    continue;
                }
                segments.push_back(view.substr(start, k - start));
                start = k + 1;
            }
        }
        for (auto target : segments) {
            if (contains_word(target, "lambda")) break;
            const auto first = trim(target);
            std::size_t e = 0;
            while (e < first.size() && is_ident_char(static_cast<unsigned char>(first[e]))) ++e;
            const auto lead = first.substr(0, e);
            if (is_keyword(lead) && lead != "True" && lead != "False" && lead != "None") break;
            collect_targets(target, names);
        }
    }
    return names;
}

std::set<std::string> referenced_identifiers(std::string_view line) {
    std::set<std::string> out;
    const Scan s = scan(line);
    for (const auto& phys : s.lines) {
        const std::string& m = phys.masked;
        std::size_t k = 0;
        while (k < m.size()) {
            const auto c = static_cast<unsigned char>(m[k]);
            if (std::isdigit(c)) {
                while (k < m.size() && is_ident_char(static_cast<unsigned char>(m[k]))) ++k;
                continue;
            }
            if (!is_ident_start(c)) {
                ++k;
                continue;
            }
            std::size_t end = k;
            while (end < m.size() && is_ident_char(static_cast<unsigned char>(m[end]))) ++end;
            const std::string_view word(m.data() + k, end - k);
            const bool prefix_of_string = end < m.size() && (m[end] == '"' || m[end] == '\'') &&
                                          is_string_prefix(word);
            if (!prefix_of_string && !is_keyword(word)) out.insert(std::string(word));
            k = end;
        }
    }
    return out;
}

} // namespace repocompose::pysurface
