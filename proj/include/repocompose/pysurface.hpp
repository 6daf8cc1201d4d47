#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace repocompose::pysurface {

enum class UnitKind { code, comment, docstring, import, declaration_header, blank };

std::string_view to_string(UnitKind kind);

/// A run of physical lines sharing one classification. Lines are 1-based
/// and inclusive; `text` is the raw lines joined by '\n'.
struct LexUnit {
    UnitKind kind = UnitKind::code;
    std::size_t first_line = 0;
    std::size_t last_line = 0;
    std::string text;

    bool operator==(const LexUnit&) const = default;
};

/// Line-oriented classification of Python source. Logical lines follow the
/// language rules (brackets, backslash continuation, multi-line strings);
/// comment-only lines nested inside a bracketed statement become their own
/// comment units. Total: any input yields a partition of its lines.
std::vector<LexUnit> lex_python(std::string_view content);

/// An output line tagged with the 1-based input line it came from.
struct SourceLine {
    std::size_t line = 0;
    std::string text;
};

/// Code with comments, docstrings and imports removed. Trailing comments
/// are cut from code lines and blank runs collapse to a single blank line.
std::vector<SourceLine> code_lines(std::string_view content);
std::string strip_to_code(std::string_view content);

/// `def` / `async def` / `class` headers up to their terminating colon.
std::vector<SourceLine> declaration_lines(std::string_view content);
std::string extract_declarations(std::string_view content);

/// Comment and docstring units in file order.
std::vector<SourceLine> text_chunk_lines(std::string_view content);
std::string extract_text_chunks(std::string_view content);

/// Names bound by `def`, `class` (any depth) and module-level assignment.
std::set<std::string> declared_identifiers(std::string_view content);

/// Identifier tokens outside strings and comments, keywords excluded.
std::set<std::string> referenced_identifiers(std::string_view line);

bool is_keyword(std::string_view word);

} // namespace repocompose::pysurface
