#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace repocompose {

/// Thrown for invalid user-facing configuration (composer names, policies, flags).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an input record does not match the expected schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FileEntry {
    std::string path;
    std::string content;

    bool operator==(const FileEntry&) const = default;
};

struct RepositorySnapshot {
    std::string repo;
    std::string commit;
    std::int64_t timestamp = 0;
    std::vector<FileEntry> files;

    bool operator==(const RepositorySnapshot&) const = default;
};

struct CompletionTarget {
    std::string repo;
    std::string commit;
    std::int64_t timestamp = 0;
    FileEntry file;
};

enum class ComposerKind {
    file_level,
    path_distance_py,
    lines_iou_py,
    code_chunks,
    half_memory_py,
    declarations_py,
    text_chunks_py,
    text_files,
    random_files,
    random_py,
    mixed,
    random_tokens,
    duplication,
    leak,
    masked_leak,
};

enum class Modifier { none, reversed, irrelevant };

enum class ComposeMode { training, evaluation };

inline constexpr ComposerKind kAllComposerKinds[] = {
    ComposerKind::file_level,      ComposerKind::path_distance_py, ComposerKind::lines_iou_py,
    ComposerKind::code_chunks,     ComposerKind::half_memory_py,   ComposerKind::declarations_py,
    ComposerKind::text_chunks_py,  ComposerKind::text_files,       ComposerKind::random_files,
    ComposerKind::random_py,       ComposerKind::mixed,            ComposerKind::random_tokens,
    ComposerKind::duplication,     ComposerKind::leak,             ComposerKind::masked_leak,
};

inline constexpr Modifier kAllModifiers[] = {Modifier::none, Modifier::reversed,
                                             Modifier::irrelevant};

struct ComposerSpec {
    ComposerKind kind = ComposerKind::file_level;
    Modifier modifier = Modifier::none;
    ComposeMode mode = ComposeMode::training;
    std::size_t max_seq_len = 16384;
    std::uint64_t seed = 42;
    double dropout_p = 0.5;
    double mask_p = 0.15;
    std::size_t leak_segments = 5;

    /// Identifier such as "path_distance_py" or "code_chunks+reversed".
    std::string id() const;
};

std::string_view to_string(ComposerKind kind);
std::string_view to_string(Modifier modifier);
std::string_view to_string(ComposeMode mode);

/// Throws ConfigError listing the valid names when `name` is unknown.
ComposerKind parse_composer_kind(std::string_view name);
Modifier parse_modifier(std::string_view name);
ComposeMode parse_mode(std::string_view name);

/// Comma-separated list of every composer name, for diagnostics.
std::string composer_kind_names();

/// Whether *reversed* / *irrelevant* apply to `kind`. Only composers whose
/// base file ranking is deterministic accept a modifier.
bool accepts_modifier(ComposerKind kind);

/// Throws ConfigError on out-of-range probabilities or an invalid
/// kind/modifier pairing.
void validate(const ComposerSpec& spec);

struct ComposedExample {
    std::string example_id;
    std::string repo;
    std::string commit;
    std::string composer;
    std::string modifier;
    /// Concrete composer chosen by `mixed`; equals `composer` otherwise.
    std::string resolved_composer;
    std::string completion_path;
    std::string context;
    std::string completion;

    bool operator==(const ComposedExample&) const = default;
};

enum class LineCategory { infile, inproject, other };

std::string_view to_string(LineCategory category);
std::optional<LineCategory> parse_line_category(std::string_view name);

// ---------------------------------------------------------------------------
// Text utilities

bool is_valid_utf8(std::string_view text);

/// Number of Unicode code points; assumes valid UTF-8.
std::size_t codepoint_count(std::string_view text);

/// CRLF and lone CR become LF.
std::string normalize_line_endings(std::string_view text);

bool is_blank(std::string_view text);

std::string_view trim(std::string_view text);

/// Converts backslashes to forward slashes and drops "." segments and
/// repeated separators. Returns nullopt for empty, absolute, or ".."-bearing
/// paths.
std::optional<std::string> normalize_path(std::string_view path);

/// Final path segment.
std::string_view file_name(std::string_view path);

/// Lower-cased extension including the dot ("" when absent).
std::string extension(std::string_view path);

bool is_python_path(std::string_view path);

/// Splits into lines, each keeping its trailing '\n' (the last line may lack one).
std::vector<std::string_view> split_lines_keep_newline(std::string_view text);

struct FileError {
    std::string path;
    std::string reason;
};

/// LF-normalizes every file and drops empty/whitespace-only ones. Files with
/// invalid UTF-8, unusable paths, or duplicate paths are dropped and reported
/// in `errors` (when non-null).
RepositorySnapshot normalize_snapshot(RepositorySnapshot snapshot,
                                      std::vector<FileError>* errors = nullptr);

/// Stable key "repo@commit:path" used as example id.
std::string make_example_id(std::string_view repo, std::string_view commit,
                            std::string_view path);

} // namespace repocompose
