#include "repocompose/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace repocompose {

namespace {

struct KindName {
    ComposerKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {ComposerKind::file_level, "file_level"},
    {ComposerKind::path_distance_py, "path_distance_py"},
    {ComposerKind::lines_iou_py, "lines_iou_py"},
    {ComposerKind::code_chunks, "code_chunks"},
    {ComposerKind::half_memory_py, "half_memory_py"},
    {ComposerKind::declarations_py, "declarations_py"},
    {ComposerKind::text_chunks_py, "text_chunks_py"},
    {ComposerKind::text_files, "text_files"},
    {ComposerKind::random_files, "random_files"},
    {ComposerKind::random_py, "random_py"},
    {ComposerKind::mixed, "mixed"},
    {ComposerKind::random_tokens, "random_tokens"},
    {ComposerKind::duplication, "duplication"},
    {ComposerKind::leak, "leak"},
    {ComposerKind::masked_leak, "masked_leak"},
};

} // namespace

std::string_view to_string(ComposerKind kind) {
    for (const auto& entry : kKindNames) {
        if (entry.kind == kind) return entry.name;
    }
    return "unknown";
}

std::string_view to_string(Modifier modifier) {
    switch (modifier) {
    case Modifier::none: return "none";
    case Modifier::reversed: return "reversed";
    case Modifier::irrelevant: return "irrelevant";
    }
    return "unknown";
}

std::string_view to_string(ComposeMode mode) {
    return mode == ComposeMode::training ? "training" : "evaluation";
}

std::string composer_kind_names() {
    std::string out;
    for (const auto& entry : kKindNames) {
        if (!out.empty()) out += ", ";
        out += entry.name;
    }
    return out;
}

ComposerKind parse_composer_kind(std::string_view name) {
    for (const auto& entry : kKindNames) {
        if (entry.name == name) return entry.kind;
    }
    throw ConfigError("unknown composer '" + std::string(name) +
                      "'; valid composers: " + composer_kind_names());
}

Modifier parse_modifier(std::string_view name) {
    if (name == "none" || name.empty()) return Modifier::none;
    if (name == "reversed") return Modifier::reversed;
    if (name == "irrelevant") return Modifier::irrelevant;
    throw ConfigError("unknown modifier '" + std::string(name) +
                      "'; valid modifiers: none, reversed, irrelevant");
}

ComposeMode parse_mode(std::string_view name) {
    if (name == "training") return ComposeMode::training;
    if (name == "evaluation") return ComposeMode::evaluation;
    throw ConfigError("unknown mode '" + std::string(name) +
                      "'; valid modes: training, evaluation");
}

bool accepts_modifier(ComposerKind kind) {
    switch (kind) {
    case ComposerKind::path_distance_py:
    case ComposerKind::lines_iou_py:
    case ComposerKind::code_chunks:
    case ComposerKind::half_memory_py:
    case ComposerKind::declarations_py:
    case ComposerKind::text_chunks_py:
    case ComposerKind::text_files:
    case ComposerKind::leak:
        return true;
    default:
        return false;
    }
}

void validate(const ComposerSpec& spec) {
    if (spec.modifier != Modifier::none && !accepts_modifier(spec.kind)) {
        throw ConfigError("modifier '" + std::string(to_string(spec.modifier)) +
                          "' is not defined for composer '" +
                          std::string(to_string(spec.kind)) + "'");
    }
    if (!(spec.dropout_p >= 0.0 && spec.dropout_p <= 1.0)) {
        throw ConfigError("dropout probability must lie in [0, 1]");
    }
    if (!(spec.mask_p >= 0.0 && spec.mask_p <= 1.0)) {
        throw ConfigError("mask probability must lie in [0, 1]");
    }
    if (spec.leak_segments == 0) {
        throw ConfigError("leak segment count must be positive");
    }
}

std::string ComposerSpec::id() const {
    std::string out(to_string(kind));
    if (modifier != Modifier::none) {
        out += '+';
        out += to_string(modifier);
    }
    return out;
}

std::string_view to_string(LineCategory category) {
    switch (category) {
    case LineCategory::infile: return "infile";
    case LineCategory::inproject: return "inproject";
    case LineCategory::other: return "other";
    }
    return "other";
}

std::optional<LineCategory> parse_line_category(std::string_view name) {
    if (name == "infile") return LineCategory::infile;
    if (name == "inproject") return LineCategory::inproject;
    if (name == "other") return LineCategory::other;
    return std::nullopt;
}

bool is_valid_utf8(std::string_view text) {
    const auto* p = reinterpret_cast<const unsigned char*>(text.data());
    const auto* end = p + text.size();
    while (p < end) {
        unsigned char c = *p;
        if (c < 0x80) {
            ++p;
            continue;
        }
        std::size_t len;
        std::uint32_t cp;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (static_cast<std::size_t>(end - p) < len) return false;
        for (std::size_t i = 1; i < len; ++i) {
            if ((p[i] & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (p[i] & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        p += len;
    }
    return true;
}

std::size_t codepoint_count(std::string_view text) {
    std::size_t n = 0;
    for (char ch : text) {
        if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) ++n;
    }
    return n;
}

std::string normalize_line_endings(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\r') {
            out += '\n';
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        } else {
            out += text[i];
        }
    }
    return out;
}

bool is_blank(std::string_view text) {
    return std::all_of(text.begin(), text.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string_view trim(std::string_view text) {
    auto is_ws = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (!text.empty() && is_ws(text.front())) text.remove_prefix(1);
    while (!text.empty() && is_ws(text.back())) text.remove_suffix(1);
    return text;
}

std::optional<std::string> normalize_path(std::string_view path) {
    std::string slashed(path);
    std::replace(slashed.begin(), slashed.end(), '\\', '/');
    if (slashed.empty() || slashed.front() == '/') return std::nullopt;

    std::string out;
    std::size_t start = 0;
    while (start <= slashed.size()) {
        std::size_t end = slashed.find('/', start);
        if (end == std::string::npos) end = slashed.size();
        std::string_view segment(slashed.data() + start, end - start);
        if (segment == "..") return std::nullopt;
        if (!segment.empty() && segment != ".") {
            if (!out.empty()) out += '/';
            out += segment;
        }
        start = end + 1;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

std::string_view file_name(std::string_view path) {
    auto pos = path.rfind('/');
    return pos == std::string_view::npos ? path : path.substr(pos + 1);
}

std::string extension(std::string_view path) {
    auto name = file_name(path);
    auto pos = name.rfind('.');
    if (pos == std::string_view::npos || pos == 0) return {};
    std::string ext(name.substr(pos));
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

bool is_python_path(std::string_view path) {
    return extension(path) == ".py";
}

std::vector<std::string_view> split_lines_keep_newline(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start + 1));
        start = nl + 1;
    }
    return lines;
}

RepositorySnapshot normalize_snapshot(RepositorySnapshot snapshot, std::vector<FileError>* errors) {
    auto report = [&](std::string path, std::string reason) {
        if (errors) errors->push_back({std::move(path), std::move(reason)});
    };

    std::vector<FileEntry> kept;
    kept.reserve(snapshot.files.size());
    std::unordered_set<std::string> seen;
    for (auto& file : snapshot.files) {
        auto path = normalize_path(file.path);
        if (!path) {
            report(file.path, "invalid path");
            continue;
        }
        if (!is_valid_utf8(file.content)) {
            report(*path, "invalid UTF-8 content");
            continue;
        }
        std::string content = normalize_line_endings(file.content);
        if (is_blank(content)) continue;
        if (!seen.insert(*path).second) {
            report(*path, "duplicate path");
            continue;
        }
        kept.push_back({std::move(*path), std::move(content)});
    }
    snapshot.files = std::move(kept);
    return snapshot;
}

std::string make_example_id(std::string_view repo, std::string_view commit,
                            std::string_view path) {
    std::string id;
    id.reserve(repo.size() + commit.size() + path.size() + 2);
    id.append(repo).append("@").append(commit).append(":").append(path);
    return id;
}

} // namespace repocompose
