#include "repocompose/relevance.hpp"

#include "repocompose/random.hpp"

#include <algorithm>

namespace repocompose {

namespace {

std::vector<std::string_view> directory_segments(std::string_view path) {
    std::vector<std::string_view> dirs;
    std::size_t start = 0;
    while (true) {
        auto slash = path.find('/', start);
        if (slash == std::string_view::npos) break;
        dirs.push_back(path.substr(start, slash - start));
        start = slash + 1;
    }
    return dirs;
}

struct Candidate {
    const FileEntry* file;
    std::size_t distance = 0;
    IouRatio iou;
    int group = 0;
};

} // namespace

std::size_t path_distance(std::string_view a, std::string_view b) {
    auto da = directory_segments(a);
    auto db = directory_segments(b);
    std::size_t common = 0;
    while (common < da.size() && common < db.size() && da[common] == db[common]) ++common;
    return (da.size() - common) + (db.size() - common);
}

std::vector<std::string_view> iou_line_set(std::string_view content) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        auto nl = content.find('\n', start);
        if (nl == std::string_view::npos) nl = content.size();
        auto line = trim(content.substr(start, nl - start));
        if (line.size() >= 5) lines.push_back(line);
        start = nl + 1;
    }
    std::sort(lines.begin(), lines.end());
    lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
    return lines;
}

std::strong_ordering IouRatio::operator<=>(const IouRatio& other) const {
    // a/b vs c/d with empty unions read as 0
    const unsigned __int128 lhs = static_cast<unsigned __int128>(union_size == 0 ? 0 : intersection) *
                                  (other.union_size == 0 ? 1 : other.union_size);
    const unsigned __int128 rhs =
        static_cast<unsigned __int128>(other.union_size == 0 ? 0 : other.intersection) *
        (union_size == 0 ? 1 : union_size);
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

IouRatio iou_ratio(const std::vector<std::string_view>& a, const std::vector<std::string_view>& b) {
    std::size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++inter;
            ++ia;
            ++ib;
        }
    }
    return {inter, a.size() + b.size() - inter};
}

double lines_iou(std::string_view a, std::string_view b) {
    return iou_ratio(iou_line_set(a), iou_line_set(b)).value();
}

RankScheme parse_rank_scheme(std::string_view name) {
    if (name == "path_distance_py") return RankScheme::path_distance_py;
    if (name == "lines_iou_py") return RankScheme::lines_iou_py;
    if (name == "text_groups") return RankScheme::text_groups;
    if (name == "random_all") return RankScheme::random_all;
    if (name == "random_py") return RankScheme::random_py;
    throw ConfigError("unknown ranking scheme '" + std::string(name) +
                      "'; valid schemes: path_distance_py, lines_iou_py, text_groups, "
                      "random_all, random_py");
}

int text_group(std::string_view path) {
    const auto ext = extension(path);
    if (ext == ".json") return 0;
    if (ext == ".yaml" || ext == ".yml") return 1;
    if (ext == ".sh") return 2;
    if (ext == ".md" || ext == ".txt" || ext == ".rst") return 3;
    return -1;
}

RankedFiles rank_files(const RepositorySnapshot& snapshot, const CompletionTarget& completion,
                       RankScheme scheme, std::uint64_t seed) {
    const std::string& target_path = completion.file.path;

    auto admits = [&](const FileEntry& f) {
        if (f.path == target_path) return false;
        switch (scheme) {
        case RankScheme::path_distance_py:
        case RankScheme::lines_iou_py:
        case RankScheme::random_py:
            return is_python_path(f.path);
        case RankScheme::text_groups:
            return text_group(f.path) >= 0;
        case RankScheme::random_all:
            return true;
        }
        return false;
    };

    std::vector<Candidate> candidates;
    for (const auto& f : snapshot.files) {
        if (admits(f)) candidates.push_back(Candidate{&f, 0, IouRatio{}});
    }

    RankedFiles ranked;
    if (scheme == RankScheme::random_all || scheme == RankScheme::random_py) {
        Rng rng(seed);
        rng.shuffle(candidates);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            ranked.files.push_back(*candidates[i].file);
            ranked.scores.emplace_back(static_cast<double>(i), 0.0);
        }
        return ranked;
    }

    const bool needs_iou = scheme != RankScheme::text_groups;
    std::vector<std::string_view> target_lines;
    if (needs_iou) target_lines = iou_line_set(completion.file.content);
    for (auto& c : candidates) {
        c.distance = path_distance(c.file->path, target_path);
        if (needs_iou) c.iou = iou_ratio(iou_line_set(c.file->content), target_lines);
        if (scheme == RankScheme::text_groups) c.group = text_group(c.file->path);
    }

    auto by_path = [](const Candidate& a, const Candidate& b) { return a.file->path < b.file->path; };
    switch (scheme) {
    case RankScheme::path_distance_py:
        std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
            if (a.distance != b.distance) return a.distance > b.distance;
            if (a.iou != b.iou) return a.iou < b.iou;
            return by_path(a, b);
        });
        break;
    case RankScheme::lines_iou_py:
        std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
            if (a.iou != b.iou) return a.iou < b.iou;
            return by_path(a, b);
        });
        break;
    case RankScheme::text_groups:
        std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
            if (a.group != b.group) return a.group < b.group;
            if (a.distance != b.distance) return a.distance > b.distance;
            return by_path(a, b);
        });
        break;
    default:
        break;
    }

    for (const auto& c : candidates) {
        ranked.files.push_back(*c.file);
        switch (scheme) {
        case RankScheme::path_distance_py:
            ranked.scores.emplace_back(static_cast<double>(c.distance), c.iou.value());
            break;
        case RankScheme::lines_iou_py:
            ranked.scores.emplace_back(c.iou.value(), 0.0);
            break;
        default:
            ranked.scores.emplace_back(static_cast<double>(c.group), static_cast<double>(c.distance));
            break;
        }
    }
    return ranked;
}

} // namespace repocompose
