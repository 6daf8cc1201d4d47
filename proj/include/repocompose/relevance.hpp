#pragma once

#include "repocompose/core_model.hpp"

#include <compare>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace repocompose {

/// Tree distance between the directories containing `a` and `b`: hops up
/// from each directory to their deepest common ancestor.
std::size_t path_distance(std::string_view a, std::string_view b);

/// Distinct stripped lines with at least five characters, sorted. Views
/// point into `content`.
std::vector<std::string_view> iou_line_set(std::string_view content);

/// Exact IoU ratio; compares by cross-multiplication, 0/0 counts as 0.
struct IouRatio {
    std::size_t intersection = 0;
    std::size_t union_size = 0;

    double value() const {
        return union_size == 0 ? 0.0
                               : static_cast<double>(intersection) / static_cast<double>(union_size);
    }

    std::strong_ordering operator<=>(const IouRatio& other) const;
    bool operator==(const IouRatio& other) const { return (*this <=> other) == 0; }
};

IouRatio iou_ratio(const std::vector<std::string_view>& a, const std::vector<std::string_view>& b);

double lines_iou(std::string_view a, std::string_view b);

enum class RankScheme { path_distance_py, lines_iou_py, text_groups, random_all, random_py };

RankScheme parse_rank_scheme(std::string_view name);

/// Relevance group for text-file ranking: 0 = .json, 1 = .yaml/.yml,
/// 2 = .sh, 3 = .md/.txt/.rst; -1 when the extension is not a text file.
int text_group(std::string_view path);

/// Files ordered least-relevant-first with the keys used to order them.
struct RankedFiles {
    std::vector<FileEntry> files;
    std::vector<std::pair<double, double>> scores;
};

/// The completion file is never a candidate, even if present in the
/// snapshot. `seed` only matters for the random schemes.
RankedFiles rank_files(const RepositorySnapshot& snapshot, const CompletionTarget& completion,
                       RankScheme scheme, std::uint64_t seed = 0);

} // namespace repocompose
