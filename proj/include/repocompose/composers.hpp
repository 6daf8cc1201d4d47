#pragma once

#include "repocompose/core_model.hpp"
#include "repocompose/random.hpp"
#include "repocompose/relevance.hpp"
#include "repocompose/tokenization.hpp"

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace repocompose {

struct ContextBudget {
    std::size_t max_context_tokens = 0;
    std::shared_ptr<const Tokenizer> tokenizer = reference_tokenizer();
};

/// `<file_sep># {path}\n{content}`
std::string format_file(const FileEntry& entry);

/// Per-file content rewrite applied before fitting; a blank result drops the file.
using ContentTransform = std::function<std::string(const FileEntry&)>;

struct FitResult {
    /// Formatted files, least relevant first. The first piece may be a
    /// token-level suffix of a file that did not fit whole.
    std::vector<std::string> pieces;
    std::size_t tokens = 0;
    /// The candidates held more tokens than the budget.
    bool saturated = false;
};

/// Greedy fit walking from the most relevant file backwards; the first file
/// that does not fit is left-truncated to fill the budget exactly.
FitResult fit_files(const RankedFiles& ranked, const ContextBudget& budget,
                    const ContentTransform& transform = {});

std::string fit_and_concat(const RankedFiles& ranked, const ContextBudget& budget,
                           const ContentTransform& transform = {});

/// Drops each line independently with probability `p`.
std::string half_memory_dropout(std::string_view content, double p, Rng& rng);

/// Repeated formatted completion, left-truncated to exactly the budget.
std::string duplication_context(const FileEntry& completion, const ContextBudget& budget);

/// `count` ids drawn uniformly from the non-special vocabulary.
std::vector<TokenId> random_token_ids(std::size_t count, Rng& rng, const Tokenizer& tokenizer);
std::string random_token_context(std::size_t budget, Rng& rng, const Tokenizer& tokenizer);

/// Cuts `content` into `segments` pieces at line boundaries chosen uniformly
/// without replacement. Fewer pieces when there are not enough lines.
std::vector<std::string> split_into_segments(std::string_view content, std::size_t segments, Rng& rng);

/// Five-line windows where consecutive windows share one line.
std::vector<std::pair<std::size_t, std::size_t>> overlapping_windows(std::size_t line_count,
                                                                      std::size_t window = 5);
std::vector<std::string> overlapping_segments(std::string_view content, std::size_t window = 5);

/// Writes each segment over a disjoint run of context lines whose token
/// count first reaches the segment's; the start line is drawn at random and
/// redrawn on collision, then chosen among all starts that still fit. When
/// that fails everything is re-laid left to right with random gaps; only
/// segments that cannot fit at all are inserted at a free line boundary.
std::string place_segments(std::string_view context, const std::vector<std::string>& segments,
                           Rng& rng, const Tokenizer& tokenizer);

std::string leak_transform(std::string_view base_context, std::string_view completion_content,
                           std::size_t segments, Rng& rng, const Tokenizer& tokenizer);

struct CorruptionStats {
    std::size_t tokens = 0;
    std::size_t replaced = 0;
};

/// Replaces each id with probability `p` by a different non-special id.
std::vector<TokenId> corrupt_tokens(std::span<const TokenId> ids, double p, Rng& rng,
                                    const Tokenizer& tokenizer, CorruptionStats* stats = nullptr);

std::string masked_leak_transform(std::string_view base_context, std::string_view completion_content,
                                  Rng& rng, const Tokenizer& tokenizer, double mask_p = 0.15,
                                  CorruptionStats* stats = nullptr);

/// Uniform draw for the mixed composer; duplication is redrawn in
/// evaluation mode.
ComposerKind choose_mixed_kind(ComposeMode mode, Rng& rng);

/// Builds one example. Every random choice is seeded from
/// (spec.seed, example id), so equal inputs give byte-identical output.
ComposedExample compose(const ComposerSpec& spec, const RepositorySnapshot& snapshot,
                        const CompletionTarget& completion, const ContextBudget& budget);

} // namespace repocompose
