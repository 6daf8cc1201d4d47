#include "repocompose/composers.hpp"

#include "repocompose/pysurface.hpp"

#include <algorithm>
#include <numeric>

namespace repocompose {

namespace {

std::string join(const std::vector<std::string>& pieces) {
    std::size_t total = 0;
    for (const auto& p : pieces) total += p.size();
    std::string out;
    out.reserve(total);
    for (const auto& p : pieces) out += p;
    return out;
}

std::string token_suffix(std::string_view text, std::size_t keep, const Tokenizer& tokenizer) {
    if (keep == 0) return {};
    const auto ids = tokenizer.encode(text);
    if (ids.size() <= keep) return std::string(text);
    return tokenizer.decode(std::span<const TokenId>(ids).last(keep));
}

std::string ensure_newline(std::string text) {
    if (!text.empty() && text.back() != '\n') text += '\n';
    return text;
}

std::vector<std::string> segments_from_bounds(const std::vector<std::string_view>& lines,
                                              const std::vector<std::size_t>& bounds) {
    std::vector<std::string> out;
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        std::string text;
        for (std::size_t l = bounds[s]; l < bounds[s + 1]; ++l) text += lines[l];
        out.push_back(ensure_newline(std::move(text)));
    }
    return out;
}

enum class LeakStyle { plain, masked };

} // namespace

std::string format_file(const FileEntry& entry) {
    std::string out;
    out.reserve(kFileSep.size() + 2 + entry.path.size() + 1 + entry.content.size());
    out += kFileSep;
    out += "# ";
    out += entry.path;
    out += '\n';
    out += entry.content;
    return out;
}

FitResult fit_files(const RankedFiles& ranked, const ContextBudget& budget,
                    const ContentTransform& transform) {
    FitResult result;
    const std::size_t limit = budget.max_context_tokens;
    const Tokenizer& tokenizer = *budget.tokenizer;
    if (limit == 0) {
        result.saturated = !ranked.files.empty();
        return result;
    }

    std::vector<std::string> reversed_pieces;
    for (auto it = ranked.files.rbegin(); it != ranked.files.rend(); ++it) {
        std::string content = transform ? transform(*it) : it->content;
        if (is_blank(content)) continue;
        std::string formatted = format_file({it->path, std::move(content)});
        const std::size_t n = tokenizer.count(formatted);
        if (result.tokens + n <= limit) {
            result.tokens += n;
            reversed_pieces.push_back(std::move(formatted));
            continue;
        }
        const std::size_t remaining = limit - result.tokens;
        if (remaining > 0) {
            reversed_pieces.push_back(token_suffix(formatted, remaining, tokenizer));
            result.tokens += remaining;
        }
        result.saturated = true;
        break;
    }
    result.pieces.assign(reversed_pieces.rbegin(), reversed_pieces.rend());
    return result;
}

std::string fit_and_concat(const RankedFiles& ranked, const ContextBudget& budget,
                           const ContentTransform& transform) {
    return join(fit_files(ranked, budget, transform).pieces);
}

std::string half_memory_dropout(std::string_view content, double p, Rng& rng) {
    std::string out;
    out.reserve(content.size());
    for (auto line : split_lines_keep_newline(content)) {
        if (!rng.bernoulli(p)) out += line;
    }
    return out;
}

std::string duplication_context(const FileEntry& completion, const ContextBudget& budget) {
    const std::size_t limit = budget.max_context_tokens;
    if (limit == 0) return {};
    const Tokenizer& tokenizer = *budget.tokenizer;
    const auto copy = tokenizer.encode(format_file(completion));
    if (copy.empty()) return {};
    // suffix of ceil(limit / len) copies
    const std::size_t len = copy.size();
    const std::size_t offset = (len - limit % len) % len;
    std::vector<TokenId> ids;
    ids.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) ids.push_back(copy[(offset + i) % len]);
    return tokenizer.decode(ids);
}

std::vector<TokenId> random_token_ids(std::size_t count, Rng& rng, const Tokenizer& tokenizer) {
    const auto pool = tokenizer.non_special_ids();
    std::vector<TokenId> ids;
    if (pool.empty()) return ids;
    ids.reserve(count);
    for (std::size_t i = 0; i < count; ++i) ids.push_back(pool[rng.below(pool.size())]);
    return ids;
}

std::string random_token_context(std::size_t budget, Rng& rng, const Tokenizer& tokenizer) {
    return tokenizer.decode(random_token_ids(budget, rng, tokenizer));
}

std::vector<std::string> split_into_segments(std::string_view content, std::size_t segments, Rng& rng) {
    const auto lines = split_lines_keep_newline(content);
    if (lines.empty()) return {};
    const std::size_t count = std::clamp<std::size_t>(segments, 1, lines.size());

    // choose count-1 distinct interior boundaries by partial Fisher-Yates
    std::vector<std::size_t> candidates(lines.size() - 1);
    std::iota(candidates.begin(), candidates.end(), std::size_t{1});
    for (std::size_t i = 0; i + 1 < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }
    std::vector<std::size_t> bounds(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count - 1));
    bounds.push_back(0);
    bounds.push_back(lines.size());
    std::sort(bounds.begin(), bounds.end());
    return segments_from_bounds(lines, bounds);
}

std::vector<std::pair<std::size_t, std::size_t>> overlapping_windows(std::size_t line_count,
                                                                      std::size_t window) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (line_count == 0) return out;
    window = std::max<std::size_t>(window, 2);
    std::size_t start = 0;
    while (true) {
        const std::size_t end = std::min(start + window, line_count);
        out.emplace_back(start, end);
        if (end == line_count) break;
        start = end - 1;
    }
    return out;
}

std::vector<std::string> overlapping_segments(std::string_view content, std::size_t window) {
    const auto lines = split_lines_keep_newline(content);
    std::vector<std::string> out;
    for (auto [first, last] : overlapping_windows(lines.size(), window)) {
        std::string text;
        for (std::size_t l = first; l < last; ++l) text += lines[l];
        out.push_back(ensure_newline(std::move(text)));
    }
    return out;
}

std::string place_segments(std::string_view context, const std::vector<std::string>& segments,
                           Rng& rng, const Tokenizer& tokenizer) {
    constexpr std::size_t kMaxAttempts = 64;
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    const auto lines = split_lines_keep_newline(context);
    const std::size_t n = lines.size();
    std::vector<std::size_t> line_tokens(n);
    for (std::size_t i = 0; i < n; ++i) line_tokens[i] = tokenizer.count(lines[i]);
    std::vector<std::size_t> need(segments.size());
    for (std::size_t s = 0; s < segments.size(); ++s) need[s] = std::max<std::size_t>(tokenizer.count(segments[s]), 1);

    std::vector<bool> occupied;
    // region_end[i] != 0 marks a replaced run [i, region_end[i]) holding region_segment[i]
    std::vector<std::size_t> region_end;
    std::vector<std::size_t> region_segment;
    std::vector<std::vector<std::size_t>> inserted;
    auto reset = [&] {
        occupied.assign(n, false);
        region_end.assign(n, 0);
        region_segment.assign(n, 0);
        inserted.assign(n + 1, {});
    };
    // end of the free run from `start` covering `tokens`, or kNone
    auto run_end = [&](std::size_t start, std::size_t tokens) {
        std::size_t end = start;
        std::size_t sum = 0;
        while (end < n && sum < tokens && !occupied[end]) sum += line_tokens[end++];
        return sum >= tokens ? end : kNone;
    };
    auto claim = [&](std::size_t start, std::size_t end, std::size_t s) {
        std::fill(occupied.begin() + static_cast<std::ptrdiff_t>(start),
                  occupied.begin() + static_cast<std::ptrdiff_t>(end), true);
        region_end[start] = end;
        region_segment[start] = s;
    };
    auto place_one = [&](std::size_t s) {
        for (std::size_t attempt = 0; attempt < kMaxAttempts && n > 0; ++attempt) {
            const std::size_t start = static_cast<std::size_t>(rng.below(n));
            if (const std::size_t end = run_end(start, need[s]); end != kNone) {
                claim(start, end, s);
                return true;
            }
        }
        // random draws kept colliding; pick among every start that still fits
        std::vector<std::pair<std::size_t, std::size_t>> feasible;
        for (std::size_t start = 0; start < n; ++start) {
            if (const std::size_t end = run_end(start, need[s]); end != kNone) feasible.emplace_back(start, end);
        }
        if (feasible.empty()) return false;
        const auto [start, end] = feasible[rng.below(feasible.size())];
        claim(start, end, s);
        return true;
    };

    reset();
    std::vector<std::size_t> unplaced;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (!place_one(s)) unplaced.push_back(s);
    }

    if (!unplaced.empty()) {
        // Earlier runs fragmented the free space. Lay everything out left to
        // right in random order with random gaps, if it fits at all.
        reset();
        std::vector<std::size_t> order(segments.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        auto tail_fits = [&](std::size_t pos, std::size_t from) {
            for (std::size_t k = from; k < order.size(); ++k) {
                if (pos > n) return false;
                pos = run_end(pos, need[order[k]]);
                if (pos == kNone) return false;
            }
            return true;
        };
        if (tail_fits(0, 0)) {
            unplaced.clear();
            std::size_t pos = 0;
            for (std::size_t k = 0; k < order.size(); ++k) {
                std::size_t max_gap = 0;
                while (pos + max_gap + 1 <= n && tail_fits(pos + max_gap + 1, k)) ++max_gap;
                const std::size_t start = pos + static_cast<std::size_t>(rng.below(max_gap + 1));
                const std::size_t end = run_end(start, need[order[k]]);
                claim(start, end, order[k]);
                pos = end;
            }
        } else {
            reset();
            unplaced.clear();
            for (std::size_t s = 0; s < segments.size(); ++s) {
                if (!place_one(s)) unplaced.push_back(s);
            }
        }
    }

    for (std::size_t s : unplaced) {
        // boundary b is free unless it falls strictly inside a replaced run
        std::vector<std::size_t> free_bounds;
        for (std::size_t b = 0; b <= n; ++b) {
            if (b == 0 || b == n || !(occupied[b - 1] && occupied[b]) || region_end[b] != 0) {
                free_bounds.push_back(b);
            }
        }
        inserted[free_bounds[rng.below(free_bounds.size())]].push_back(s);
    }

    std::string out;
    out.reserve(context.size() + 64);
    std::size_t i = 0;
    while (i <= n) {
        for (std::size_t s : inserted[i]) out += segments[s];
        if (i == n) break;
        if (region_end[i] != 0) {
            out += segments[region_segment[i]];
            i = region_end[i];
            continue;
        }
        out += lines[i];
        ++i;
    }
    return out;
}

std::string leak_transform(std::string_view base_context, std::string_view completion_content,
                           std::size_t segments, Rng& rng, const Tokenizer& tokenizer) {
    const auto pieces = split_into_segments(completion_content, segments, rng);
    return place_segments(base_context, pieces, rng, tokenizer);
}

std::vector<TokenId> corrupt_tokens(std::span<const TokenId> ids, double p, Rng& rng,
                                    const Tokenizer& tokenizer, CorruptionStats* stats) {
    const auto pool = tokenizer.non_special_ids();
    std::vector<TokenId> out(ids.begin(), ids.end());
    std::size_t replaced = 0;
    for (auto& id : out) {
        if (!rng.bernoulli(p)) continue;
        // uniform over the pool minus the original id
        const auto pos = std::lower_bound(pool.begin(), pool.end(), id);
        const bool in_pool = pos != pool.end() && *pos == id;
        const std::size_t choices = pool.size() - (in_pool ? 1 : 0);
        if (choices == 0) continue;
        std::size_t pick = static_cast<std::size_t>(rng.below(choices));
        if (in_pool && pick >= static_cast<std::size_t>(pos - pool.begin())) ++pick;
        id = pool[pick];
        ++replaced;
    }
    if (stats) {
        stats->tokens += out.size();
        stats->replaced += replaced;
    }
    return out;
}

std::string masked_leak_transform(std::string_view base_context, std::string_view completion_content,
                                  Rng& rng, const Tokenizer& tokenizer, double mask_p,
                                  CorruptionStats* stats) {
    const std::string placed =
        place_segments(base_context, overlapping_segments(completion_content), rng, tokenizer);
    const auto ids = tokenizer.encode(placed);
    return tokenizer.decode(corrupt_tokens(ids, mask_p, rng, tokenizer, stats));
}

ComposerKind choose_mixed_kind(ComposeMode mode, Rng& rng) {
    static constexpr ComposerKind kChoices[] = {
        ComposerKind::file_level,      ComposerKind::path_distance_py, ComposerKind::half_memory_py,
        ComposerKind::declarations_py, ComposerKind::text_files,       ComposerKind::random_files,
        ComposerKind::duplication,
    };
    while (true) {
        const ComposerKind kind = kChoices[rng.below(std::size(kChoices))];
        if (kind == ComposerKind::duplication && mode == ComposeMode::evaluation) continue;
        return kind;
    }
}

namespace {

struct Engine {
    const ComposerSpec& spec;
    const RepositorySnapshot& snapshot;
    const CompletionTarget& completion;
    const ContextBudget& budget;
    std::uint64_t seed;

    RankedFiles ranked(RankScheme scheme, Rng& rng) const {
        RankedFiles r = rank_files(snapshot, completion, scheme, rng.next());
        if (spec.modifier == Modifier::irrelevant) {
            std::reverse(r.files.begin(), r.files.end());
            std::reverse(r.scores.begin(), r.scores.end());
        }
        return r;
    }

    std::string finish(FitResult fit) const {
        if (spec.modifier == Modifier::reversed) std::reverse(fit.pieces.begin(), fit.pieces.end());
        return join(fit.pieces);
    }

    std::string ranked_context(RankScheme scheme, Rng& rng, const ContentTransform& transform = {}) const {
        return finish(fit_files(ranked(scheme, rng), budget, transform));
    }

    ContentTransform half_memory() const {
        const double p = spec.dropout_p;
        const std::uint64_t base = seed;
        return [p, base](const FileEntry& f) {
            Rng file_rng(derive_seed(base, f.path));
            return half_memory_dropout(f.content, p, file_rng);
        };
    }

    std::string leak(LeakStyle style, Rng& rng) const {
        const Tokenizer& tokenizer = *budget.tokenizer;
        const RankedFiles files = ranked(RankScheme::path_distance_py, rng);
        const FitResult base = fit_files(files, budget);
        const std::size_t base_tokens = base.tokens;
        const std::string base_context = finish(base);

        std::string out;
        if (style == LeakStyle::plain) {
            out = place_segments(base_context,
                                 split_into_segments(completion.file.content, spec.leak_segments, rng),
                                 rng, tokenizer);
        } else {
            out = place_segments(base_context, overlapping_segments(completion.file.content), rng,
                                 tokenizer);
        }

        // Replacement runs overshoot their segment; refill the window from
        // the material just below the fitted selection.
        const std::size_t limit = budget.max_context_tokens;
        std::size_t out_tokens = tokenizer.count(out);
        if (out_tokens < limit && base.saturated) {
            const std::size_t deficit = limit - out_tokens;
            ContextBudget wider{limit + deficit, budget.tokenizer};
            const FitResult more = fit_files(files, wider);
            const std::size_t extra = more.tokens - base_tokens;
            if (extra > 0) {
                const auto ids = tokenizer.encode(join(more.pieces));
                out = tokenizer.decode(std::span<const TokenId>(ids).first(std::min(extra, ids.size()))) + out;
            }
        }
        out_tokens = tokenizer.count(out);
        if (out_tokens > limit) out = token_suffix(out, limit, tokenizer);

        if (style == LeakStyle::masked) {
            const auto ids = tokenizer.encode(out);
            out = tokenizer.decode(corrupt_tokens(ids, spec.mask_p, rng, tokenizer));
        }
        return out;
    }

    std::string run(ComposerKind kind, Rng& rng) const {
        switch (kind) {
        case ComposerKind::file_level:
            return {};
        case ComposerKind::path_distance_py:
            return ranked_context(RankScheme::path_distance_py, rng);
        case ComposerKind::lines_iou_py:
            return ranked_context(RankScheme::lines_iou_py, rng);
        case ComposerKind::code_chunks:
            return ranked_context(RankScheme::path_distance_py, rng,
                                  [](const FileEntry& f) { return pysurface::strip_to_code(f.content); });
        case ComposerKind::half_memory_py:
            return ranked_context(RankScheme::path_distance_py, rng, half_memory());
        case ComposerKind::declarations_py:
            return ranked_context(RankScheme::path_distance_py, rng, [](const FileEntry& f) {
                return pysurface::extract_declarations(f.content);
            });
        case ComposerKind::text_chunks_py:
            return ranked_context(RankScheme::path_distance_py, rng, [](const FileEntry& f) {
                return pysurface::extract_text_chunks(f.content);
            });
        case ComposerKind::text_files:
            return ranked_context(RankScheme::text_groups, rng);
        case ComposerKind::random_files:
            return ranked_context(RankScheme::random_all, rng);
        case ComposerKind::random_py:
            return ranked_context(RankScheme::random_py, rng);
        case ComposerKind::random_tokens:
            return random_token_context(budget.max_context_tokens, rng, *budget.tokenizer);
        case ComposerKind::duplication:
            return duplication_context(completion.file, budget);
        case ComposerKind::leak:
            return leak(LeakStyle::plain, rng);
        case ComposerKind::masked_leak:
            return leak(LeakStyle::masked, rng);
        case ComposerKind::mixed:
            break;
        }
        throw ConfigError("mixed composer cannot resolve to itself");
    }
};

} // namespace

ComposedExample compose(const ComposerSpec& spec, const RepositorySnapshot& snapshot,
                        const CompletionTarget& completion, const ContextBudget& budget) {
    validate(spec);
    ComposedExample example;
    example.example_id = make_example_id(completion.repo, completion.commit, completion.file.path);
    example.repo = completion.repo;
    example.commit = completion.commit;
    example.composer = std::string(to_string(spec.kind));
    example.modifier = std::string(to_string(spec.modifier));
    example.completion_path = completion.file.path;
    example.completion = format_file(completion.file);

    const std::uint64_t seed = derive_seed(spec.seed, example.example_id);
    Rng rng(seed);
    ComposerKind kind = spec.kind;
    if (kind == ComposerKind::mixed) kind = choose_mixed_kind(spec.mode, rng);
    example.resolved_composer = std::string(to_string(kind));

    ComposerSpec effective = spec;
    effective.kind = kind;
    const Engine engine{effective, snapshot, completion, budget, seed};
    example.context = engine.run(kind, rng);
    return example;
}

} // namespace repocompose
