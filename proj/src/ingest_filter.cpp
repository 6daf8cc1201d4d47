#include "repocompose/ingest_filter.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <utility>

namespace repocompose {

namespace {

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// Newest first; deterministic below that.
bool newer_first(const TargetMeta& a, const TargetMeta& b) {
    return std::tie(b.timestamp, a.path, a.commit, a.record_index, a.file_index) <
           std::tie(a.timestamp, b.path, b.commit, b.record_index, b.file_index);
}

bool input_order(const TargetMeta& a, const TargetMeta& b) {
    return std::tie(a.record_index, a.file_index) < std::tie(b.record_index, b.file_index);
}

} // namespace

void validate(const FilterPolicy& policy) {
    if (policy.min_year <= 0 || policy.min_chars == 0 || policy.max_chars == 0 ||
        policy.max_files_per_repo == 0) {
        throw ConfigError("filter policy bounds must be positive");
    }
    if (policy.min_chars > policy.max_chars) {
        throw ConfigError("filter policy requires min_chars <= max_chars");
    }
}

std::int64_t year_start_utc(int year) {
    return days_from_civil(year, 1, 1) * 86400;
}

std::vector<TargetMeta> select_targets(std::vector<TargetMeta> candidates,
                                       const FilterPolicy& policy) {
    const std::int64_t cutoff = year_start_utc(policy.min_year);

    std::erase_if(candidates, [&](const TargetMeta& t) {
        return policy.holdout_repos.contains(t.repo) || t.timestamp < cutoff ||
               t.length_chars < policy.min_chars || t.length_chars > policy.max_chars;
    });

    // Dedup on (repo, file name) keeping the newest; then cap each repo.
    std::sort(candidates.begin(), candidates.end(), newer_first);
    std::map<std::pair<std::string, std::string>, bool> seen_names;
    std::map<std::string, std::size_t> per_repo;
    std::vector<TargetMeta> kept;
    for (auto& t : candidates) {
        auto key = std::make_pair(t.repo, std::string(file_name(t.path)));
        if (!seen_names.emplace(std::move(key), true).second) continue;
        auto& count = per_repo[t.repo];
        if (count >= policy.max_files_per_repo) continue;
        ++count;
        kept.push_back(std::move(t));
    }
    std::sort(kept.begin(), kept.end(), input_order);
    return kept;
}

std::vector<FilteredTarget> filter_dataset(const std::vector<CommitRecord>& records,
                                           const FilterPolicy& policy) {
    validate(policy);
    std::vector<TargetMeta> metas;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& record = records[r];
        for (std::size_t f = 0; f < record.completion_files.size(); ++f) {
            const auto& file = record.completion_files[f];
            metas.push_back({record.repo, record.commit, record.timestamp, file.path,
                             codepoint_count(file.content), r, f});
        }
    }

    std::vector<FilteredTarget> out;
    for (const auto& meta : select_targets(std::move(metas), policy)) {
        const auto& record = records[meta.record_index];
        out.push_back({CompletionTarget{record.repo, record.commit, record.timestamp,
                                        record.completion_files[meta.file_index]},
                       meta.record_index});
    }
    return out;
}

void StatsAccumulator::add(const CommitRecord& record) {
    repos_.insert(record.repo);
    ++totals_.commits;
    totals_.completion_files += record.completion_files.size();
    for (const auto& f : record.completion_files) totals_.completion_chars += codepoint_count(f.content);
    totals_.snapshot_files += record.snapshot.files.size();
    for (const auto& f : record.snapshot.files) totals_.snapshot_chars += codepoint_count(f.content);
}

StatsReport StatsAccumulator::report() const {
    StatsReport r = totals_;
    r.repos = repos_.size();
    return r;
}

StatsReport dataset_stats(const std::vector<CommitRecord>& records) {
    StatsAccumulator acc;
    for (const auto& r : records) acc.add(r);
    return acc.report();
}

} // namespace repocompose
