#pragma once

#include "repocompose/core_model.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace repocompose {

/// One pre-extracted commit: the snapshot before the commit plus the `.py`
/// files the commit added.
struct CommitRecord {
    std::string repo;
    std::string commit;
    std::int64_t timestamp = 0;
    RepositorySnapshot snapshot;
    std::vector<FileEntry> completion_files;
};

struct FilterPolicy {
    int min_year = 2010;
    std::size_t min_chars = 800;
    std::size_t max_chars = 25000;
    std::size_t max_files_per_repo = 1000;
    std::set<std::string> holdout_repos;
};

/// Throws ConfigError when a bound is non-positive or min_chars > max_chars.
void validate(const FilterPolicy& policy);

/// Seconds since epoch of January 1st, 00:00:00 UTC of `year`.
std::int64_t year_start_utc(int year);

/// Lightweight description of one completion file; enough to run the
/// selection without holding file contents.
struct TargetMeta {
    std::string repo;
    std::string commit;
    std::int64_t timestamp = 0;
    std::string path;
    std::size_t length_chars = 0;
    std::size_t record_index = 0;
    std::size_t file_index = 0;
};

/// Applies holdout, year, length, name-dedup and per-repo cap rules. The
/// result keeps the input order.
std::vector<TargetMeta> select_targets(std::vector<TargetMeta> candidates,
                                       const FilterPolicy& policy);

struct FilteredTarget {
    CompletionTarget target;
    /// Index of the CommitRecord whose snapshot serves as context source.
    std::size_t record_index = 0;
};

std::vector<FilteredTarget> filter_dataset(const std::vector<CommitRecord>& records,
                                           const FilterPolicy& policy);

struct StatsReport {
    std::size_t repos = 0;
    std::size_t commits = 0;
    std::size_t completion_files = 0;
    std::size_t completion_chars = 0;
    std::size_t snapshot_files = 0;
    std::size_t snapshot_chars = 0;

    bool operator==(const StatsReport&) const = default;
};

/// Incremental accumulator so statistics can be computed over a stream.
class StatsAccumulator {
public:
    void add(const CommitRecord& record);
    StatsReport report() const;

private:
    std::set<std::string> repos_;
    StatsReport totals_;
};

StatsReport dataset_stats(const std::vector<CommitRecord>& records);

} // namespace repocompose
