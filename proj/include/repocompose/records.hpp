#pragma once

#include "repocompose/core_model.hpp"
#include "repocompose/eval_harness.hpp"
#include "repocompose/ingest_filter.hpp"
#include "repocompose/tokenization.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <string>

namespace repocompose::records {

using nlohmann::json;

// JSON field layouts of every JSONL file the tools read or write. Parsers
// throw SchemaError naming the offending field.

CommitRecord commit_record_from_json(const json& j);
json to_json(const CommitRecord& record);

json to_json(const ComposedExample& example);
ComposedExample composed_example_from_json(const json& j);

json to_json(const PackedExample& example, std::string_view tokenizer_name);
PackedExample packed_example_from_json(const json& j);

EvalItem eval_item_from_json(const json& j);

json to_json(const StatsReport& report);
json to_json(const EvalReport& report);

/// Serializes without throwing on invalid UTF-8 (replaced with U+FFFD).
std::string dump_line(const json& j);

/// Line-at-a-time JSONL reader. Blank lines are skipped.
class JsonlReader {
public:
    explicit JsonlReader(const std::string& path);

    /// Next raw line; false at end of file.
    bool next_line(std::string& line);

    /// Next parsed object; throws SchemaError with the line number on bad JSON.
    bool next(json& value);

    std::size_t line_number() const { return line_number_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    std::size_t line_number_ = 0;
};

/// Parses one JSONL line, prefixing errors with `path:line`.
json parse_line(const std::string& line, const std::string& path, std::size_t line_number);

std::vector<EvalItem> load_eval_items(const std::string& path);
std::map<std::string, std::string> load_predictions(const std::string& path);

} // namespace repocompose::records
