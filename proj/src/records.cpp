#include "repocompose/records.hpp"

namespace repocompose::records {

namespace {

template <typename T>
T field(const json& j, const char* name) {
    if (!j.is_object()) throw SchemaError("record is not a JSON object");
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(std::string("missing field '") + name + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string("field '") + name + "' has the wrong type");
    }
}

std::vector<FileEntry> files_from_json(const json& j, const char* name) {
    if (!j.contains(name) || !j.at(name).is_array()) {
        throw SchemaError(std::string("field '") + name + "' must be an array of files");
    }
    std::vector<FileEntry> files;
    for (const auto& f : j.at(name)) {
        files.push_back({field<std::string>(f, "path"), field<std::string>(f, "content")});
    }
    return files;
}

json files_to_json(const std::vector<FileEntry>& files) {
    json arr = json::array();
    for (const auto& f : files) arr.push_back({{"path", f.path}, {"content", f.content}});
    return arr;
}

} // namespace

CommitRecord commit_record_from_json(const json& j) {
    CommitRecord r;
    r.repo = field<std::string>(j, "repo");
    r.commit = field<std::string>(j, "commit");
    r.timestamp = field<std::int64_t>(j, "timestamp");
    r.snapshot.repo = r.repo;
    r.snapshot.commit = r.commit;
    r.snapshot.timestamp = r.timestamp;
    r.snapshot.files = files_from_json(j, "snapshot");
    r.completion_files = files_from_json(j, "completion_files");
    return r;
}

json to_json(const CommitRecord& record) {
    return {{"repo", record.repo},
            {"commit", record.commit},
            {"timestamp", record.timestamp},
            {"snapshot", files_to_json(record.snapshot.files)},
            {"completion_files", files_to_json(record.completion_files)}};
}

json to_json(const ComposedExample& e) {
    json j = {{"example_id", e.example_id},       {"repo", e.repo},
              {"commit", e.commit},               {"composer", e.composer},
              {"modifier", e.modifier},           {"completion_path", e.completion_path},
              {"context", e.context},             {"completion", e.completion}};
    if (e.resolved_composer != e.composer) j["resolved_composer"] = e.resolved_composer;
    return j;
}

ComposedExample composed_example_from_json(const json& j) {
    ComposedExample e;
    e.example_id = field<std::string>(j, "example_id");
    e.repo = j.value("repo", std::string());
    e.commit = j.value("commit", std::string());
    e.composer = j.value("composer", std::string());
    e.modifier = j.value("modifier", std::string("none"));
    e.resolved_composer = j.value("resolved_composer", e.composer);
    e.completion_path = j.value("completion_path", std::string());
    e.context = field<std::string>(j, "context");
    e.completion = field<std::string>(j, "completion");
    return e;
}

json to_json(const PackedExample& e, std::string_view tokenizer_name) {
    return {{"example_id", e.example_id},
            {"input_ids", e.input_ids},
            {"loss_mask", e.loss_mask},
            {"context_len", e.context_len},
            {"completion_len", e.completion_len},
            {"tokenizer", std::string(tokenizer_name)}};
}

PackedExample packed_example_from_json(const json& j) {
    PackedExample e;
    e.example_id = field<std::string>(j, "example_id");
    e.input_ids = field<std::vector<TokenId>>(j, "input_ids");
    e.loss_mask = field<std::vector<std::uint8_t>>(j, "loss_mask");
    e.context_len = field<std::size_t>(j, "context_len");
    e.completion_len = field<std::size_t>(j, "completion_len");
    return e;
}

EvalItem eval_item_from_json(const json& j) {
    EvalItem item;
    item.example_id = field<std::string>(j, "example_id");
    item.context = j.value("context", std::string());
    item.file_prefix = j.value("file_prefix", std::string());
    item.ground_truth_line = field<std::string>(j, "ground_truth_line");
    if (j.contains("category") && !j.at("category").is_null()) {
        item.category = field<std::string>(j, "category");
    }
    if (item.ground_truth_line.find('\n') != std::string::npos) {
        throw SchemaError("field 'ground_truth_line' must be a single line");
    }
    return item;
}

json to_json(const StatsReport& r) {
    return {{"repos", r.repos},
            {"commits", r.commits},
            {"completion_files", r.completion_files},
            {"completion_chars", r.completion_chars},
            {"snapshot_files", r.snapshot_files},
            {"snapshot_chars", r.snapshot_chars}};
}

json to_json(const EvalReport& report) {
    json scores = json::array();
    for (const auto& s : report.scores) {
        scores.push_back({{"composer", s.run},
                          {"category", s.category},
                          {"exact_match", s.exact_match},
                          {"matches", s.matches},
                          {"count", s.count}});
    }
    json rcb = json::object();
    for (const auto& r : report.rcb) {
        rcb[r.category] = {{"FL-4K", r.file_level}, {"PD-16K", r.path_distance}, {"rcb", r.boost}};
    }
    return {{"scores", scores}, {"rcb", rcb}, {"warnings", report.warnings}, {"notices", report.notices}};
}

std::string dump_line(const json& j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

JsonlReader::JsonlReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw SchemaError("cannot open " + path);
}

bool JsonlReader::next_line(std::string& line) {
    while (std::getline(in_, line)) {
        ++line_number_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!is_blank(line)) return true;
    }
    return false;
}

bool JsonlReader::next(json& value) {
    std::string line;
    if (!next_line(line)) return false;
    value = parse_line(line, path_, line_number_);
    return true;
}

json parse_line(const std::string& line, const std::string& path, std::size_t line_number) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw SchemaError(path + ":" + std::to_string(line_number) + ": invalid JSON: " + e.what());
    }
}

std::vector<EvalItem> load_eval_items(const std::string& path) {
    JsonlReader reader(path);
    std::vector<EvalItem> items;
    json j;
    while (reader.next(j)) {
        try {
            items.push_back(eval_item_from_json(j));
        } catch (const SchemaError& e) {
            throw SchemaError(path + ":" + std::to_string(reader.line_number()) + ": " + e.what());
        }
    }
    return items;
}

std::map<std::string, std::string> load_predictions(const std::string& path) {
    JsonlReader reader(path);
    std::map<std::string, std::string> out;
    json j;
    while (reader.next(j)) {
        try {
            out[field<std::string>(j, "example_id")] = field<std::string>(j, "prediction");
        } catch (const SchemaError& e) {
            throw SchemaError(path + ":" + std::to_string(reader.line_number()) + ": " + e.what());
        }
    }
    return out;
}

} // namespace repocompose::records
