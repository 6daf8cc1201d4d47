#include "repocompose/cli.hpp"

#include "repocompose/composers.hpp"
#include "repocompose/core_model.hpp"
#include "repocompose/eval_harness.hpp"
#include "repocompose/ingest_filter.hpp"
#include "repocompose/records.hpp"
#include "repocompose/rope.hpp"
#include "repocompose/tokenization.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace repocompose::cli {

namespace {

using records::json;

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level() {
    const char* env = std::getenv("REPOCOMPOSE_LOG");
    if (!env) return LogLevel::warn;
    const std::string_view v(env);
    if (v == "error") return LogLevel::error;
    if (v == "info") return LogLevel::info;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::warn;
}

void log(LogLevel level, const std::string& message) {
    static const LogLevel threshold = log_level();
    if (level > threshold) return;
    static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
    std::cerr << "[repocompose " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

constexpr std::uint64_t kDefaultSeed = 42;

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

void require_input(const std::string& path) {
    if (path.empty() || !std::filesystem::exists(path)) {
        throw SchemaError("input file not found: " + path);
    }
}

std::ofstream open_output(const std::string& path, bool binary = false) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw SchemaError("cannot write " + path);
    return out;
}

void write_manifest(const std::string& output, const std::string& command, const json& config,
                    const json& counts) {
    json manifest = {{"tool", "repocompose"},
                     {"version", std::string(kToolVersion)},
                     {"schema_version", 1},
                     {"command", command},
                     {"output", std::filesystem::path(output).filename().string()},
                     {"config", config},
                     {"counts", counts}};
    auto out = open_output(output + ".manifest.json");
    out << manifest.dump(2) << '\n';
}

std::size_t default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs `work` over JSONL lines with a bounded window and hands results to
/// `sink` in input order, so output bytes never depend on scheduling.
template <typename Result, typename Work, typename Sink>
void process_in_order(records::JsonlReader& reader, std::size_t workers, Work&& work, Sink&& sink) {
    workers = std::max<std::size_t>(workers, 1);
    const std::size_t window = workers * 4;
    std::vector<std::string> lines;
    std::vector<std::size_t> numbers;
    std::vector<Result> results;
    std::vector<std::exception_ptr> errors;
    while (true) {
        lines.clear();
        numbers.clear();
        std::string line;
        while (lines.size() < window && reader.next_line(line)) {
            lines.push_back(std::move(line));
            numbers.push_back(reader.line_number());
        }
        if (lines.empty()) break;
        results.assign(lines.size(), Result{});
        errors.assign(lines.size(), nullptr);
        auto run_one = [&](std::size_t i) {
            try {
                results[i] = work(lines[i], numbers[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        };
        if (workers == 1 || lines.size() == 1) {
            for (std::size_t i = 0; i < lines.size(); ++i) run_one(i);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            const std::size_t n = std::min(workers, lines.size());
            for (std::size_t t = 0; t < n; ++t) {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < lines.size(); i = next++) run_one(i);
                });
            }
            for (auto& th : pool) th.join();
        }
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (errors[i]) std::rethrow_exception(errors[i]);
            sink(results[i]);
        }
    }
}

CommitRecord parse_commit_line(const std::string& line, const std::string& path, std::size_t n) {
    try {
        return records::commit_record_from_json(records::parse_line(line, path, n));
    } catch (const SchemaError& e) {
        const std::string msg = e.what();
        if (msg.starts_with(path)) throw;
        throw SchemaError(path + ":" + std::to_string(n) + ": " + msg);
    }
}

/// LF-normalizes completion files and drops unusable ones.
std::vector<FileEntry> normalize_completions(const CommitRecord& record, std::vector<FileError>& errors) {
    std::vector<FileEntry> out;
    for (const auto& f : record.completion_files) {
        auto path = normalize_path(f.path);
        if (!path) {
            errors.push_back({f.path, "invalid path"});
            continue;
        }
        if (!is_python_path(*path)) {
            errors.push_back({*path, "completion file is not a .py file"});
            continue;
        }
        if (!is_valid_utf8(f.content)) {
            errors.push_back({*path, "invalid UTF-8 content"});
            continue;
        }
        std::string content = normalize_line_endings(f.content);
        if (content.empty()) {
            errors.push_back({*path, "empty completion file"});
            continue;
        }
        out.push_back({std::move(*path), std::move(content)});
    }
    return out;
}

void report_file_errors(const CommitRecord& record, const std::vector<FileError>& errors) {
    for (const auto& e : errors) {
        log(LogLevel::warn, record.repo + "@" + record.commit + ": dropped " + e.path + " (" + e.reason + ")");
    }
}

// ---------------------------------------------------------------------------

struct FilterOptions {
    std::string input;
    std::string out;
    std::string snapshots_out;
    int min_year = 2010;
    std::size_t min_chars = 800;
    std::size_t max_chars = 25000;
    std::size_t max_files = 1000;
    std::string holdout;
    std::string holdout_file;
};

int run_filter(const FilterOptions& o) {
    require_input(o.input);
    FilterPolicy policy;
    policy.min_year = o.min_year;
    policy.min_chars = o.min_chars;
    policy.max_chars = o.max_chars;
    policy.max_files_per_repo = o.max_files;
    for (auto& r : split_csv(o.holdout)) policy.holdout_repos.insert(r);
    if (!o.holdout_file.empty()) {
        require_input(o.holdout_file);
        std::ifstream in(o.holdout_file);
        std::string line;
        while (std::getline(in, line)) {
            auto t = trim(line);
            if (!t.empty()) policy.holdout_repos.insert(std::string(t));
        }
    }
    validate(policy);

    // Pass 1: metadata only.
    std::vector<TargetMeta> metas;
    std::size_t record_count = 0;
    std::size_t dropped_files = 0;
    {
        records::JsonlReader reader(o.input);
        std::string line;
        while (reader.next_line(line)) {
            const auto record = parse_commit_line(line, o.input, reader.line_number());
            std::vector<FileError> errors;
            const auto completions = normalize_completions(record, errors);
            dropped_files += errors.size();
            for (std::size_t f = 0; f < completions.size(); ++f) {
                metas.push_back({record.repo, record.commit, record.timestamp, completions[f].path,
                                 codepoint_count(completions[f].content), record_count, f});
            }
            ++record_count;
        }
    }
    const std::size_t candidate_count = metas.size();
    const auto selected = select_targets(std::move(metas), policy);

    // Pass 2: emit targets and one snapshot row per surviving commit.
    std::map<std::size_t, std::vector<std::size_t>> keep;
    for (const auto& m : selected) keep[m.record_index].push_back(m.file_index);

    const std::string snapshots_path = o.snapshots_out.empty() ? o.out + ".snapshots.jsonl" : o.snapshots_out;
    auto targets_out = open_output(o.out);
    auto snapshots_out = open_output(snapshots_path);
    std::size_t commits_kept = 0;
    {
        records::JsonlReader reader(o.input);
        std::string line;
        std::size_t index = 0;
        while (reader.next_line(line)) {
            const std::size_t r = index++;
            auto it = keep.find(r);
            if (it == keep.end()) continue;
            auto record = parse_commit_line(line, o.input, reader.line_number());
            std::vector<FileError> errors;
            const auto completions = normalize_completions(record, errors);
            const std::string ref = record.repo + "@" + record.commit;

            CommitRecord kept = record;
            kept.completion_files.clear();
            for (std::size_t f : it->second) {
                const auto& file = completions[f];
                targets_out << records::dump_line({{"repo", record.repo},
                                                   {"commit", record.commit},
                                                   {"timestamp", record.timestamp},
                                                   {"completion_path", file.path},
                                                   {"snapshot_ref", ref}})
                            << '\n';
                kept.completion_files.push_back(file);
            }
            json row = records::to_json(kept);
            row["snapshot_ref"] = ref;
            snapshots_out << records::dump_line(row) << '\n';
            ++commits_kept;
        }
    }

    std::vector<std::string> holdout(policy.holdout_repos.begin(), policy.holdout_repos.end());
    json config = {{"input", o.input},
                   {"snapshots_out", snapshots_path},
                   {"min_year", policy.min_year},
                   {"min_chars", policy.min_chars},
                   {"max_chars", policy.max_chars},
                   {"max_files_per_repo", policy.max_files_per_repo},
                   {"holdout_repos", holdout}};
    json counts = {{"records", record_count},
                   {"candidate_completion_files", candidate_count},
                   {"dropped_completion_files", dropped_files},
                   {"targets", selected.size()},
                   {"commits", commits_kept}};
    write_manifest(o.out, "filter", config, counts);
    log(LogLevel::info, "filter kept " + std::to_string(selected.size()) + " of " +
                            std::to_string(candidate_count) + " completion files");
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct ComposeOptions {
    std::string input;
    std::string out;
    std::string composer;
    std::string modifier = "none";
    std::string mode = "training";
    std::size_t max_context = 16384;
    std::uint64_t seed = kDefaultSeed;
    std::size_t workers = 1;
    std::string tokenizer = "reference";
    double dropout_p = 0.5;
    double mask_p = 0.15;
    std::size_t leak_segments = 5;
};

int run_compose(const ComposeOptions& o) {
    ComposerSpec spec;
    spec.kind = parse_composer_kind(o.composer);
    spec.modifier = parse_modifier(o.modifier);
    spec.mode = parse_mode(o.mode);
    spec.max_seq_len = o.max_context;
    spec.seed = o.seed;
    spec.dropout_p = o.dropout_p;
    spec.mask_p = o.mask_p;
    spec.leak_segments = o.leak_segments;
    validate(spec);
    require_input(o.input);
    const ContextBudget budget{o.max_context, make_tokenizer(o.tokenizer)};

    struct Result {
        std::string text;
        std::size_t examples = 0;
        std::size_t dropped_files = 0;
    };

    auto out = open_output(o.out);
    std::size_t records_read = 0;
    std::size_t examples = 0;
    std::size_t dropped = 0;
    records::JsonlReader reader(o.input);
    process_in_order<Result>(
        reader, o.workers,
        [&](const std::string& line, std::size_t n) {
            const auto record = parse_commit_line(line, o.input, n);
            std::vector<FileError> errors;
            const auto snapshot = normalize_snapshot(record.snapshot, &errors);
            const auto completions = normalize_completions(record, errors);
            report_file_errors(record, errors);
            Result r;
            r.dropped_files = errors.size();
            for (const auto& file : completions) {
                const CompletionTarget target{record.repo, record.commit, record.timestamp, file};
                r.text += records::dump_line(records::to_json(compose(spec, snapshot, target, budget)));
                r.text += '\n';
                ++r.examples;
            }
            return r;
        },
        [&](const Result& r) {
            out << r.text;
            ++records_read;
            examples += r.examples;
            dropped += r.dropped_files;
        });
    out.close();

    json config = {{"input", o.input},
                   {"composer", o.composer},
                   {"modifier", std::string(to_string(spec.modifier))},
                   {"mode", std::string(to_string(spec.mode))},
                   {"max_context", o.max_context},
                   {"seed", o.seed},
                   {"workers", o.workers},
                   {"tokenizer", budget.tokenizer->name()},
                   {"dropout_p", o.dropout_p},
                   {"mask_p", o.mask_p},
                   {"leak_segments", o.leak_segments}};
    json counts = {{"records", records_read}, {"examples", examples}, {"dropped_files", dropped}};
    write_manifest(o.out, "compose", config, counts);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct PackOptions {
    std::string input;
    std::string out;
    std::size_t max_total = 16384;
    std::size_t max_completion = 4096;
    double min_ratio = 3.0;
    std::string mask = "completion";
    std::string format = "jsonl";
    std::string tokenizer = "reference";
    std::size_t workers = 1;
    std::uint64_t seed = kDefaultSeed;
};

int run_pack(const PackOptions& o) {
    TruncationPolicy policy{o.max_total, o.max_completion, o.min_ratio};
    validate(policy);
    const MaskMode mask = parse_mask_mode(o.mask);
    if (o.format != "jsonl" && o.format != "bin") {
        throw ConfigError("unknown format '" + o.format + "'; use jsonl or bin");
    }
    const bool binary = o.format == "bin";
    require_input(o.input);
    const auto tokenizer = make_tokenizer(o.tokenizer);
    const std::string tokenizer_name = tokenizer->name();

    struct Result {
        std::string bytes;
        std::string skipped_id;
        std::size_t tokens = 0;
        std::size_t completion_tokens = 0;
        bool packed = false;
    };

    auto out = open_output(o.out, binary);
    auto skipped_out = open_output(o.out + ".skipped.jsonl");
    std::size_t records_read = 0;
    std::size_t packed_count = 0;
    std::size_t skipped = 0;
    std::size_t tokens = 0;
    std::size_t completion_tokens = 0;
    records::JsonlReader reader(o.input);
    process_in_order<Result>(
        reader, o.workers,
        [&](const std::string& line, std::size_t n) {
            ComposedExample ex;
            try {
                ex = records::composed_example_from_json(records::parse_line(line, o.input, n));
            } catch (const SchemaError& e) {
                throw SchemaError(o.input + ":" + std::to_string(n) + ": " + e.what());
            }
            Result r;
            auto packed = pack_training_example(ex.example_id, ex.context, ex.completion, policy, *tokenizer, mask);
            if (!packed) {
                r.skipped_id = ex.example_id;
                return r;
            }
            r.packed = true;
            r.tokens = packed->input_ids.size();
            r.completion_tokens = packed->completion_len;
            if (binary) {
                std::ostringstream buf(std::ios::binary);
                write_packed_binary(buf, *packed, tokenizer_name);
                r.bytes = buf.str();
            } else {
                r.bytes = records::dump_line(records::to_json(*packed, tokenizer_name)) + "\n";
            }
            return r;
        },
        [&](const Result& r) {
            ++records_read;
            if (!r.packed) {
                ++skipped;
                skipped_out << records::dump_line({{"example_id", r.skipped_id},
                                                   {"reason", "completion truncated to zero tokens"}})
                            << '\n';
                return;
            }
            out << r.bytes;
            ++packed_count;
            tokens += r.tokens;
            completion_tokens += r.completion_tokens;
        });
    out.close();

    json config = {{"input", o.input},
                   {"max_total", o.max_total},
                   {"max_completion", o.max_completion},
                   {"min_ratio", o.min_ratio},
                   {"mask", o.mask},
                   {"format", o.format},
                   {"tokenizer", tokenizer_name},
                   {"workers", o.workers},
                   {"seed", o.seed}};
    json counts = {{"records", records_read},
                   {"packed", packed_count},
                   {"skipped", skipped},
                   {"tokens", tokens},
                   {"completion_tokens", completion_tokens}};
    write_manifest(o.out, "pack", config, counts);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalOptions {
    std::string items;
    std::vector<std::string> preds;
    std::string categories;
    std::string out;
};

PredictionRun load_run(const std::string& spec) {
    PredictionRun run;
    std::string path = spec;
    if (auto eq = spec.find('='); eq != std::string::npos) {
        run.name = spec.substr(0, eq);
        path = spec.substr(eq + 1);
    } else {
        run.name = std::filesystem::path(spec).stem().string();
    }
    require_input(path);
    run.predictions = records::load_predictions(path);
    return run;
}

int run_eval(const EvalOptions& o) {
    require_input(o.items);
    const auto items = records::load_eval_items(o.items);
    std::vector<PredictionRun> runs;
    for (const auto& p : o.preds) runs.push_back(load_run(p));
    const auto wanted = split_csv(o.categories);
    const auto report = evaluate(items, runs, std::set<std::string>(wanted.begin(), wanted.end()));
    for (const auto& w : report.warnings) log(LogLevel::warn, w);
    for (const auto& n : report.notices) log(LogLevel::info, n);

    const std::string text = records::to_json(report).dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        auto out = open_output(o.out);
        out << text;
        json config = {{"items", o.items}, {"preds", o.preds}, {"categories", wanted}};
        write_manifest(o.out, "eval", config, {{"items", items.size()}, {"runs", runs.size()}});
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepOptions {
    std::string items;
    std::string predictor_cmd;
    std::string preds_dir;
    std::string lengths;
    std::string categories;
    std::string tokenizer = "reference";
    std::string out;
};

int run_sweep(const SweepOptions& o) {
    if (o.predictor_cmd.empty() == o.preds_dir.empty()) {
        throw ConfigError("sweep needs exactly one of --predictor-cmd or --preds-dir");
    }
    std::vector<std::size_t> lengths;
    if (o.lengths.empty()) {
        lengths = kDefaultSweepLengths;
    } else {
        for (const auto& s : split_csv(o.lengths)) {
            try {
                const long long v = std::stoll(s);
                if (v <= 0) throw std::out_of_range("non-positive");
                lengths.push_back(static_cast<std::size_t>(v));
            } catch (const std::exception&) {
                throw ConfigError("invalid sweep length '" + s + "'");
            }
        }
    }
    require_input(o.items);
    const auto tokenizer = make_tokenizer(o.tokenizer);
    const auto items = records::load_eval_items(o.items);
    std::unique_ptr<Predictor> predictor;
    if (!o.predictor_cmd.empty()) {
        predictor = std::make_unique<CommandPredictor>(o.predictor_cmd);
    } else {
        predictor = std::make_unique<PredictionFilePredictor>(o.preds_dir);
    }
    const auto wanted = split_csv(o.categories);
    const auto rows = context_scaling_sweep(items, *predictor, lengths, *tokenizer,
                                            std::set<std::string>(wanted.begin(), wanted.end()));
    std::size_t missing = 0;
    for (const auto& r : rows) {
        if (!r.exact_match) ++missing;
    }
    const std::string csv = sweep_csv(rows);
    if (o.out.empty()) {
        std::cout << csv;
    } else {
        auto out = open_output(o.out);
        out << csv;
        json config = {{"items", o.items},
                       {"predictor_cmd", o.predictor_cmd},
                       {"preds_dir", o.preds_dir},
                       {"lengths", lengths},
                       {"categories", wanted},
                       {"tokenizer", tokenizer->name()}};
        write_manifest(o.out, "sweep", config, {{"rows", rows.size()}, {"missing_rows", missing}});
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

int run_stats(const std::string& input, const std::string& out_path) {
    require_input(input);
    StatsAccumulator acc;
    records::JsonlReader reader(input);
    std::string line;
    while (reader.next_line(line)) acc.add(parse_commit_line(line, input, reader.line_number()));
    const std::string text = records::to_json(acc.report()).dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        auto out = open_output(out_path);
        out << text;
        write_manifest(out_path, "stats", {{"input", input}}, records::to_json(acc.report()));
    }
    return kExitOk;
}

int run_rope_report(double base, std::size_t head_dim, const std::string& out_path) {
    rope::RopeConfig cfg{base, head_dim};
    try {
        rope::validate(cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const std::string csv = rope::frequency_report_csv(cfg);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        auto out = open_output(out_path);
        out << csv;
        write_manifest(out_path, "rope-report", {{"base", base}, {"head_dim", head_dim}},
                       {{"rows", head_dim / 2}});
    }
    return kExitOk;
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"Repository-level dataset construction for code LLMs", "repocompose"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    FilterOptions filter;
    auto* filter_cmd = app.add_subcommand("filter", "Filter raw commit records into completion targets");
    filter_cmd->add_option("--input", filter.input, "Commit records (JSONL)")->required();
    filter_cmd->add_option("--out", filter.out, "Target rows (JSONL)")->required();
    filter_cmd->add_option("--snapshots-out", filter.snapshots_out,
                           "Snapshot sidecar (default: <out>.snapshots.jsonl)");
    filter_cmd->add_option("--min-year", filter.min_year, "Drop commits before Jan 1 of this year");
    filter_cmd->add_option("--min-chars", filter.min_chars, "Minimum completion length in characters");
    filter_cmd->add_option("--max-chars", filter.max_chars, "Maximum completion length in characters");
    filter_cmd->add_option("--max-files-per-repo", filter.max_files, "Newest unique completion files per repo");
    filter_cmd->add_option("--holdout", filter.holdout, "Comma-separated repositories to exclude");
    filter_cmd->add_option("--holdout-file", filter.holdout_file, "File with one excluded repository per line");

    ComposeOptions compose_opts;
    compose_opts.workers = default_workers();
    auto* compose_cmd = app.add_subcommand("compose", "Compose contexts for every completion file");
    compose_cmd->add_option("--input", compose_opts.input, "Commit records (JSONL)")->required();
    compose_cmd->add_option("--out", compose_opts.out, "Composed dataset (JSONL)")->required();
    compose_cmd->add_option("--composer", compose_opts.composer, "Composer name")->required();
    compose_cmd->add_option("--modifier", compose_opts.modifier, "none | reversed | irrelevant");
    compose_cmd->add_option("--mode", compose_opts.mode, "training | evaluation");
    compose_cmd->add_option("--max-context", compose_opts.max_context, "Context budget in tokens");
    compose_cmd->add_option("--seed", compose_opts.seed, "Run seed");
    compose_cmd->add_option("--workers", compose_opts.workers, "Worker threads");
    compose_cmd->add_option("--tokenizer", compose_opts.tokenizer, "reference | external:<cmd>");
    compose_cmd->add_option("--dropout-p", compose_opts.dropout_p, "Half-memory line dropout probability");
    compose_cmd->add_option("--mask-p", compose_opts.mask_p, "Masked-leak token replacement probability");
    compose_cmd->add_option("--leak-segments", compose_opts.leak_segments, "Leak segment count");

    PackOptions pack;
    pack.workers = default_workers();
    auto* pack_cmd = app.add_subcommand("pack", "Tokenize composed examples for training");
    pack_cmd->add_option("--input", pack.input, "Composed dataset (JSONL)")->required();
    pack_cmd->add_option("--out", pack.out, "Packed dataset")->required();
    pack_cmd->add_option("--max-total", pack.max_total, "Total token limit");
    pack_cmd->add_option("--max-completion", pack.max_completion, "Completion token limit");
    pack_cmd->add_option("--min-ratio", pack.min_ratio, "Minimum context:completion token ratio");
    pack_cmd->add_option("--mask", pack.mask, "completion | full");
    pack_cmd->add_option("--format", pack.format, "jsonl | bin");
    pack_cmd->add_option("--tokenizer", pack.tokenizer, "reference | external:<cmd>");
    pack_cmd->add_option("--workers", pack.workers, "Worker threads");
    pack_cmd->add_option("--seed", pack.seed, "Recorded in the manifest");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Exact Match report with repository-context boost");
    eval_cmd->add_option("--items", eval.items, "Evaluation items (JSONL)")->required();
    eval_cmd->add_option("--preds", eval.preds, "Predictions (JSONL), optionally NAME=path")->required();
    eval_cmd->add_option("--categories", eval.categories, "Comma-separated categories to report");
    eval_cmd->add_option("--out", eval.out, "Write the report here instead of stdout");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Exact Match across maximum sequence lengths");
    sweep_cmd->add_option("--items", sweep.items, "Evaluation items (JSONL)")->required();
    sweep_cmd->add_option("--predictor-cmd", sweep.predictor_cmd, "Prediction command; {length} is substituted");
    sweep_cmd->add_option("--preds-dir", sweep.preds_dir, "Directory of <length>.jsonl predictions");
    sweep_cmd->add_option("--lengths", sweep.lengths, "Comma-separated lengths");
    sweep_cmd->add_option("--categories", sweep.categories, "Comma-separated categories");
    sweep_cmd->add_option("--tokenizer", sweep.tokenizer, "reference | external:<cmd>");
    sweep_cmd->add_option("--out", sweep.out, "CSV output (default stdout)");

    std::string stats_input;
    std::string stats_out;
    auto* stats_cmd = app.add_subcommand("stats", "Dataset statistics");
    stats_cmd->add_option("--input", stats_input, "Commit records (JSONL)")->required();
    stats_cmd->add_option("--out", stats_out, "JSON output (default stdout)");

    double rope_base = rope::kExtendedBase;
    std::size_t rope_dim = 64;
    std::string rope_out;
    auto* rope_cmd = app.add_subcommand("rope-report", "RoPE frequency table as CSV");
    rope_cmd->add_option("--base", rope_base, "Rotation base");
    rope_cmd->add_option("--head-dim", rope_dim, "Head dimension (even)");
    rope_cmd->add_option("--out", rope_out, "CSV output (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*filter_cmd) return run_filter(filter);
        if (*compose_cmd) return run_compose(compose_opts);
        if (*pack_cmd) return run_pack(pack);
        if (*eval_cmd) return run_eval(eval);
        if (*sweep_cmd) return run_sweep(sweep);
        if (*stats_cmd) return run_stats(stats_input, stats_out);
        if (*rope_cmd) return run_rope_report(rope_base, rope_dim, rope_out);
    } catch (const ConfigError& e) {
        log(LogLevel::error, e.what());
        return kExitConfigError;
    } catch (const SchemaError& e) {
        log(LogLevel::error, e.what());
        return kExitInputError;
    } catch (const std::exception& e) {
        log(LogLevel::error, e.what());
        return kExitInputError;
    }
    return kExitConfigError;
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> copy = args;
    std::vector<char*> argv;
    for (auto& a : copy) argv.push_back(a.data());
    argv.push_back(nullptr);
    return run(static_cast<int>(copy.size()), argv.data());
}

} // namespace repocompose::cli
