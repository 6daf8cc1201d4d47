#include "repocompose/eval_harness.hpp"

#include "repocompose/pysurface.hpp"
#include "repocompose/records.hpp"
#include "repocompose/subprocess.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace repocompose {

namespace {

std::string_view rstrip_ws(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                          s.back() == '\f' || s.back() == '\v' || s.back() == '\n')) {
        s.remove_suffix(1);
    }
    return s;
}

double tenths_to_double(std::int64_t tenths) {
    return static_cast<double>(tenths) / 10.0;
}

std::int64_t to_tenths(double value) {
    return std::llround(value * 10.0);
}

std::vector<std::string> resolved_categories(const std::vector<EvalItem>& items) {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(resolve_category(item));
    return out;
}

} // namespace

bool exact_match(std::string_view prediction, std::string_view truth) {
    for (auto line : split_lines_keep_newline(prediction)) {
        if (is_blank(line)) continue;
        return rstrip_ws(line) == rstrip_ws(truth);
    }
    return false;
}

LineCategory categorize_line(std::string_view line, const std::set<std::string>& infile_ids,
                             const std::set<std::string>& project_ids) {
    const auto refs = pysurface::referenced_identifiers(line);
    bool project = false;
    for (const auto& name : refs) {
        if (infile_ids.contains(name)) return LineCategory::infile;
        if (project_ids.contains(name)) project = true;
    }
    return project ? LineCategory::inproject : LineCategory::other;
}

std::string resolve_category(const EvalItem& item) {
    if (!item.category.empty()) return item.category;
    const auto infile = pysurface::declared_identifiers(item.file_prefix);
    const auto project = pysurface::declared_identifiers(item.context);
    return std::string(to_string(categorize_line(item.ground_truth_line, infile, project)));
}

std::int64_t em_tenths(std::size_t matches, std::size_t count) {
    if (count == 0) return 0;
    // round half up on exact integers: 1000 * m / n in tenths
    const std::uint64_t num = 1000ULL * matches;
    return static_cast<std::int64_t>((2 * num + count) / (2 * count));
}

double repository_context_boost(double file_level_score, double path_distance_score) {
    return tenths_to_double(to_tenths(path_distance_score) - to_tenths(file_level_score));
}

std::string format_tenths(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", value);
    return buf;
}

const CategoryScore* EvalReport::find(std::string_view run, std::string_view category) const {
    for (const auto& s : scores) {
        if (s.run == run && s.category == category) return &s;
    }
    return nullptr;
}

EvalReport evaluate(const std::vector<EvalItem>& items, const std::vector<PredictionRun>& runs,
                    const std::set<std::string>& categories) {
    EvalReport report;
    const auto labels = resolved_categories(items);

    std::set<std::string> present(labels.begin(), labels.end());
    std::set<std::string> wanted = categories.empty() ? present : categories;
    for (const auto& c : wanted) {
        if (!present.contains(c)) report.notices.push_back("category '" + c + "' has no items; omitted");
    }

    for (const auto& run : runs) {
        std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (!wanted.contains(labels[i])) continue;
            auto& [matches, count] = tally[labels[i]];
            ++count;
            auto it = run.predictions.find(items[i].example_id);
            if (it == run.predictions.end()) {
                report.warnings.push_back("run '" + run.name + "': no prediction for '" +
                                          items[i].example_id + "'");
                continue;
            }
            if (exact_match(it->second, items[i].ground_truth_line)) ++matches;
        }
        for (const auto& [category, mc] : tally) {
            report.scores.push_back({run.name, category, mc.first, mc.second,
                                     tenths_to_double(em_tenths(mc.first, mc.second))});
        }
    }

    for (const auto& c : wanted) {
        const auto* fl = report.find(kFileLevelRun, c);
        const auto* pd = report.find(kPathDistanceRun, c);
        if (fl && pd) {
            report.rcb.push_back({c, fl->exact_match, pd->exact_match,
                                  repository_context_boost(fl->exact_match, pd->exact_match)});
        }
    }
    return report;
}

std::optional<std::map<std::string, std::string>> PredictionFilePredictor::predict(
    std::size_t length, const std::vector<PreparedItem>&, const Tokenizer&) {
    const auto path = std::filesystem::path(directory_) / (std::to_string(length) + ".jsonl");
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
        return records::load_predictions(path.string());
    } catch (const SchemaError&) {
        return std::nullopt;
    }
}

std::optional<std::map<std::string, std::string>> CommandPredictor::predict(
    std::size_t length, const std::vector<PreparedItem>& batch, const Tokenizer& tokenizer) {
    std::string command = command_;
    const std::string placeholder = "{length}";
    if (auto pos = command.find(placeholder); pos != std::string::npos) {
        command.replace(pos, placeholder.size(), std::to_string(length));
    } else {
        command += " " + std::to_string(length);
    }

    std::string input;
    for (const auto& p : batch) {
        records::json row = {{"example_id", p.item->example_id},
                             {"length", length},
                             {"input_ids", p.input_ids},
                             {"text", tokenizer.decode(p.input_ids)}};
        input += records::dump_line(row);
        input += '\n';
    }
    const auto result = run_command(command, input);
    if (result.exit_code != 0) return std::nullopt;

    std::map<std::string, std::string> out;
    std::istringstream lines(result.output);
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
        ++n;
        if (is_blank(line)) continue;
        try {
            const auto j = records::parse_line(line, "predictor", n);
            out[j.at("example_id").get<std::string>()] = j.at("prediction").get<std::string>();
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    return out;
}

std::vector<SweepRow> context_scaling_sweep(const std::vector<EvalItem>& items, Predictor& predictor,
                                            const std::vector<std::size_t>& lengths,
                                            const Tokenizer& tokenizer,
                                            const std::set<std::string>& categories) {
    const auto labels = resolved_categories(items);
    std::set<std::string> wanted;
    for (const auto& l : labels) {
        if (categories.empty() || categories.contains(l)) wanted.insert(l);
    }

    std::vector<SweepRow> rows;
    for (std::size_t length : lengths) {
        std::vector<PreparedItem> batch;
        batch.reserve(items.size());
        for (const auto& item : items) {
            batch.push_back({&item, prepare_eval_sequence(item.context, item.file_prefix, length, tokenizer)});
        }
        const auto predictions = predictor.predict(length, batch, tokenizer);
        for (const auto& category : wanted) {
            SweepRow row{length, category, std::nullopt, 0};
            if (predictions) {
                std::size_t matches = 0;
                for (std::size_t i = 0; i < items.size(); ++i) {
                    if (labels[i] != category) continue;
                    ++row.count;
                    auto it = predictions->find(items[i].example_id);
                    if (it != predictions->end() && exact_match(it->second, items[i].ground_truth_line)) {
                        ++matches;
                    }
                }
                row.exact_match = tenths_to_double(em_tenths(matches, row.count));
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "length,category,exact_match,count\n";
    for (const auto& r : rows) {
        out += std::to_string(r.length);
        out += ',';
        out += r.category;
        out += ',';
        out += r.exact_match ? format_tenths(*r.exact_match) : std::string("NA");
        out += ',';
        out += std::to_string(r.count);
        out += '\n';
    }
    return out;
}

} // namespace repocompose
