#pragma once

#include "repocompose/core_model.hpp"
#include "repocompose/tokenization.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace repocompose {

inline constexpr std::string_view kFileLevelRun = "FL-4K";
inline constexpr std::string_view kPathDistanceRun = "PD-16K";

struct EvalItem {
    std::string example_id;
    std::string context;
    std::string file_prefix;
    std::string ground_truth_line;
    /// Pre-assigned label, honored verbatim; empty means "derive it".
    std::string category;
};

/// Compares the first non-blank line of `prediction` with `truth`, both
/// with trailing whitespace removed.
bool exact_match(std::string_view prediction, std::string_view truth);

/// infile wins over inproject when a line references both.
LineCategory categorize_line(std::string_view line, const std::set<std::string>& infile_ids,
                             const std::set<std::string>& project_ids);

/// The item's label, or a label derived from identifiers declared in the
/// file prefix (infile) and in the context (inproject).
std::string resolve_category(const EvalItem& item);

/// Exact Match percentage rounded to one decimal, kept as integer tenths.
std::int64_t em_tenths(std::size_t matches, std::size_t count);

/// PD-16K minus FL-4K on scores already rounded to one decimal.
double repository_context_boost(double file_level_score, double path_distance_score);

struct PredictionRun {
    std::string name;
    std::map<std::string, std::string> predictions;
};

struct CategoryScore {
    std::string run;
    std::string category;
    std::size_t matches = 0;
    std::size_t count = 0;
    double exact_match = 0.0;
};

struct RcbEntry {
    std::string category;
    double file_level = 0.0;
    double path_distance = 0.0;
    double boost = 0.0;
};

struct EvalReport {
    std::vector<CategoryScore> scores;
    std::vector<RcbEntry> rcb;
    std::vector<std::string> warnings;
    std::vector<std::string> notices;

    const CategoryScore* find(std::string_view run, std::string_view category) const;
};

/// Scores every run per category. `categories` filters (empty keeps all);
/// an item without a prediction counts as a miss and adds a warning. RCB
/// entries appear when runs named FL-4K and PD-16K are both present.
EvalReport evaluate(const std::vector<EvalItem>& items, const std::vector<PredictionRun>& runs,
                    const std::set<std::string>& categories = {});

std::string format_tenths(double value);

// ---------------------------------------------------------------------------
// Context-length sweep

struct PreparedItem {
    const EvalItem* item = nullptr;
    std::vector<TokenId> input_ids;
};

/// Source of predictions for one sweep length. Returning nullopt marks the
/// length as failed.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::optional<std::map<std::string, std::string>> predict(
        std::size_t length, const std::vector<PreparedItem>& batch, const Tokenizer& tokenizer) = 0;
};

/// Reads `<dir>/<length>.jsonl` files of {"example_id","prediction"}.
class PredictionFilePredictor final : public Predictor {
public:
    explicit PredictionFilePredictor(std::string directory) : directory_(std::move(directory)) {}
    std::optional<std::map<std::string, std::string>> predict(
        std::size_t length, const std::vector<PreparedItem>& batch, const Tokenizer& tokenizer) override;

private:
    std::string directory_;
};

/// Runs a shell command per length. `{length}` in the command is replaced
/// by the length; stdin receives JSONL {"example_id","length","input_ids","text"}
/// and stdout must return JSONL {"example_id","prediction"}. A non-zero exit
/// fails the length.
class CommandPredictor final : public Predictor {
public:
    explicit CommandPredictor(std::string command) : command_(std::move(command)) {}
    std::optional<std::map<std::string, std::string>> predict(
        std::size_t length, const std::vector<PreparedItem>& batch, const Tokenizer& tokenizer) override;

private:
    std::string command_;
};

inline const std::vector<std::size_t> kDefaultSweepLengths = {1024,  2048,  4096,  8192,
                                                              16384, 32768, 65536, 131072};

struct SweepRow {
    std::size_t length = 0;
    std::string category;
    std::optional<double> exact_match;
    std::size_t count = 0;
};

std::vector<SweepRow> context_scaling_sweep(const std::vector<EvalItem>& items, Predictor& predictor,
                                            const std::vector<std::size_t>& lengths,
                                            const Tokenizer& tokenizer,
                                            const std::set<std::string>& categories = {});

/// Header `length,category,exact_match,count`; failed lengths print NA.
std::string sweep_csv(const std::vector<SweepRow>& rows);

} // namespace repocompose
