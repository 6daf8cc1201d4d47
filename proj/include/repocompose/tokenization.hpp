#pragma once

#include "repocompose/core_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace repocompose {

using TokenId = std::uint32_t;

inline constexpr std::string_view kFileSep = "<file_sep>";

/// Read-only after construction; implementations must tolerate concurrent
/// calls. `decode(encode(s)) == s` is required, and `<file_sep>` must encode
/// to the single id `file_sep_id()`.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;

    virtual std::vector<TokenId> encode(std::string_view text) const = 0;
    virtual std::string decode(std::span<const TokenId> ids) const = 0;
    virtual const std::set<TokenId>& special_ids() const = 0;
    virtual std::size_t vocab_size() const = 0;
    virtual TokenId file_sep_id() const = 0;
    virtual std::string name() const = 0;

    virtual std::size_t count(std::string_view text) const { return encode(text).size(); }

    /// Sorted ids usable for random sampling (vocabulary minus specials).
    std::vector<TokenId> non_special_ids() const;
};

/// Byte-level tokenizer: every byte is its own id (0-255) and `<file_sep>`
/// is id 256.
class ByteTokenizer final : public Tokenizer {
public:
    ByteTokenizer();

    std::vector<TokenId> encode(std::string_view text) const override;
    std::string decode(std::span<const TokenId> ids) const override;
    const std::set<TokenId>& special_ids() const override { return specials_; }
    std::size_t vocab_size() const override { return 257; }
    TokenId file_sep_id() const override { return 256; }
    std::string name() const override { return "reference"; }
    std::size_t count(std::string_view text) const override;

private:
    std::set<TokenId> specials_;
};

std::shared_ptr<const Tokenizer> reference_tokenizer();

/// Tokenizer backed by a long-running child process speaking JSON lines on
/// stdin/stdout:
///   {"op":"info"}               -> {"name":..,"vocab_size":..,"special_ids":[..],"file_sep_id":..}
///   {"op":"encode","text":..}   -> {"ids":[..]}
///   {"op":"decode","ids":[..]}  -> {"text":..}
/// Calls are serialized.
std::shared_ptr<const Tokenizer> external_tokenizer(const std::string& command);

/// "reference" or "external:<cmd>"; throws ConfigError otherwise.
std::shared_ptr<const Tokenizer> make_tokenizer(std::string_view selection);

struct TruncationPolicy {
    std::size_t total_max = 16384;
    std::size_t completion_max = 4096;
    double min_ratio = 3.0;
};

void validate(const TruncationPolicy& policy);

enum class MaskMode { completion, full };

MaskMode parse_mask_mode(std::string_view name);

struct PackedExample {
    std::string example_id;
    std::vector<TokenId> input_ids;
    std::vector<std::uint8_t> loss_mask;
    std::size_t context_len = 0;
    std::size_t completion_len = 0;

    bool operator==(const PackedExample&) const = default;
};

/// Training-mode packing. The context keeps its token suffix and the
/// completion its token prefix; when a non-empty context falls below
/// `min_ratio` times the completion, the completion is cut to
/// floor(context / min_ratio) and the context re-extended into the freed
/// room. Returns nullopt when the completion ends up with zero tokens.
std::optional<PackedExample> pack_training_example(std::string_view example_id,
                                                   std::string_view context,
                                                   std::string_view completion,
                                                   const TruncationPolicy& policy,
                                                   const Tokenizer& tokenizer,
                                                   MaskMode mask = MaskMode::completion);

/// Evaluation-mode input: encode(context + prefix) keeping the last
/// `max_seq_len` ids.
std::vector<TokenId> prepare_eval_sequence(std::string_view context, std::string_view completion_prefix,
                                           std::size_t max_seq_len, const Tokenizer& tokenizer);

/// Length-prefixed little-endian record with the JSONL field order:
/// example_id, input_ids, loss_mask, context_len, completion_len, tokenizer.
void write_packed_binary(std::ostream& out, const PackedExample& example,
                         std::string_view tokenizer_name);

/// Reads one record; nullopt at clean end of stream, SchemaError on a
/// truncated record.
std::optional<PackedExample> read_packed_binary(std::istream& in, std::string* tokenizer_name = nullptr);

} // namespace repocompose
