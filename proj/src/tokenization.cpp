#include "repocompose/tokenization.hpp"

#include "repocompose/subprocess.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>

namespace repocompose {

using nlohmann::json;

std::vector<TokenId> Tokenizer::non_special_ids() const {
    std::vector<TokenId> ids;
    const auto& specials = special_ids();
    ids.reserve(vocab_size());
    for (std::size_t id = 0; id < vocab_size(); ++id) {
        if (!specials.contains(static_cast<TokenId>(id))) ids.push_back(static_cast<TokenId>(id));
    }
    return ids;
}

ByteTokenizer::ByteTokenizer() : specials_{256} {}

std::vector<TokenId> ByteTokenizer::encode(std::string_view text) const {
    std::vector<TokenId> ids;
    ids.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto sep = text.find(kFileSep, pos);
        const auto end = sep == std::string_view::npos ? text.size() : sep;
        for (std::size_t i = pos; i < end; ++i) ids.push_back(static_cast<unsigned char>(text[i]));
        if (sep == std::string_view::npos) break;
        ids.push_back(256);
        pos = sep + kFileSep.size();
    }
    return ids;
}

std::string ByteTokenizer::decode(std::span<const TokenId> ids) const {
    std::string out;
    out.reserve(ids.size());
    for (TokenId id : ids) {
        if (id == 256) {
            out += kFileSep;
        } else {
            out += static_cast<char>(static_cast<unsigned char>(id & 0xFF));
        }
    }
    return out;
}

std::size_t ByteTokenizer::count(std::string_view text) const {
    std::size_t seps = 0;
    std::size_t pos = 0;
    while ((pos = text.find(kFileSep, pos)) != std::string_view::npos) {
        ++seps;
        pos += kFileSep.size();
    }
    return text.size() - seps * (kFileSep.size() - 1);
}

std::shared_ptr<const Tokenizer> reference_tokenizer() {
    static const auto instance = std::make_shared<const ByteTokenizer>();
    return instance;
}

namespace {

class ExternalTokenizer final : public Tokenizer {
public:
    explicit ExternalTokenizer(const std::string& command) : child_(command) {
        const json info = call({{"op", "info"}});
        try {
            name_ = "external:" + info.at("name").get<std::string>();
            vocab_size_ = info.at("vocab_size").get<std::size_t>();
            for (const auto& id : info.at("special_ids")) specials_.insert(id.get<TokenId>());
            file_sep_ = info.at("file_sep_id").get<TokenId>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("external tokenizer returned malformed info: ") + e.what());
        }
    }

    std::vector<TokenId> encode(std::string_view text) const override {
        const json reply = call({{"op", "encode"}, {"text", std::string(text)}});
        return reply.at("ids").get<std::vector<TokenId>>();
    }

    std::string decode(std::span<const TokenId> ids) const override {
        const json reply =
            call({{"op", "decode"}, {"ids", std::vector<TokenId>(ids.begin(), ids.end())}});
        return reply.at("text").get<std::string>();
    }

    const std::set<TokenId>& special_ids() const override { return specials_; }
    std::size_t vocab_size() const override { return vocab_size_; }
    TokenId file_sep_id() const override { return file_sep_; }
    std::string name() const override { return name_; }

private:
    json call(const json& request) const {
        std::lock_guard lock(mutex_);
        if (!child_.write_line(request.dump(-1, ' ', false, json::error_handler_t::replace))) {
            throw ConfigError("external tokenizer closed its input");
        }
        auto line = child_.read_line();
        if (!line) throw ConfigError("external tokenizer exited unexpectedly");
        try {
            return json::parse(*line);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("external tokenizer reply is not JSON: ") + e.what());
        }
    }

    mutable std::mutex mutex_;
    mutable ChildProcess child_;
    std::string name_;
    std::size_t vocab_size_ = 0;
    std::set<TokenId> specials_;
    TokenId file_sep_ = 0;
};

} // namespace

std::shared_ptr<const Tokenizer> external_tokenizer(const std::string& command) {
    return std::make_shared<const ExternalTokenizer>(command);
}

std::shared_ptr<const Tokenizer> make_tokenizer(std::string_view selection) {
    if (selection == "reference") return reference_tokenizer();
    constexpr std::string_view prefix = "external:";
    if (selection.starts_with(prefix) && selection.size() > prefix.size()) {
        return external_tokenizer(std::string(selection.substr(prefix.size())));
    }
    throw ConfigError("unknown tokenizer '" + std::string(selection) +
                      "'; use 'reference' or 'external:<cmd>'");
}

void validate(const TruncationPolicy& policy) {
    if (policy.total_max == 0 || policy.completion_max == 0) {
        throw ConfigError("token limits must be positive");
    }
    if (policy.completion_max > policy.total_max) {
        throw ConfigError("completion limit exceeds total limit");
    }
    if (!(policy.min_ratio >= 0.0) || !std::isfinite(policy.min_ratio)) {
        throw ConfigError("context:completion ratio must be a non-negative number");
    }
}

MaskMode parse_mask_mode(std::string_view name) {
    if (name == "completion") return MaskMode::completion;
    if (name == "full") return MaskMode::full;
    throw ConfigError("unknown mask mode '" + std::string(name) + "'; use completion or full");
}

std::optional<PackedExample> pack_training_example(std::string_view example_id,
                                                   std::string_view context,
                                                   std::string_view completion,
                                                   const TruncationPolicy& policy,
                                                   const Tokenizer& tokenizer, MaskMode mask) {
    std::vector<TokenId> completion_ids = tokenizer.encode(completion);
    if (completion_ids.size() > policy.completion_max) completion_ids.resize(policy.completion_max);
    const std::vector<TokenId> context_ids = tokenizer.encode(context);

    std::size_t context_len =
        std::min(context_ids.size(), policy.total_max - completion_ids.size());
    if (policy.min_ratio > 0.0 && context_len > 0 &&
        static_cast<double>(context_len) < policy.min_ratio * static_cast<double>(completion_ids.size())) {
        const auto allowed = static_cast<std::size_t>(
            std::floor(static_cast<double>(context_len) / policy.min_ratio));
        completion_ids.resize(std::min(allowed, completion_ids.size()));
        context_len = std::min(context_ids.size(), policy.total_max - completion_ids.size());
    }
    if (completion_ids.empty()) return std::nullopt;

    PackedExample packed;
    packed.example_id = std::string(example_id);
    packed.context_len = context_len;
    packed.completion_len = completion_ids.size();
    packed.input_ids.reserve(context_len + completion_ids.size());
    packed.input_ids.insert(packed.input_ids.end(), context_ids.end() - static_cast<std::ptrdiff_t>(context_len),
                            context_ids.end());
    packed.input_ids.insert(packed.input_ids.end(), completion_ids.begin(), completion_ids.end());
    packed.loss_mask.assign(packed.input_ids.size(), 1);
    if (mask == MaskMode::completion) {
        std::fill_n(packed.loss_mask.begin(), context_len, std::uint8_t{0});
    }
    return packed;
}

std::vector<TokenId> prepare_eval_sequence(std::string_view context, std::string_view completion_prefix,
                                           std::size_t max_seq_len, const Tokenizer& tokenizer) {
    std::string joined;
    joined.reserve(context.size() + completion_prefix.size());
    joined.append(context).append(completion_prefix);
    std::vector<TokenId> ids = tokenizer.encode(joined);
    if (ids.size() > max_seq_len) {
        ids.erase(ids.begin(), ids.end() - static_cast<std::ptrdiff_t>(max_seq_len));
    }
    return ids;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                           static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(bytes, 4);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
    v = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
        (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
    return true;
}

void put_string(std::ostream& out, std::string_view s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
    std::uint32_t len = 0;
    if (!get_u32(in, len)) throw SchemaError("truncated binary record");
    std::string s(len, '\0');
    if (len > 0 && !in.read(s.data(), len)) throw SchemaError("truncated binary record");
    return s;
}

} // namespace

void write_packed_binary(std::ostream& out, const PackedExample& example, std::string_view tokenizer_name) {
    put_string(out, example.example_id);
    put_u32(out, static_cast<std::uint32_t>(example.input_ids.size()));
    for (TokenId id : example.input_ids) put_u32(out, id);
    put_u32(out, static_cast<std::uint32_t>(example.loss_mask.size()));
    out.write(reinterpret_cast<const char*>(example.loss_mask.data()),
              static_cast<std::streamsize>(example.loss_mask.size()));
    put_u32(out, static_cast<std::uint32_t>(example.context_len));
    put_u32(out, static_cast<std::uint32_t>(example.completion_len));
    put_string(out, tokenizer_name);
}

std::optional<PackedExample> read_packed_binary(std::istream& in, std::string* tokenizer_name) {
    if (in.peek() == std::char_traits<char>::eof()) return std::nullopt;
    PackedExample ex;
    ex.example_id = get_string(in);
    std::uint32_t n = 0;
    if (!get_u32(in, n)) throw SchemaError("truncated binary record");
    ex.input_ids.resize(n);
    for (auto& id : ex.input_ids) {
        if (!get_u32(in, id)) throw SchemaError("truncated binary record");
    }
    std::uint32_t m = 0;
    if (!get_u32(in, m)) throw SchemaError("truncated binary record");
    ex.loss_mask.resize(m);
    if (m > 0 && !in.read(reinterpret_cast<char*>(ex.loss_mask.data()), m)) {
        throw SchemaError("truncated binary record");
    }
    std::uint32_t ctx = 0;
    std::uint32_t comp = 0;
    if (!get_u32(in, ctx) || !get_u32(in, comp)) throw SchemaError("truncated binary record");
    ex.context_len = ctx;
    ex.completion_len = comp;
    std::string name = get_string(in);
    if (tokenizer_name) *tokenizer_name = std::move(name);
    return ex;
}

} // namespace repocompose
