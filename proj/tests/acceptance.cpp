// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "repocompose/composers.hpp"
#include "repocompose/core_model.hpp"
#include "repocompose/eval_harness.hpp"
#include "repocompose/ingest_filter.hpp"
#include "repocompose/pysurface.hpp"
#include "repocompose/random.hpp"
#include "repocompose/relevance.hpp"
#include "repocompose/rope.hpp"
#include "repocompose/tokenization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <fcntl.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

using namespace repocompose;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

int failures = 0;

void run_criterion(const std::string& name, double time_limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit_s > 0 && secs > time_limit_s) {
        out.ok = false;
        out.detail += " (over time limit " + std::to_string(time_limit_s) + " s)";
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", secs);
    std::cout << (out.ok ? "PASS " : "FAIL ") << name << " [" << timing << "] " << out.detail << std::endl;
    if (!out.ok) ++failures;
}

const Tokenizer& tok() { return *reference_tokenizer(); }

std::string random_word(Rng& rng, std::size_t max_len = 8) {
    static const char kChars[] = "abcdefghijklmnopqrstuvwxyz_";
    std::string w;
    const std::size_t n = 1 + rng.below(max_len);
    for (std::size_t i = 0; i < n; ++i) w += kChars[rng.below(sizeof kChars - 1)];
    return w;
}

// ---------------------------------------------------------------------------

Outcome rcb_reference_scores() {
    struct Row {
        double fl, pd;
        const char* expected;
    };
    const Row rows[] = {{22.6, 44.2, "+21.6"}, {25.1, 42.3, "+17.2"}, {26.4, 0.0, "-26.4"},
                        {27.2, 48.5, "+21.3"}, {25.9, 45.2, "+19.3"}, {26.2, 48.8, "+22.6"}};
    auto signed_tenths = [](double v) {
        std::string s = format_tenths(v);
        return v >= 0 ? "+" + s : s;
    };
    std::size_t ok = 0;
    std::string bad;
    for (const auto& r : rows) {
        // direct arithmetic
        const bool direct = signed_tenths(repository_context_boost(r.fl, r.pd)) == r.expected;
        // through evaluate(): 1000 items so each score is an exact count
        std::vector<EvalItem> items;
        for (int i = 0; i < 1000; ++i) items.push_back({"i" + std::to_string(i), "", "", "t" + std::to_string(i), "inproject"});
        PredictionRun fl{"FL-4K", {}}, pd{"PD-16K", {}};
        const auto fl_hits = static_cast<int>(std::lround(r.fl * 10));
        const auto pd_hits = static_cast<int>(std::lround(r.pd * 10));
        for (int i = 0; i < 1000; ++i) {
            fl.predictions[items[i].example_id] = i < fl_hits ? items[i].ground_truth_line : "x";
            pd.predictions[items[i].example_id] = i < pd_hits ? items[i].ground_truth_line : "x";
        }
        const auto report = evaluate(items, {fl, pd});
        const bool via_eval = report.rcb.size() == 1 && signed_tenths(report.rcb[0].boost) == r.expected &&
                              report.rcb[0].file_level == r.fl && report.rcb[0].path_distance == r.pd;
        if (direct && via_eval) {
            ++ok;
        } else {
            bad += std::string(" ") + r.expected;
        }
    }
    return {ok == std::size(rows), std::to_string(ok) + "/6 boosts reproduced" + bad};
}

// ---------------------------------------------------------------------------

Outcome packing_invariants() {
    Rng rng(20240501);
    const TruncationPolicy policy;
    std::size_t violations = 0, skipped = 0, ratio_cut = 0;
    auto random_text = [&](std::size_t n) {
        std::string s;
        s.reserve(n + 16);
        while (s.size() < n) {
            if (rng.below(500) == 0) {
                s += kFileSep;
            } else {
                s += static_cast<char>(32 + rng.below(95));
                if (rng.below(40) == 0) s += '\n';
            }
        }
        return s;
    };
    auto length = [&](std::size_t cap) -> std::size_t {
        switch (rng.below(4)) {
        case 0: return rng.below(64);
        case 1: return rng.below(cap / 8);
        default: return rng.below(cap);
        }
    };
    for (int i = 0; i < 10000; ++i) {
        const auto ctx = random_text(length(40000));
        const auto comp = random_text(length(9000));
        const MaskMode mask = rng.below(2) ? MaskMode::completion : MaskMode::full;
        auto p = pack_training_example("p" + std::to_string(i), ctx, comp, policy, tok(), mask);
        const std::size_t comp_tokens = tok().count(comp);
        if (!p) {
            ++skipped;
            // a rejection is only legitimate when the completion would be empty
            const std::size_t ctx_tokens = tok().count(ctx);
            const std::size_t room = std::min(ctx_tokens, policy.total_max - std::min(comp_tokens, policy.completion_max));
            if (comp_tokens != 0 && !(room > 0 && room < 3)) ++violations;
            continue;
        }
        const std::size_t total = p->input_ids.size();
        bool bad = total > policy.total_max || p->completion_len > policy.completion_max ||
                   p->context_len + p->completion_len != total || p->loss_mask.size() != total ||
                   p->completion_len == 0;
        if (p->context_len > 0 && static_cast<double>(p->context_len) < 3.0 * static_cast<double>(p->completion_len)) {
            bad = true;
        }
        for (std::size_t k = 0; k < total && !bad; ++k) {
            const std::uint8_t want = (mask == MaskMode::full || k >= p->context_len) ? 1 : 0;
            if (p->loss_mask[k] != want) bad = true;
        }
        if (p->completion_len < std::min(comp_tokens, policy.completion_max)) ++ratio_cut;
        if (bad) ++violations;
    }
    return {violations == 0, "10000 pairs, " + std::to_string(violations) + " violations, " +
                                 std::to_string(skipped) + " skipped, " + std::to_string(ratio_cut) +
                                 " ratio cuts"};
}

// ---------------------------------------------------------------------------

RepositorySnapshot synthetic_snapshot(std::uint64_t seed) {
    Rng rng(seed);
    RepositorySnapshot s{"synth/repo", "c0", 1700000000, {}};
    const char* dirs[] = {"", "pkg/", "pkg/core/", "pkg/io/", "tools/", "docs/"};
    const char* text_ext[] = {".json", ".yaml", ".yml", ".sh", ".md", ".txt", ".rst"};
    for (int i = 0; i < 50; ++i) {
        const std::string dir = dirs[rng.below(std::size(dirs))];
        std::string path;
        std::string content;
        if (i % 5 == 4) {
            path = dir + "file" + std::to_string(i) + text_ext[rng.below(std::size(text_ext))];
            for (int l = 0; l < 40; ++l) content += random_word(rng) + ": " + random_word(rng) + "\n";
        } else {
            path = dir + "mod" + std::to_string(i) + ".py";
            content = "\"\"\"Module " + std::to_string(i) + ".\"\"\"\nimport os\n\n";
            for (int f = 0; f < 6; ++f) {
                content += "# helper " + random_word(rng) + "\n";
                content += "def " + random_word(rng) + "_" + std::to_string(f) + "(a, b):\n";
                content += "    \"\"\"Doc " + random_word(rng) + ".\"\"\"\n";
                content += "    value = a + b  # " + random_word(rng) + "\n";
                content += "    return value * " + std::to_string(rng.below(100)) + "\n\n";
            }
            content += "shared_line_" + std::to_string(i % 7) + " = 1\n";
        }
        s.files.push_back({path, content});
    }
    return s;
}

std::vector<CompletionTarget> synthetic_targets() {
    std::vector<CompletionTarget> out;
    const char* paths[] = {"pkg/core/new_a.py", "new_b.py", "tools/new_c.py"};
    for (const char* p : paths) {
        std::string body = "import os\n\n";
        for (int l = 0; l < 60; ++l) body += "shared_line_" + std::to_string(l % 7) + " = " + std::to_string(l) + "\n";
        out.push_back({"synth/repo", "c0", 1700000000, {p, body}});
    }
    return out;
}

Outcome composer_determinism_and_saturation() {
    const auto snapshot = normalize_snapshot(synthetic_snapshot(99));
    const auto targets = synthetic_targets();
    const ContextBudget budget{2048, reference_tokenizer()};
    const ContextBudget unlimited{1u << 30, reference_tokenizer()};
    std::size_t combos = 0, mismatches = 0, unsaturated = 0, saturation_checks = 0;
    std::string bad;
    for (auto kind : kAllComposerKinds) {
        for (auto modifier : kAllModifiers) {
            if (modifier != Modifier::none && !accepts_modifier(kind)) continue;
            for (auto mode : {ComposeMode::training, ComposeMode::evaluation}) {
                ComposerSpec spec;
                spec.kind = kind;
                spec.modifier = modifier;
                spec.mode = mode;
                spec.max_seq_len = budget.max_context_tokens;
                spec.seed = 42;
                ++combos;
                for (const auto& t : targets) {
                    const auto a = compose(spec, snapshot, t, budget);
                    const auto b = compose(spec, snapshot, t, budget);
                    if (!(a == b)) {
                        ++mismatches;
                        bad += " " + spec.id();
                    }
                    // do the candidates exceed the budget?
                    const auto resolved = parse_composer_kind(a.resolved_composer);
                    bool exceeds = false;
                    if (resolved == ComposerKind::file_level) {
                        exceeds = false;
                    } else if (resolved == ComposerKind::random_tokens || resolved == ComposerKind::duplication) {
                        exceeds = true;
                    } else {
                        ComposerSpec full = spec;
                        full.kind = resolved;
                        full.mode = mode;
                        exceeds = tok().count(compose(full, snapshot, t, unlimited).context) > budget.max_context_tokens;
                    }
                    if (exceeds) {
                        ++saturation_checks;
                        if (tok().count(a.context) != budget.max_context_tokens) {
                            ++unsaturated;
                            bad += " unsaturated:" + spec.id();
                        }
                    }
                }
            }
        }
    }
    return {mismatches == 0 && unsaturated == 0 && saturation_checks > 0,
            std::to_string(combos) + " kind/modifier/mode combos x 3 targets, " + std::to_string(mismatches) +
                " non-identical, " + std::to_string(unsaturated) + "/" + std::to_string(saturation_checks) +
                " unsaturated" + bad};
}

// ---------------------------------------------------------------------------

std::string strip(const std::string& s) {
    const char* ws = " \t\r\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::set<std::string> brute_line_set(const std::string& content) {
    std::set<std::string> out;
    std::stringstream ss(content);
    std::string line;
    while (std::getline(ss, line)) {
        auto t = strip(line);
        if (t.size() >= 5) out.insert(t);
    }
    return out;
}

std::pair<std::size_t, std::size_t> brute_iou(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    std::set<std::string> uni = a;
    uni.insert(b.begin(), b.end());
    return {inter, uni.size()};
}

std::size_t brute_distance(const std::string& a, const std::string& b) {
    auto dirs = [](const std::string& p) {
        std::vector<std::string> parts;
        std::string cur;
        for (char c : p) {
            if (c == '/') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        return parts; // last segment (the file name) is dropped
    };
    const auto da = dirs(a), db = dirs(b);
    std::size_t common = 0;
    while (common < da.size() && common < db.size() && da[common] == db[common]) ++common;
    return da.size() + db.size() - 2 * common;
}

std::string random_soup(Rng& rng, const std::vector<std::string>& pool) {
    std::string s;
    const std::size_t n = rng.below(12);
    for (std::size_t i = 0; i < n; ++i) {
        static const char* pads[] = {"", " ", "  ", "\t", " \t"};
        s += pads[rng.below(5)] + pool[rng.below(pool.size())] + pads[rng.below(5)];
        if (i + 1 < n || rng.below(2)) s += '\n';
    }
    return s;
}

std::vector<std::string> line_pool(Rng& rng) {
    std::vector<std::string> pool = {"x=1", "abcd", "abcde", "def f():", "return 1", "import os", "pass"};
    for (int i = 0; i < 8; ++i) pool.push_back(random_word(rng, 9));
    return pool;
}

Outcome ranking_oracle() {
    Rng rng(1234);
    const char* dirs[] = {"", "a/", "b/", "a/b/", "a/c/", "b/a/", "a/b/c/"};
    const char* exts[] = {".py", ".py", ".py", ".md", ".txt"};
    std::size_t mismatches = 0;
    for (int fixture = 0; fixture < 1000; ++fixture) {
        auto pool = line_pool(rng);
        RepositorySnapshot snap{"o/r", "c", 0, {}};
        const std::size_t n = 1 + rng.below(8);
        std::set<std::string> used;
        while (snap.files.size() < n) {
            std::string path = std::string(dirs[rng.below(std::size(dirs))]) + "f" + std::to_string(rng.below(6)) +
                               exts[rng.below(std::size(exts))];
            if (!used.insert(path).second) continue;
            snap.files.push_back({path, random_soup(rng, pool)});
        }
        const std::string target_path = std::string(dirs[rng.below(std::size(dirs))]) + "target.py";
        const CompletionTarget target{"o/r", "c", 0, {target_path, random_soup(rng, pool)}};

        const auto ranked = rank_files(snap, target, RankScheme::path_distance_py);

        struct C {
            std::string path;
            std::size_t dist;
            std::pair<std::size_t, std::size_t> iou;
        };
        std::vector<C> cands;
        const auto tset = brute_line_set(target.file.content);
        for (const auto& f : snap.files) {
            if (f.path.size() < 3 || f.path.substr(f.path.size() - 3) != ".py") continue;
            cands.push_back({f.path, brute_distance(f.path, target_path), brute_iou(brute_line_set(f.content), tset)});
        }
        auto less = [](const C& x, const C& y) {
            if (x.dist != y.dist) return x.dist > y.dist;
            // compare fractions; empty union counts as 0
            const std::size_t xn = x.iou.second ? x.iou.first : 0, xd = x.iou.second ? x.iou.second : 1;
            const std::size_t yn = y.iou.second ? y.iou.first : 0, yd = y.iou.second ? y.iou.second : 1;
            if (xn * yd != yn * xd) return xn * yd < yn * xd;
            return x.path < y.path;
        };
        // place each candidate by counting how many others precede it
        std::vector<std::string> expected(cands.size());
        bool total_order = true;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            std::size_t before = 0;
            for (std::size_t j = 0; j < cands.size(); ++j) {
                if (i != j && less(cands[j], cands[i])) ++before;
            }
            if (!expected[before].empty()) total_order = false;
            expected[before] = cands[i].path;
        }
        std::vector<std::string> got;
        for (const auto& f : ranked.files) got.push_back(f.path);
        if (!total_order || got != expected) ++mismatches;
    }
    return {mismatches == 0, "1000 fixtures, " + std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------------------

Outcome iou_oracle() {
    Rng rng(777);
    std::size_t mismatches = 0, asymmetric = 0, self_fail = 0, self_checked = 0;
    for (int i = 0; i < 1000; ++i) {
        auto pool = line_pool(rng);
        const auto a = random_soup(rng, pool);
        const auto b = random_soup(rng, pool);
        const auto [inter, uni] = brute_iou(brute_line_set(a), brute_line_set(b));
        const double expected = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
        const double got = lines_iou(a, b);
        if (got != expected) ++mismatches;
        if (got != lines_iou(b, a)) ++asymmetric;
        if (!brute_line_set(a).empty()) {
            ++self_checked;
            if (lines_iou(a, a) != 1.0) ++self_fail;
        }
    }
    return {mismatches == 0 && asymmetric == 0 && self_fail == 0 && self_checked > 0,
            "1000 soups, " + std::to_string(mismatches) + " mismatches, " + std::to_string(asymmetric) +
                " asymmetric, self-IoU failures " + std::to_string(self_fail) + "/" + std::to_string(self_checked)};
}

// ---------------------------------------------------------------------------

Outcome composer_statistics() {
    std::ostringstream detail;
    bool ok = true;

    // half-memory keep rate
    std::string lines;
    for (int i = 0; i < 100000; ++i) lines += "line " + std::to_string(i) + "\n";
    Rng h(42);
    const auto kept = split_lines_keep_newline(half_memory_dropout(lines, 0.5, h)).size();
    const double keep_rate = static_cast<double>(kept) / 100000.0;
    ok = ok && keep_rate >= 0.47 && keep_rate <= 0.53;
    detail << "keep=" << keep_rate;

    // masked-leak corruption rate on a 100k-token context
    std::string context;
    for (int i = 0; context.size() < 101000; ++i) context += "ctx_" + std::to_string(i) + " = value\n";
    std::string completion;
    for (int i = 0; i < 23; ++i) completion += "leaked_" + std::to_string(i) + "()\n";
    Rng m(7);
    CorruptionStats stats;
    masked_leak_transform(context, completion, m, tok(), 0.15, &stats);
    const double corrupt_rate = static_cast<double>(stats.replaced) / static_cast<double>(stats.tokens);
    ok = ok && stats.tokens >= 100000 && corrupt_rate >= 0.14 && corrupt_rate <= 0.16;
    detail << " corrupt=" << corrupt_rate << " over " << stats.tokens;

    // leak token delta, both bare transform and full composer
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng r(seed);
        std::string base;
        const std::size_t n_lines = 50 + r.below(400);
        for (std::size_t i = 0; i < n_lines; ++i) base += "    x_" + std::to_string(i) + " = compute(" + random_word(r) + ")\n";
        std::string comp;
        for (int i = 0; i < 30; ++i) comp += "def g" + std::to_string(i) + "(): return " + random_word(r) + "\n";
        const auto out = leak_transform(base, comp, 5, r, tok());
        const double b = static_cast<double>(tok().count(base));
        worst = std::max(worst, std::abs(static_cast<double>(tok().count(out)) - b) / b);
    }
    const auto snapshot = normalize_snapshot(synthetic_snapshot(5));
    for (const auto& t : synthetic_targets()) {
        for (std::size_t budget : std::vector<std::size_t>{512, 2048, 8192}) {
            ComposerSpec spec;
            spec.kind = ComposerKind::path_distance_py;
            const ContextBudget cb{budget, reference_tokenizer()};
            const double b = static_cast<double>(tok().count(compose(spec, snapshot, t, cb).context));
            spec.kind = ComposerKind::leak;
            const double l = static_cast<double>(tok().count(compose(spec, snapshot, t, cb).context));
            worst = std::max(worst, std::abs(l - b) / b);
        }
    }
    ok = ok && worst <= 0.10;
    detail << " leak_delta_max=" << worst;

    // duplication: positional suffix of repeated formatted completions
    std::size_t dup_bad = 0;
    for (const auto& t : synthetic_targets()) {
        const auto copy = tok().encode(format_file(t.file));
        for (std::size_t budget : std::vector<std::size_t>{1, 7, copy.size() - 1, copy.size(), copy.size() + 1, 5000, 16384}) {
            ComposerSpec spec;
            spec.kind = ComposerKind::duplication;
            const auto ids = tok().encode(compose(spec, snapshot, t, {budget, reference_tokenizer()}).context);
            const std::size_t copies = budget / copy.size() + 2;
            std::vector<TokenId> repeated;
            for (std::size_t c = 0; c < copies; ++c) repeated.insert(repeated.end(), copy.begin(), copy.end());
            const std::vector<TokenId> want(repeated.end() - static_cast<std::ptrdiff_t>(budget), repeated.end());
            if (ids != want) ++dup_bad;
        }
    }
    ok = ok && dup_bad == 0;
    detail << " duplication_mismatches=" << dup_bad;
    return {ok, detail.str()};
}

// ---------------------------------------------------------------------------

std::vector<fs::path> python_corpus(std::size_t want) {
    std::vector<fs::path> all;
    for (const char* root : {"/usr/lib/python3.10", "/usr/lib/python3.11", "/usr/lib/python3"}) {
        if (!fs::exists(root)) continue;
        for (const auto& e : fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied)) {
            if (!e.is_regular_file() || e.path().extension() != ".py") continue;
            const auto s = e.path().string();
            if (s.find("/test/") != std::string::npos || s.find("/tests/") != std::string::npos) continue;
            all.push_back(e.path());
        }
        if (all.size() >= want) break;
    }
    std::sort(all.begin(), all.end());
    std::vector<fs::path> picked;
    if (all.empty()) return picked;
    const double step = all.size() > want ? static_cast<double>(all.size()) / static_cast<double>(want) : 1.0;
    for (std::size_t i = 0; i < want && static_cast<std::size_t>(i * step) < all.size(); ++i) {
        picked.push_back(all[static_cast<std::size_t>(i * step)]);
    }
    return picked;
}

Outcome pysurface_partition() {
    const auto files = python_corpus(200);
    std::size_t checked = 0, partition_bad = 0, idempotence_bad = 0, overlap_bad = 0, lines_total = 0;
    std::string bad;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        std::string content = normalize_line_endings(ss.str());
        if (!is_valid_utf8(content)) continue;
        ++checked;
        const auto lines = split_lines_keep_newline(content);
        lines_total += lines.size();

        const auto units = pysurface::lex_python(content);
        std::size_t next = 1;
        bool ok = true;
        for (const auto& u : units) {
            if (u.first_line != next || u.last_line < u.first_line) {
                ok = false;
                break;
            }
            std::string joined;
            for (std::size_t l = u.first_line; l <= u.last_line; ++l) {
                std::string_view line = lines[l - 1];
                if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
                joined += line;
                if (l < u.last_line) joined += '\n';
            }
            if (joined != u.text) {
                ok = false;
                break;
            }
            next = u.last_line + 1;
        }
        if (!ok || next != lines.size() + 1) {
            ++partition_bad;
            bad += " partition:" + path.filename().string();
        }

        const auto once = pysurface::strip_to_code(content);
        if (pysurface::strip_to_code(once) != once) {
            ++idempotence_bad;
            bad += " idempotence:" + path.filename().string();
        }

        std::set<std::size_t> code_lines;
        for (const auto& l : pysurface::code_lines(content)) {
            if (!is_blank(l.text)) code_lines.insert(l.line);
        }
        for (const auto& l : pysurface::text_chunk_lines(content)) {
            if (!is_blank(l.text) && code_lines.contains(l.line)) {
                ++overlap_bad;
                bad += " overlap:" + path.filename().string() + ":" + std::to_string(l.line);
                break;
            }
        }
    }
    if (bad.size() > 300) bad = bad.substr(0, 300) + "...";
    return {checked >= 200 && partition_bad == 0 && idempotence_bad == 0 && overlap_bad == 0,
            std::to_string(checked) + " files / " + std::to_string(lines_total) + " lines, partition failures " +
                std::to_string(partition_bad) + ", idempotence failures " + std::to_string(idempotence_bad) +
                ", overlapping files " + std::to_string(overlap_bad) + bad};
}

// ---------------------------------------------------------------------------

Outcome rope_numerics() {
    Rng rng(31337);
    auto gaussian = [&] {
        // Box-Muller over the portable uniform
        const double u1 = 1.0 - rng.unit();
        const double u2 = rng.unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    double worst_norm = 0.0, worst_shift = 0.0;
    for (double base : {rope::kDefaultBase, rope::kExtendedBase}) {
        const rope::RopeConfig cfg{base, 64};
        for (int s = 0; s < 10000; ++s) {
            std::vector<double> v(64), q(64), k(64);
            for (int i = 0; i < 64; ++i) {
                v[i] = gaussian();
                q[i] = gaussian();
                k[i] = gaussian();
            }
            const auto m = static_cast<std::int64_t>(rng.below(131072));
            const auto n = static_cast<std::int64_t>(rng.below(131072));
            const auto t = static_cast<std::int64_t>(rng.below(131072));
            const auto rv = rope::apply_rope(v, m, cfg);
            long double nv = 0, nr = 0;
            for (int i = 0; i < 64; ++i) {
                nv += static_cast<long double>(v[i]) * v[i];
                nr += static_cast<long double>(rv[i]) * rv[i];
            }
            worst_norm = std::max(worst_norm, static_cast<double>(std::fabs(std::sqrt(nr) - std::sqrt(nv))));
            const double a = rope::relative_score(q, k, m, n, cfg);
            const double b = rope::relative_score(q, k, m + t, n + t, cfg);
            worst_shift = std::max(worst_shift, std::fabs(a - b));
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "20000 samples, max norm error %.3g, max shift error %.3g", worst_norm, worst_shift);
    return {worst_norm <= 1e-12 && worst_shift <= 1e-9, buf};
}

// ---------------------------------------------------------------------------

Outcome filter_boundaries() {
    const std::int64_t y2010 = year_start_utc(2010);
    auto rec = [](std::string repo, std::string commit, std::int64_t ts, std::vector<FileEntry> files) {
        CommitRecord r;
        r.repo = std::move(repo);
        r.commit = std::move(commit);
        r.timestamp = ts;
        r.completion_files = std::move(files);
        return r;
    };
    std::vector<std::string> failures_seen;
    const FilterPolicy policy;

    // year
    {
        auto got = filter_dataset({rec("y/r", "dec31", y2010 - 1, {{"a.py", std::string(900, 'a')}}),
                                   rec("y/r", "jan01", y2010, {{"b.py", std::string(900, 'b')}})},
                                  policy);
        if (got.size() != 1 || got[0].target.commit != "jan01") failures_seen.push_back("year");
    }
    // length
    {
        auto got = filter_dataset({rec("l/r", "c", y2010, {{"a.py", std::string(799, 'a')},
                                                           {"b.py", std::string(800, 'b')},
                                                           {"c.py", std::string(25000, 'c')},
                                                           {"d.py", std::string(25001, 'd')}})},
                                  policy);
        std::vector<std::string> names;
        for (const auto& t : got) names.push_back(t.target.file.path);
        if (names != std::vector<std::string>{"b.py", "c.py"}) failures_seen.push_back("length");
    }
    // cap
    {
        std::vector<CommitRecord> recs;
        for (int i = 0; i < 1005; ++i) {
            recs.push_back(rec("cap/r", "c" + std::to_string(i), y2010 + 1000 - i,
                               {{"f" + std::to_string(i) + ".py", std::string(1000, 'x')}}));
        }
        auto got = filter_dataset(recs, policy);
        std::set<std::string> commits;
        for (const auto& t : got) commits.insert(t.target.commit);
        bool ok = got.size() == 1000;
        for (int i = 1000; i < 1005; ++i) ok = ok && !commits.contains("c" + std::to_string(i));
        if (!ok) failures_seen.push_back("cap");
    }
    // dedup
    {
        FilterPolicy early = policy;
        early.min_year = 1970;
        auto got = filter_dataset({rec("d/r", "t100", 100, {{"utils.py", std::string(900, 'a')}}),
                                   rec("d/r", "t200", 200, {{"lib/utils.py", std::string(900, 'b')}})},
                                  early);
        if (got.size() != 1 || got[0].target.commit != "t200") failures_seen.push_back("dedup");
    }
    std::string detail = "year, length, cap, dedup fixtures";
    for (const auto& f : failures_seen) detail += " FAILED:" + f;
    return {failures_seen.empty(), detail};
}

// ---------------------------------------------------------------------------

std::string json_escape_plain(const std::string& s) {
    std::string out;
    out.reserve(s.size() + s.size() / 20);
    for (char c : s) {
        if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

Outcome streaming_memory() {
    const fs::path dir = fs::current_path() / "acceptance_stream";
    fs::create_directories(dir);
    const fs::path input = dir / "corpus.jsonl";
    const fs::path output = dir / "composed.jsonl";
    const std::uintmax_t target_bytes = 1ull << 30;

    std::size_t records = 0;
    {
        std::ofstream out(input, std::ios::binary);
        Rng rng(2024);
        std::uintmax_t written = 0;
        std::vector<std::string> vocab;
        for (int i = 0; i < 4000; ++i) vocab.push_back(random_word(rng, 10));
        while (written < target_bytes) {
            std::string line = "{\"repo\":\"big/repo" + std::to_string(records % 50) + "\",\"commit\":\"c" +
                               std::to_string(records) + "\",\"timestamp\":" + std::to_string(1600000000 + records) +
                               ",\"snapshot\":[";
            const std::size_t files = 150 + rng.below(100);
            for (std::size_t f = 0; f < files; ++f) {
                std::string content;
                const std::size_t n_lines = 80 + rng.below(160);
                for (std::size_t l = 0; l < n_lines; ++l) {
                    content += "    " + vocab[rng.below(vocab.size())] + " = " + vocab[rng.below(vocab.size())] + "(" +
                               std::to_string(rng.below(1000)) + ")\n";
                }
                if (f) line += ",";
                line += "{\"path\":\"pkg/d" + std::to_string(f % 9) + "/m" + std::to_string(f) + ".py\",\"content\":\"" +
                        json_escape_plain(content) + "\"}";
            }
            std::string comp;
            for (int l = 0; l < 60; ++l) comp += vocab[rng.below(vocab.size())] + " = " + std::to_string(l) + "\n";
            line += "],\"completion_files\":[{\"path\":\"pkg/d1/new.py\",\"content\":\"" + json_escape_plain(comp) + "\"}]}\n";
            out << line;
            written += line.size();
            ++records;
        }
    }
    const auto input_size = fs::file_size(input);

    const pid_t pid = fork();
    if (pid == 0) {
        const int devnull = ::open("/dev/null", O_WRONLY);
        if (devnull >= 0) dup2(devnull, STDERR_FILENO);
        execl(REPOCOMPOSE_BIN, "repocompose", "compose", "--input", input.c_str(), "--out", output.c_str(),
              "--composer", "path_distance_py", "--max-context", "16384", "--seed", "42", "--workers", "4",
              static_cast<char*>(nullptr));
        _exit(127);
    }
    int status = 0;
    struct rusage usage {};
    wait4(pid, &status, 0, &usage);
    const bool exited = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    const double rss_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;

    std::size_t out_lines = 0;
    {
        std::ifstream in(output, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) ++out_lines;
    }
    fs::remove_all(dir);

    char buf[200];
    std::snprintf(buf, sizeof buf, "%.2f GiB input, %zu records, %zu examples, exit %s, peak RSS %.1f MB",
                  static_cast<double>(input_size) / (1ull << 30), records, out_lines, exited ? "ok" : "FAILED", rss_mb);
    return {exited && out_lines == records && input_size >= target_bytes && rss_mb <= 512.0, buf};
}

} // namespace

int main() {
    run_criterion("rcb_reference_scores", 1.0, rcb_reference_scores);
    run_criterion("packing_invariants", 30.0, packing_invariants);
    run_criterion("composer_determinism_and_saturation", 60.0, composer_determinism_and_saturation);
    run_criterion("ranking_oracle", 0, ranking_oracle);
    run_criterion("iou_oracle", 0, iou_oracle);
    run_criterion("composer_statistics", 0, composer_statistics);
    run_criterion("pysurface_partition", 0, pysurface_partition);
    run_criterion("rope_numerics", 0, rope_numerics);
    run_criterion("filter_boundaries", 0, filter_boundaries);
    run_criterion("streaming_memory", 0, streaming_memory);
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
