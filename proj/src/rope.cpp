#include "repocompose/rope.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace repocompose::rope {

void validate(const RopeConfig& cfg) {
    if (cfg.head_dim == 0 || cfg.head_dim % 2 != 0) {
        throw std::invalid_argument("head_dim must be a positive even integer");
    }
    if (!(cfg.base > 1.0) || !std::isfinite(cfg.base)) {
        throw std::invalid_argument("RoPE base must be a finite number greater than 1");
    }
}

std::vector<double> rope_frequencies(const RopeConfig& cfg) {
    validate(cfg);
    const std::size_t half = cfg.head_dim / 2;
    std::vector<double> omega(half);
    const double d = static_cast<double>(cfg.head_dim);
    for (std::size_t i = 0; i < half; ++i) {
        omega[i] = std::pow(cfg.base, -2.0 * static_cast<double>(i) / d);
    }
    return omega;
}

std::vector<double> apply_rope(std::span<const double> vec, std::int64_t position, const RopeConfig& cfg) {
    if (vec.size() != cfg.head_dim) {
        throw std::invalid_argument("vector length " + std::to_string(vec.size()) +
                                    " does not match head_dim " + std::to_string(cfg.head_dim));
    }
    const auto omega = rope_frequencies(cfg);
    std::vector<double> out(vec.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
        // long double keeps the angle accurate for large positions
        const long double angle = static_cast<long double>(position) * static_cast<long double>(omega[i]);
        const double c = static_cast<double>(std::cos(angle));
        const double s = static_cast<double>(std::sin(angle));
        const double x = vec[2 * i];
        const double y = vec[2 * i + 1];
        out[2 * i] = x * c - y * s;
        out[2 * i + 1] = x * s + y * c;
    }
    return out;
}

double relative_score(std::span<const double> q, std::span<const double> k, std::int64_t m,
                      std::int64_t n, const RopeConfig& cfg) {
    const auto rq = apply_rope(q, m, cfg);
    const auto rk = apply_rope(k, n, cfg);
    double sum = 0.0;
    for (std::size_t i = 0; i < rq.size(); ++i) sum += rq[i] * rk[i];
    return sum;
}

std::string frequency_report_csv(const RopeConfig& cfg) {
    const auto omega = rope_frequencies(cfg);
    std::string out = "i,omega,wavelength\n";
    char line[128];
    for (std::size_t i = 0; i < omega.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g\n", i, omega[i],
                      2.0 * std::numbers::pi / omega[i]);
        out += line;
    }
    return out;
}

} // namespace repocompose::rope
