#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace repocompose::rope {

inline constexpr double kDefaultBase = 10000.0;
inline constexpr double kExtendedBase = 500000.0;

struct RopeConfig {
    double base = kDefaultBase;
    std::size_t head_dim = 64;
};

/// Throws std::invalid_argument unless head_dim is even and positive and base > 1.
void validate(const RopeConfig& cfg);

/// omega_i = base^(-2i / head_dim) for i in [0, head_dim / 2).
std::vector<double> rope_frequencies(const RopeConfig& cfg);

/// Rotates each pair (v[2i], v[2i+1]) by position * omega_i.
std::vector<double> apply_rope(std::span<const double> vec, std::int64_t position, const RopeConfig& cfg);

/// <R_m q, R_n k>; depends on m and n only through m - n.
double relative_score(std::span<const double> q, std::span<const double> k, std::int64_t m,
                      std::int64_t n, const RopeConfig& cfg);

/// CSV with header `i,omega,wavelength`, wavelength = 2*pi / omega.
std::string frequency_report_csv(const RopeConfig& cfg);

} // namespace repocompose::rope
