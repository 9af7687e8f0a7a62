#pragma once

// Canonical number formatting shared by every CSV writer in the toolkit.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gaze_affect {

inline constexpr int kCanonicalDecimals = 6;

/// Fixed-point text with `decimals` digits after the point ("-0.000000" is kept as written).
std::string format_fixed(double value, int decimals = kCanonicalDecimals);

/// The value that survives a write/read cycle through format_fixed.
double canonical(double value, int decimals = kCanonicalDecimals);

/// Strict decimal parse of the whole field; nullopt on any trailing garbage.
std::optional<double> parse_real(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

}  // namespace gaze_affect
