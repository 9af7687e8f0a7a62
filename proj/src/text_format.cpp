#include "gaze_affect/text_format.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace gaze_affect {

std::string format_fixed(double value, int decimals)
{
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_fixed: value does not fit");
    }
    return std::string(buf, end);
}

double canonical(double value, int decimals)
{
    return *parse_real(format_fixed(value, decimals));
}

std::optional<double> parse_real(std::string_view text)
{
    if (text.empty()) {
        return std::nullopt;
    }
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(out)) {
        return std::nullopt;
    }
    return out;
}

std::optional<long long> parse_integer(std::string_view text)
{
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return out;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace gaze_affect
