#pragma once

#include <charconv>
#include <string>

namespace crdsa {

/// Shortest decimal text that parses back to the same double.
inline std::string format_real(double value)
{
    char buffer[32];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return ec == std::errc{} ? std::string(buffer, end) : std::string("nan");
}

}  // namespace crdsa
