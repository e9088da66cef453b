#pragma once

// Internal helpers shared by the core translation units.

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace botflow::detail {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
std::string to_lower(std::string_view s);
bool icontains(std::string_view haystack, std::string_view lowered_needle);

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return value;
}

// "%.9g" rendering used by every CSV/report writer.
std::string fmt9(double v);
// Shortest round-trip rendering.
std::string fmt_exact(double v);

// Writes `content` to `path` via a temporary sibling and rename(2).
void atomic_write(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

}  // namespace botflow::detail
