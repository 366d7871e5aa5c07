#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pam::csv {

inline constexpr std::string_view kToolVersion = "pam 0.1.0";

std::uint32_t crc32(std::string_view bytes);
std::string hex32(std::uint32_t v);

/// "# pam 0.1.0 config=<hash>"; every emitted CSV starts with this line.
std::string header_comment(std::uint32_t config_hash);
/// Parses the config hash back out of a header comment; false if absent.
bool parse_header_comment(std::string_view line, std::uint32_t& config_hash);

/// Shortest round-trip decimal representation.
std::string format(double v);

void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

/// Comma-separated, no quoting. Leading '#' lines are kept as comments.
Table parse(std::string_view text);

}  // namespace pam::csv
