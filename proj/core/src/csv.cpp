#include "pam/csv.hpp"

#include <boost/crc.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pam/errors.hpp"

namespace pam::csv {

std::uint32_t crc32(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::string header_comment(std::uint32_t config_hash) {
  return "# " + std::string(kToolVersion) + " config=" + hex32(config_hash);
}

bool parse_header_comment(std::string_view line, std::uint32_t& config_hash) {
  const auto pos = line.find("config=");
  if (line.empty() || line.front() != '#' || pos == std::string_view::npos) return false;
  const std::string_view hex = line.substr(pos + 7, 8);
  const auto res = std::from_chars(hex.data(), hex.data() + hex.size(), config_hash, 16);
  return res.ec == std::errc() && hex.size() == 8;
}

std::string format(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("cannot write " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error("missing CSV column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Table parse(std::string_view text) {
  Table t;
  bool have_header = false;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.comments.emplace_back(line);
    } else if (!have_header) {
      t.header = split(line);
      have_header = true;
    } else {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

}  // namespace pam::csv
