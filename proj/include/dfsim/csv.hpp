#pragma once

// CSV emission with a commented-header manifest.  Every numeric cell is
// serialized with 17 significant digits (round-trip exact for doubles);
// the data section (all non-# lines) is checksummed so outputs can be
// compared across runs without the timestamp line getting in the way.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dfsim/version.hpp"

namespace dfsim {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

inline std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct CsvDocument {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;
  std::optional<std::uint64_t> seed;
  std::string header;                   // column names
  std::vector<std::string> data_rows;   // pre-rendered, no newlines
  std::vector<std::string> footer;      // extra trailing comment lines
};

/// Writes manifest + data + footer; LF endings.  Returns the checksum of
/// the data section (header row plus data rows).
inline std::uint64_t write_csv(std::ostream& os, const CsvDocument& doc) {
  std::string data = doc.header;
  data.push_back('\n');
  for (const auto& row : doc.data_rows) {
    data += row;
    data.push_back('\n');
  }
  const std::uint64_t checksum = fnv1a64(data);

  os << "# dfsim " << DFSIM_VERSION << "\n";
  os << "# command: " << doc.command << "\n";
  os << "# params:";
  for (const auto& [k, v] : doc.params) os << ' ' << k << '=' << v;
  os << "\n";
  if (doc.seed) os << "# seed: " << *doc.seed << "\n";
  os << "# timestamp: " << utc_timestamp() << "\n";
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(checksum));
  os << "# checksum: fnv1a64:" << hex << "\n";
  os << data;
  for (const auto& line : doc.footer) os << "# " << line << "\n";
  return checksum;
}

}  // namespace dfsim
