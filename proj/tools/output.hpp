#pragma once

// CSV tables and run manifests.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cumdamage::cli {

/// 17 significant digits, so values round-trip through text exactly.
std::string format_number(double value);
/// Inactive components print as "inf".
std::string format_optional(const std::optional<double>& value);
std::string format_optional(const std::optional<std::uint32_t>& value);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::uint64_t fnv1a(const std::string& text);

struct RunManifest {
  std::string command;
  std::string label;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::string version;
  std::string timestamp;

  std::string json() const;
};

/// UTC, ISO 8601.
std::string utc_timestamp();

/// Writes `text` to `dir/name`, creating `dir` if needed.
void write_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace cumdamage::cli
