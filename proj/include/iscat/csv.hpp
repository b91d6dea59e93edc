#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace iscat {

/// Column-major table of doubles with a header row; values round-trip exactly
/// (17 significant digits).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
  std::size_t cols() const { return columns.size(); }
};

/// Writes atomically (temp file + rename).
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

void write_text_atomic(const std::filesystem::path& path, const std::string& contents);

/// FNV-1a checksum of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);
std::uint64_t fnv1a_bytes(const void* data, std::size_t size);

std::string format_double(double v);

}  // namespace iscat
