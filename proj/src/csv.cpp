#include "iscat/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace iscat {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_text_atomic: cannot open " + tmp.string());
    out << contents;
  }
  std::filesystem::rename(tmp, path);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (table.header.size() != table.columns.size())
    throw std::invalid_argument("write_csv: header/column mismatch");
  for (const auto& col : table.columns)
    if (col.size() != table.rows()) throw std::invalid_argument("write_csv: ragged columns");

  std::ostringstream out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out << ',';
    out << table.header[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      if (c) out << ',';
      out << format_double(table.columns[c][r]);
    }
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  table.columns.resize(table.header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= table.columns.size()) throw std::runtime_error("read_csv: extra column");
      table.columns[c++].push_back(std::stod(cell));
    }
    if (c != table.columns.size()) throw std::runtime_error("read_csv: short row");
  }
  return table;
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file_checksum: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a_bytes(bytes.data(), bytes.size())));
  return buf;
}

}  // namespace iscat
