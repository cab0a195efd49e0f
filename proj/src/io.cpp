#include "klab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace klab {

CsvWriter::CsvWriter(const std::vector<std::string>& columns) : ncols_(columns.size()) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) header_ += ',';
    header_ += columns[i];
  }
  header_ += '\n';
}

void CsvWriter::comment(const std::string& line) {
  comments_ += "# " + line + "\n";
}

void CsvWriter::row(std::initializer_list<double> values) {
  row(std::vector<double>(values));
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncols_)
    throw std::invalid_argument("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    body_ += format_sci17(values[i]);
  }
  body_ += '\n';
}

std::string CsvWriter::str() const { return comments_ + header_ + body_; }

std::string format_sci17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void ensure_directory(const std::string& path) {
  std::filesystem::create_directories(path);
}

}  // namespace klab
