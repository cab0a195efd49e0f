#ifndef KLAB_IO_HPP
#define KLAB_IO_HPP

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace klab {

/// CSV accumulator: header row, a comment line carrying the config hash,
/// values in scientific notation with 17 significant digits.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& columns);
  void comment(const std::string& line);  // emitted as "# line" before the data
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  std::string str() const;

 private:
  std::string header_;
  std::string comments_;
  std::string body_;
  std::size_t ncols_;
};

std::string format_sci17(double x);

/// FNV-1a 64-bit over the canonical config text; identifies runs in outputs.
std::uint64_t fnv1a64(const std::string& text);
std::string hash_hex(std::uint64_t h);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
void ensure_directory(const std::string& path);

}  // namespace klab

#endif  // KLAB_IO_HPP
