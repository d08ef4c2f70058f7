#pragma once

#include <string>
#include <vector>

namespace tvar {

// Minimal CSV writer.  Numeric fields are rendered with %.17g so that a
// written value round-trips to the exact double; files end with a trailing
// newline.  All write failures surface as IoError.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  void add_row_mixed(const std::vector<std::string>& values);

  std::string to_string() const;
  void write_file(const std::string& path) const;

  static std::string format_double(double value);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes "key=value" lines (one per entry, in the given order).
void write_summary(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& entries);

// Writes arbitrary text, creating or truncating the file.
void write_text_file(const std::string& path, const std::string& content);

// Reads a whole file; throws IoError if it cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace tvar
