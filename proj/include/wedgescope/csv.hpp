#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace wedge {

/// Locale-independent shortest-roundtrip-ish formatting with 9 significant digits.
std::string format_number(double value);

/// Minimal CSV writer. Every file starts with a header row; numeric cells go
/// through format_number so output is byte-identical across runs and locales.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(std::size_t value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(const char* text) { return cell(std::string_view(text)); }
  CsvWriter& cell(bool value) { return cell(std::string_view(value ? "true" : "false")); }
  void end_row();

 private:
  void open(const std::filesystem::path& path);
  void sep();

  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace wedge
