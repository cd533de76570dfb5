#include "wedgescope/csv.hpp"

#include "wedgescope/common.hpp"

#include <charconv>
#include <cmath>

namespace wedge {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header) {
  open(path);
  for (auto h : header) cell(h);
  end_row();
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
  open(path);
  for (const auto& h : header) cell(std::string_view(h));
  end_row();
}

void CsvWriter::open(const std::filesystem::path& path) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
}

void CsvWriter::sep() {
  if (in_row_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::cell(double value) {
  sep();
  out_ << format_number(value);
  return *this;
}

CsvWriter& CsvWriter::cell(long long value) {
  sep();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  sep();
  out_ << text;
  return *this;
}

void CsvWriter::end_row() {
  if (columns_ == 0) columns_ = in_row_;
  out_ << '\n';
  in_row_ = 0;
  if (!out_) throw IoError("write failure");
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << contents;
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace wedge
