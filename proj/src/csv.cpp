#include "prigp/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "prigp/error.hpp"

namespace prigp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header)
    : CsvWriter(path, std::vector<std::string>(header.begin(), header.end())) {}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
  if (!out_) throw Error("cannot open '" + path.string() + "' for writing");
  for (const auto& h : header) field(h);
  end_row();
}

void CsvWriter::separator() {
  if (in_row_ > 0) row_ += ',';
  ++in_row_;
}

CsvWriter& CsvWriter::field(std::string_view text) {
  separator();
  if (text.find_first_of(",\"\n") != std::string_view::npos) {
    row_ += '"';
    for (char c : text) {
      if (c == '"') row_ += '"';
      row_ += c;
    }
    row_ += '"';
  } else {
    row_ += text;
  }
  return *this;
}

CsvWriter& CsvWriter::field(double v) {
  separator();
  row_ += format_double(v);
  return *this;
}

CsvWriter& CsvWriter::field(long long v) {
  separator();
  row_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::field(unsigned long long v) {
  separator();
  row_ += std::to_string(v);
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) {
    // Drop the malformed row so the file stays well-formed.
    const std::size_t got = in_row_;
    row_.clear();
    in_row_ = 0;
    throw Error("CSV row in '" + path_.string() + "' has " + std::to_string(got) +
                " fields, header has " + std::to_string(columns_));
  }
  row_ += '\n';
  out_ << row_;
  row_.clear();
  in_row_ = 0;
  if (!out_) throw Error("write to '" + path_.string() + "' failed");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) table.header = split_line(line);
  while (std::getline(in, line)) {
    if (!line.empty()) table.rows.push_back(split_line(line));
  }
  return table;
}

}  // namespace prigp
