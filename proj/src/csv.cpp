// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#include "bispin/csv.hpp"

#include "bispin/error.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bispin {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k) text_ += ',';
    text_ += header[k];
  }
  text_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& values) {
  if (values.size() != columns_) throw InvalidArgument("CsvWriter: row width does not match header");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) text_ += ',';
    text_ += format_double(values[k]);
  }
  text_ += '\n';
  ++rows_;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw DataError("CSV: missing required column '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    auto fail = [&](const std::string& what) {
      std::ostringstream msg;
      msg << source << ": line " << number << ": " << what;
      throw DataError(msg.str());
    };
    const auto cells = split(line);
    if (!have_header) {
      table.header = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      fail("expected " + std::to_string(table.header.size()) + " fields, found " +
           std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size() || errno == ERANGE) {
        fail("'" + c + "' is not a number");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
    table.line_numbers.push_back(number);
  }
  if (!have_header) throw DataError(source + ": empty file (header row required)");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

void Report::add(const std::string& key, const std::string& value) { entries_.emplace_back(key, value); }
void Report::add(const std::string& key, double value) { add(key, format_double(value)); }
void Report::add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
void Report::add(const std::string& key, int value) { add(key, std::to_string(value)); }

std::string Report::text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

void ArtifactWriter::add(const std::string& name, std::string content) {
  files_.emplace_back(name, std::move(content));
}

std::vector<std::filesystem::path> ArtifactWriter::commit() {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw DataError("cannot create output directory " + dir_.string() + ": " + ec.message());

  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [name, content] : files_) {
    const fs::path tmp = dir_ / (name + ".tmp");
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw DataError("failed writing " + tmp.string());
    }
  }
  std::vector<fs::path> written;
  for (std::size_t k = 0; k < files_.size(); ++k) {
    const fs::path dest = dir_ / files_[k].first;
    fs::rename(temps[k], dest, ec);
    if (ec) {
      cleanup();
      throw DataError("failed publishing " + dest.string() + ": " + ec.message());
    }
    written.push_back(dest);
  }
  files_.clear();
  return written;
}

}  // namespace bispin
