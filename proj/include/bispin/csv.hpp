// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file csv.hpp
 * @brief CSV dialect and atomic artifact output.
 *
 * Comma separated, '.' decimal point, mandatory header row, numbers written
 * in scientific notation with 17 significant digits.
 */

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace bispin {

std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  std::size_t rows() const { return rows_; }
  const std::string& text() const { return text_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row

  /// Column index by name; throws DataError if missing.
  std::size_t column(const std::string& name) const;
};

/// Throws DataError with the offending line number.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<csv>");

/// Key = value report lines, in insertion order.
class Report {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, bool value);
  void add(const std::string& key, int value);
  std::string text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Collects output files and publishes them together: every file is first
/// written to a temporary sibling, then all are renamed into place. Nothing
/// becomes visible if any write fails.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  void add(const std::string& name, std::string content);
  std::vector<std::filesystem::path> commit();

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace bispin
