/*
 * Copyright 2026 The fedspike Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fedspike/error.h"
#include "fedspike/spiked_model.h"

namespace fedspike {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double ParseCell(std::string_view cell, std::size_t line_no) {
  cell = Trim(cell);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(),
                                   value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw InvalidArgument("CSV line " + std::to_string(line_no) +
                          ": cannot parse '" + std::string(cell) +
                          "' as a number");
  }
  return value;
}

}  // namespace

Dataset ReadDatasetCsv(const std::filesystem::path& path, bool header) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open CSV file " + path.string());

  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) continue;
    if (Trim(line).empty()) continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      std::size_t comma = rest.find(',');
      values.push_back(ParseCell(rest.substr(0, comma), line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw DimensionError("CSV line " + std::to_string(line_no) + " has " +
                           std::to_string(count) + " columns, expected " +
                           std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw InvalidArgument("CSV file " + path.string() + " is empty");

  // Rows are observations; the dataset stores them as columns.
  Eigen::MatrixXd samples(cols, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      samples(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
          values[i * cols + k];
    }
  }
  return Dataset(std::move(samples));
}

void WriteDatasetCsv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write CSV file " + path.string());
  out.precision(17);
  const Eigen::MatrixXd& x = data.samples();
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
      if (k > 0) out << ',';
      out << x(k, i);
    }
    out << '\n';
  }
}

}  // namespace fedspike
