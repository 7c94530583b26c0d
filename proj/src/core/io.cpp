// Copyright 2026 The PoseCore Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "posecore/io.hpp"

#include "posecore/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace posecore {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line_no) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
    fail(ErrorCode::kParse, "bad number '" + std::string(field) + "' on line " +
                                std::to_string(line_no));
  return value;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) fail(ErrorCode::kInternal, "double formatting failed");
  return std::string(buf, ptr);
}

PointSet parse_points_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    while (true) {
      const std::size_t comma = line.find(',');
      row.push_back(parse_double(line.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(ErrorCode::kParse, "inconsistent column count on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::kEmptyInput, "CSV contains no points");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return PointSet(std::move(m));
}

std::string format_points_csv(const PointSet& p) {
  std::string out;
  for (Index i = 0; i < p.size(); ++i) {
    for (Index j = 0; j < p.dim(); ++j) {
      if (j) out += ',';
      out += format_double(p.rows()(i, j));
    }
    out += '\n';
  }
  return out;
}

PointSet parse_points_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_array() || j.empty()) fail(ErrorCode::kParse, "expected a non-empty array of points");
  const std::size_t d = j.front().is_array() ? j.front().size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != d) fail(ErrorCode::kParse, "ragged point array");
    for (std::size_t k = 0; k < d; ++k) {
      if (!row[k].is_number()) fail(ErrorCode::kParse, "non-numeric coordinate");
      m(static_cast<Index>(i), static_cast<Index>(k)) = row[k].get<double>();
    }
  }
  return PointSet(std::move(m));
}

std::string format_points_json(const PointSet& p) {
  nlohmann::json j = nlohmann::json::array();
  for (Index i = 0; i < p.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index k = 0; k < p.dim(); ++k) row.push_back(p.rows()(i, k));
    j.push_back(std::move(row));
  }
  return j.dump();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

PointSet read_points(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (path.extension() == ".json") return parse_points_json(text);
  return parse_points_csv(text);
}

void write_points(const std::filesystem::path& path, const PointSet& p) {
  write_text_file(path, path.extension() == ".json" ? format_points_json(p)
                                                    : format_points_csv(p));
}

}  // namespace posecore
