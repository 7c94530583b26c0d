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

// PointSet text formats: CSV (one marker per line, no header) and JSON
// (array of arrays).

#ifndef POSECORE_IO_HPP
#define POSECORE_IO_HPP

#include "posecore/geometry.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace posecore {

PointSet parse_points_csv(std::string_view text);
std::string format_points_csv(const PointSet& p);

PointSet parse_points_json(std::string_view text);
std::string format_points_json(const PointSet& p);

/// Reads JSON when the extension is ".json", CSV otherwise.
PointSet read_points(const std::filesystem::path& path);
void write_points(const std::filesystem::path& path, const PointSet& p);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

}  // namespace posecore

#endif  // POSECORE_IO_HPP
