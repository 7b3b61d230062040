// Copyright 2026 The fthlab Authors
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

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fthlab/core/errors.hpp"
#include "fthlab/core/signals.hpp"

namespace fthlab {

/// Shortest text that round-trips: 17 significant digits.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void ensure_parent_dir(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
}

/// Writes a header line and one comma-separated row per matrix row.
inline void write_csv(const std::filesystem::path& file,
                      const std::vector<std::string>& header,
                      const RowMatrix& rows) {
  if (static_cast<Eigen::Index>(header.size()) != rows.cols()) {
    throw ContractViolation("write_csv: header/column mismatch for " +
                            file.string());
  }
  ensure_parent_dir(file);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  for (std::size_t j = 0; j < header.size(); ++j) {
    out << (j ? "," : "") << header[j];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      out << (j ? "," : "") << format_double(rows(i, j));
    }
    out << '\n';
  }
}

/// Trajectory CSV: t, state columns, control columns, one row per node.
inline void write_trajectory_csv(const std::filesystem::path& file,
                                 const StatePath& y, const ControlSignal& u,
                                 const std::vector<std::string>& state_names,
                                 const std::vector<std::string>& control_names) {
  if (y.grid().size() != u.grid().size()) {
    throw ContractViolation("write_trajectory_csv: grid mismatch");
  }
  std::vector<std::string> header{"t"};
  header.insert(header.end(), state_names.begin(), state_names.end());
  header.insert(header.end(), control_names.begin(), control_names.end());
  RowMatrix rows(y.grid().size(), header.size());
  for (int k = 0; k < y.grid().size(); ++k) {
    rows(k, 0) = y.grid().node(k);
    rows.block(k, 1, 1, y.dim()) = y.values().row(k);
    rows.block(k, 1 + y.dim(), 1, u.channels()) = u.values().row(k);
  }
  write_csv(file, header, rows);
}

inline void write_text(const std::filesystem::path& file,
                       const std::string& text) {
  ensure_parent_dir(file);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string());
  out << text;
}

/// Column names "prefix1".."prefixN".
inline std::vector<std::string> numbered(const std::string& prefix, int count) {
  std::vector<std::string> v;
  for (int i = 1; i <= count; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}

}  // namespace fthlab
