// Copyright 2026 The Statebench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STATEBENCH_PLOT_HPP_
#define STATEBENCH_PLOT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "statebench/eval.hpp"

namespace statebench {

struct PlotSeries {
  std::string label;  // e.g. "als-item_concat"
  std::vector<double> values;
};

// Line chart of cumulative NDCG per window, one polyline per series. The
// y axis spans [0, 1.1 * max].
std::string render_svg(const std::vector<PlotSeries>& series,
                       const std::string& title);

// Series label for a windows.csv file: `<embedding>-<state>` taken from its
// stamp lines, or from the `<embedding>-<state>-<policy>` run directory name.
std::string series_label(const std::filesystem::path& windows_file,
                         const std::vector<std::string>& stamp);

// Reads every windows.csv, checks that all have the same number of rows, and
// writes one SVG chart to `out`. Nothing is written on error.
void emit_plot(const std::vector<std::filesystem::path>& windows_files,
               const std::filesystem::path& out);

}  // namespace statebench

#endif  // STATEBENCH_PLOT_HPP_
