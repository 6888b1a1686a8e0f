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

#include "statebench/plot.hpp"

#include <gtest/gtest.h>

#include <regex>

#include "statebench/results.hpp"
#include "test_util.hpp"

namespace statebench {
namespace {

using testing::TempDir;

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

double ymax_of(const std::string& svg) {
  std::smatch m;
  EXPECT_TRUE(std::regex_search(svg, m, std::regex("data-ymax=\"([^\"]+)\"")));
  return std::stod(m[1]);
}

std::vector<WindowMetrics> ramp(double scale, std::size_t n = 10) {
  std::vector<WindowMetrics> w;
  for (std::size_t i = 1; i <= n; ++i) {
    w.push_back({i, 10, scale * double(i), scale * double(i)});
  }
  return w;
}

TEST(RenderSvg, SixSeriesSixPolylinesSixLegendEntries) {
  std::vector<PlotSeries> series;
  for (const char* emb : {"als", "bpr"}) {
    for (const char* st : {"user", "item_mean", "item_concat"}) {
      series.push_back({std::string(emb) + "-" + st, std::vector<double>(10, 0.01)});
    }
  }
  const auto svg = render_svg(series, "ml-100k");
  EXPECT_EQ(count(svg, "<polyline class=\"series\""), 6u);
  EXPECT_EQ(count(svg, "class=\"legend-entry\""), 6u);
  EXPECT_NE(svg.find(">als-item_concat</text>"), std::string::npos);
  EXPECT_NE(svg.find(">bpr-user</text>"), std::string::npos);
}

TEST(RenderSvg, SingleSeriesAxisSpansTenPercentAboveTheMax) {
  const auto svg = render_svg({{"als-user", {0.01, 0.04, 0.02}}}, "t");
  EXPECT_EQ(count(svg, "<polyline"), 1u);
  EXPECT_NEAR(ymax_of(svg), 0.044, 1e-9);
  EXPECT_NE(svg.find("data-ymin=\"0\""), std::string::npos);
}

TEST(RenderSvg, AllZeroSeriesStillHasAnAxis) {
  EXPECT_EQ(ymax_of(render_svg({{"a", {0, 0}}}, "t")), 1.0);
}

TEST(RenderSvg, EscapesMarkup) {
  const auto svg = render_svg({{"a<b", {1}}}, "x & y");
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_NE(svg.find("x &amp; y"), std::string::npos);
}

TEST(EmitPlot, EmptyInputListWritesNothing) {
  TempDir dir;
  EXPECT_THROW(emit_plot({}, dir / "out.svg"), ArgumentError);
  EXPECT_FALSE(std::filesystem::exists(dir / "out.svg"));
}

TEST(EmitPlot, RowCountMismatchIsAnInputError) {
  TempDir dir;
  std::filesystem::create_directories(dir / "als-user-linucb");
  std::filesystem::create_directories(dir / "als-item_mean-linucb");
  write_windows_csv(ramp(0.01), {}, dir / "als-user-linucb" / "windows.csv");
  write_windows_csv(ramp(0.01, 9), {}, dir / "als-item_mean-linucb" / "windows.csv");
  EXPECT_THROW(emit_plot({dir / "als-user-linucb" / "windows.csv",
                          dir / "als-item_mean-linucb" / "windows.csv"},
                         dir / "out.svg"),
               IngestError);
  EXPECT_FALSE(std::filesystem::exists(dir / "out.svg"));
}

TEST(EmitPlot, LabelsComeFromStampOrDirectory) {
  TempDir dir;
  std::filesystem::create_directories(dir / "bpr-item_concat-lints");
  std::filesystem::create_directories(dir / "x");
  write_windows_csv(ramp(0.002), {}, dir / "bpr-item_concat-lints" / "windows.csv");
  write_windows_csv(ramp(0.001),
                    {"dataset.name = ml-100k", "mf.model = als", "state.kind = user"},
                    dir / "x" / "windows.csv");
  emit_plot({dir / "bpr-item_concat-lints" / "windows.csv", dir / "x" / "windows.csv"},
            dir / "fig.svg");
  const auto svg = testing::read_file(dir / "fig.svg");
  EXPECT_NE(svg.find("data-label=\"bpr-item_concat\""), std::string::npos);
  EXPECT_NE(svg.find("data-label=\"als-user\""), std::string::npos);
  EXPECT_NEAR(ymax_of(svg), 0.022, 1e-9);
}

}  // namespace
}  // namespace statebench
