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

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "statebench/results.hpp"

namespace statebench {
namespace {

constexpr std::array<const char*, 8> kPalette{
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string stamp_value(const std::vector<std::string>& stamp,
                        const std::string& key) {
  const std::string prefix = key + " = ";
  for (const auto& line : stamp) {
    if (line.starts_with(prefix)) return line.substr(prefix.size());
  }
  return {};
}

}  // namespace

std::string series_label(const std::filesystem::path& windows_file,
                         const std::vector<std::string>& stamp) {
  const std::string model = stamp_value(stamp, "mf.model");
  const std::string state = stamp_value(stamp, "state.kind");
  if (!model.empty() && !state.empty()) return model + "-" + state;
  std::string dir = windows_file.parent_path().filename().string();
  const auto dash = dir.rfind('-');
  if (dash != std::string::npos && dir.find('-') != dash) {
    return dir.substr(0, dash);
  }
  return dir.empty() ? windows_file.stem().string() : dir;
}

std::string render_svg(const std::vector<PlotSeries>& series,
                       const std::string& title) {
  constexpr double width = 720, height = 420;
  constexpr double left = 70, right = 190, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::size_t n = 0;
  double ymax = 0.0;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) ymax = std::max(ymax, v);
  }
  const double ytop = ymax > 0.0 ? ymax * 1.1 : 1.0;
  auto px = [&](std::size_t i) {
    return n <= 1 ? left + plot_w / 2
                  : left + plot_w * static_cast<double>(i) /
                               static_cast<double>(n - 1);
  };
  auto py = [&](double v) { return top + plot_h * (1.0 - v / ytop); };

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
     << height << "\" data-ymin=\"0\" data-ymax=\"" << std::setprecision(8)
     << ytop << std::setprecision(2) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" "
        "font-size=\"15\">"
     << xml_escape(title) << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
     << left + plot_w << "\" y2=\"" << top + plot_h
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
     << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = ytop * t / 4.0;
    os << "<text x=\"" << left - 8 << "\" y=\"" << py(v) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << std::setprecision(4) << v << std::setprecision(2) << "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    os << "<text x=\"" << px(i) << "\" y=\"" << top + plot_h + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << i + 1 << "</text>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\">window</text>\n";
  os << "<text x=\"16\" y=\"" << top + plot_h / 2
     << "\" transform=\"rotate(-90 16 " << top + plot_h / 2
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"12\">cumulative NDCG@20</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kPalette[s % kPalette.size()];
    os << "<polyline class=\"series\" fill=\"none\" stroke=\"" << colour
       << "\" stroke-width=\"2\" data-label=\"" << xml_escape(series[s].label)
       << "\" points=\"";
    for (std::size_t i = 0; i < series[s].values.size(); ++i) {
      os << (i ? " " : "") << px(i) << ',' << py(series[s].values[i]);
    }
    os << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(s) + 8;
    os << "<line x1=\"" << left + plot_w + 14 << "\" y1=\"" << ly << "\" x2=\""
       << left + plot_w + 34 << "\" y2=\"" << ly << "\" stroke=\"" << colour
       << "\" stroke-width=\"2\"/>\n";
    os << "<text class=\"legend-entry\" x=\"" << left + plot_w + 40
       << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"11\">"
       << xml_escape(series[s].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const std::vector<std::filesystem::path>& windows_files,
               const std::filesystem::path& out) {
  if (windows_files.empty()) throw ArgumentError("plot needs at least one input");
  std::vector<PlotSeries> series;
  std::string dataset;
  std::size_t rows = 0;
  for (const auto& file : windows_files) {
    std::vector<std::string> stamp;
    const auto windows = read_windows_csv(file, &stamp);
    if (windows.empty()) {
      throw IngestError(file.string() + ": no window rows");
    }
    if (series.empty()) {
      rows = windows.size();
    } else if (windows.size() != rows) {
      throw IngestError(file.string() + ": " + std::to_string(windows.size()) +
                        " window rows, expected " + std::to_string(rows));
    }
    if (dataset.empty()) dataset = stamp_value(stamp, "dataset.name");
    PlotSeries s;
    s.label = series_label(file, stamp);
    for (const auto& w : windows) s.values.push_back(w.ndcg_cumulative);
    series.push_back(std::move(s));
  }
  const std::string svg = render_svg(
      series, dataset.empty() ? "Cumulative NDCG@20" : dataset);
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw Error("cannot open for writing: " + out.string());
  f << svg;
  if (!f) throw Error("write failed: " + out.string());
}

}  // namespace statebench
