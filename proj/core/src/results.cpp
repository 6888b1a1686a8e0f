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

#include "statebench/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <zlib.h>

namespace statebench {
namespace {

std::vector<std::string> parse_csv_line(const std::string& line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (quoted) throw IngestError("unterminated quoted field", line_no);
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IngestError("cannot parse " + what + " value '" + s + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IngestError("cannot parse " + what + " value '" + s + "'");
  }
  return v;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

const std::vector<std::string>& ledger_columns() {
  static const std::vector<std::string> cols{
      "dataset",     "embedding",   "state",     "policy",  "h",
      "policy_param", "mf_d",       "mf_lr",     "mf_reg",  "mf_epochs",
      "mf_conf_weight", "mf_seed",  "bandit_seed", "lambda", "events",
      "windows",     "ndcg",        "ndcg_series", "config"};
  return cols;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw SchemaError("missing column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line.size() > 2 ? line.substr(2) : std::string());
      continue;
    }
    auto fields = parse_csv_line(line, line_no);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw IngestError("expected " + std::to_string(table.header.size()) +
                            " fields, got " + std::to_string(fields.size()),
                        line_no);
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

stats::ResultTable build_result_table(const CsvTable& ledger,
                                      const TreatmentSpec& spec) {
  std::vector<std::string> block_cols = spec.block_columns;
  if (block_cols.empty()) {
    for (const auto& c : identity_columns()) {
      if (c != spec.treatment_column) block_cols.push_back(c);
    }
  }
  const std::size_t tcol = ledger.column(spec.treatment_column);
  const std::size_t vcol = ledger.column(spec.value_column);
  std::vector<std::size_t> bcols;
  for (const auto& c : block_cols) bcols.push_back(ledger.column(c));

  std::vector<std::string> treatments = spec.treatment_order;
  std::vector<std::string> blocks;
  std::map<std::string, std::size_t> block_index;
  std::map<std::pair<std::string, std::string>, double> cells;

  for (const auto& row : ledger.rows) {
    std::string block;
    for (std::size_t i = 0; i < bcols.size(); ++i) {
      if (i) block += '/';
      block += row[bcols[i]];
    }
    const std::string& treatment = row[tcol];
    if (spec.treatment_order.empty() &&
        std::find(treatments.begin(), treatments.end(), treatment) ==
            treatments.end()) {
      treatments.push_back(treatment);
    }
    if (!block_index.contains(block)) {
      block_index.emplace(block, blocks.size());
      blocks.push_back(block);
    }
    const double value = parse_double(row[vcol], spec.value_column);
    if (!cells.emplace(std::make_pair(block, treatment), value).second) {
      throw SchemaError("duplicate cell (block '" + block + "', treatment '" +
                        treatment + "')");
    }
  }

  stats::ResultTable table;
  table.blocks = blocks;
  table.treatments = treatments;
  table.scores.resize(static_cast<Eigen::Index>(blocks.size()),
                      static_cast<Eigen::Index>(treatments.size()));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t t = 0; t < treatments.size(); ++t) {
      auto it = cells.find({blocks[b], treatments[t]});
      if (it == cells.end()) {
        throw SchemaError("missing cell (block '" + blocks[b] +
                          "', treatment '" + treatments[t] + "')");
      }
      table.scores(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t)) =
          it->second;
    }
  }
  if (!spec.treatment_order.empty()) {
    for (const auto& [key, value] : cells) {
      if (std::find(treatments.begin(), treatments.end(), key.second) ==
          treatments.end()) {
        throw SchemaError("unexpected treatment '" + key.second + "'");
      }
    }
  }
  return table;
}

void write_windows_csv(const std::vector<WindowMetrics>& windows,
                       const std::vector<std::string>& stamp,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (const auto& line : stamp) out << "# " << line << '\n';
  out << "window,events,ndcg_mean,ndcg_cumulative\n";
  for (const auto& w : windows) {
    out << w.window << ',' << w.events << ',' << format_double(w.ndcg_mean)
        << ',' << format_double(w.ndcg_cumulative) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<WindowMetrics> read_windows_csv(const std::filesystem::path& path,
                                            std::vector<std::string>* stamp) {
  const CsvTable t = read_csv_table(path);
  const std::size_t cw = t.column("window");
  const std::size_t ce = t.column("events");
  const std::size_t cm = t.column("ndcg_mean");
  const std::size_t cc = t.column("ndcg_cumulative");
  std::vector<WindowMetrics> out;
  for (const auto& row : t.rows) {
    out.push_back({parse_size(row[cw], "window"), parse_size(row[ce], "events"),
                   parse_double(row[cm], "ndcg_mean"),
                   parse_double(row[cc], "ndcg_cumulative")});
  }
  if (stamp != nullptr) *stamp = t.comments;
  return out;
}

EventLogWriter::EventLogWriter(const std::filesystem::path& path,
                               const std::vector<std::string>& stamp,
                               const IdMap& users, const IdMap& items)
    : users_(users), items_(items), path_(path) {
  file_ = gzopen(path.string().c_str(), "wb6");
  if (file_ == nullptr) throw Error("cannot open for writing: " + path.string());
  std::string head;
  for (const auto& line : stamp) head += "# " + line + '\n';
  head += "event,user,item,rank,ndcg\n";
  put(head);
}

EventLogWriter::~EventLogWriter() {
  if (file_ != nullptr) gzclose(static_cast<gzFile>(file_));
}

void EventLogWriter::put(const std::string& text) {
  const int n = gzwrite(static_cast<gzFile>(file_), text.data(),
                        static_cast<unsigned>(text.size()));
  if (n != static_cast<int>(text.size())) {
    throw Error("write failed: " + path_.string());
  }
}

void EventLogWriter::write(const EventRecord& rec) {
  std::string line = std::to_string(rec.index);
  line += ',';
  line += csv_escape(users_.external(rec.user));
  line += ',';
  line += csv_escape(items_.external(rec.item));
  line += ',';
  line += rec.rank ? std::to_string(*rec.rank) : std::string("miss");
  line += ',';
  line += format_double(rec.ndcg);
  line += '\n';
  put(line);
}

void EventLogWriter::close() {
  if (file_ == nullptr) return;
  const int rc = gzclose(static_cast<gzFile>(file_));
  file_ = nullptr;
  if (rc != Z_OK) throw Error("close failed: " + path_.string());
}

std::vector<EventRecord> read_event_log(const std::filesystem::path& path,
                                        const IdMap& users, const IdMap& items) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw IngestError("cannot open " + path.string());
  std::vector<EventRecord> out;
  std::string line;
  std::vector<char> buf(1 << 16);
  bool header_seen = false;
  std::size_t line_no = 0;
  while (gzgets(f, buf.data(), static_cast<int>(buf.size())) != nullptr) {
    line.assign(buf.data());
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
      line.pop_back();
    }
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto fields = parse_csv_line(line, line_no);
    if (fields.size() != 5) {
      gzclose(f);
      throw IngestError("expected 5 fields", line_no);
    }
    EventRecord rec;
    rec.index = parse_size(fields[0], "event");
    const auto u = users.find(fields[1]);
    const auto i = items.find(fields[2]);
    if (!u || !i) {
      gzclose(f);
      throw IngestError("unknown user or item id", line_no);
    }
    rec.user = *u;
    rec.item = *i;
    if (fields[3] != "miss") rec.rank = parse_size(fields[3], "rank");
    rec.ndcg = parse_double(fields[4], "ndcg");
    out.push_back(rec);
  }
  gzclose(f);
  return out;
}

void append_ledger_row(const std::filesystem::path& ledger,
                       const RunSummary& summary,
                       const std::vector<std::string>& config_lines) {
  const bool fresh = !std::filesystem::exists(ledger) ||
                     std::filesystem::file_size(ledger) == 0;
  if (!fresh) {
    const CsvTable existing = read_csv_table(ledger);
    if (existing.header != ledger_columns()) {
      throw SchemaError("ledger " + ledger.string() +
                        " has an unexpected header");
    }
  }
  std::ofstream out(ledger, std::ios::app);
  if (!out) throw Error("cannot open for writing: " + ledger.string());
  if (fresh) {
    for (std::size_t i = 0; i < ledger_columns().size(); ++i) {
      out << (i ? "," : "") << ledger_columns()[i];
    }
    out << '\n';
  }
  auto tuned = [&](const std::string& key) {
    auto it = summary.tuned.find(key);
    return it == summary.tuned.end() ? std::string() : it->second;
  };
  std::string series;
  for (std::size_t i = 0; i < summary.windows.size(); ++i) {
    if (i) series += ';';
    series += format_double(summary.windows[i].ndcg_cumulative);
  }
  std::string config;
  for (std::size_t i = 0; i < config_lines.size(); ++i) {
    if (i) config += "; ";
    config += config_lines[i];
  }
  std::vector<std::string> fields{summary.dataset, summary.embedding,
                                  summary.state, summary.policy};
  for (const char* key : {"h", "policy_param", "mf_d", "mf_lr", "mf_reg",
                          "mf_epochs", "mf_conf_weight", "mf_seed",
                          "bandit_seed", "lambda"}) {
    fields.push_back(tuned(key));
  }
  fields.push_back(std::to_string(summary.events));
  fields.push_back(std::to_string(summary.windows.size()));
  fields.push_back(format_double(summary.ndcg_final));
  fields.push_back(series);
  fields.push_back(config);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    out << (i ? "," : "") << csv_escape(fields[i]);
  }
  out << '\n';
  if (!out) throw Error("write failed: " + ledger.string());
}

}  // namespace statebench
