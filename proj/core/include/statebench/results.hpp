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

#ifndef STATEBENCH_RESULTS_HPP_
#define STATEBENCH_RESULTS_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "statebench/eval.hpp"
#include "statebench/stats.hpp"

namespace statebench {

// Header-addressed CSV rows. Lines starting with '#' are stamp comments and
// are collected separately.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;

  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);
std::string csv_escape(const std::string& field);

// Identity columns of a ledger row; every other column is a measurement.
inline const std::vector<std::string>& identity_columns() {
  static const std::vector<std::string> cols{"dataset", "embedding", "state",
                                             "policy"};
  return cols;
}

struct TreatmentSpec {
  std::string treatment_column = "state";
  std::string value_column = "ndcg";
  // Empty: identity_columns() minus the treatment column.
  std::vector<std::string> block_columns;
  // Empty: treatments in order of first appearance.
  std::vector<std::string> treatment_order;
};

// Pivots a long-format ledger into blocks x treatments. Every block must
// carry exactly one value per treatment.
stats::ResultTable build_result_table(const CsvTable& ledger,
                                      const TreatmentSpec& spec);

struct RunSummary {
  std::string dataset;
  std::string embedding;
  std::string state;
  std::string policy;
  std::map<std::string, std::string> tuned;  // resolved hyperparameters
  double ndcg_final = 0.0;
  std::vector<WindowMetrics> windows;
  double wall_seconds = 0.0;
  std::uint64_t events = 0;
};

void write_windows_csv(const std::vector<WindowMetrics>& windows,
                       const std::vector<std::string>& stamp,
                       const std::filesystem::path& path);
std::vector<WindowMetrics> read_windows_csv(const std::filesystem::path& path,
                                            std::vector<std::string>* stamp = nullptr);

// Gzip-compressed per-event log (index, user, item, rank, ndcg); external
// ids are written for user and item.
class EventLogWriter {
 public:
  EventLogWriter(const std::filesystem::path& path,
                 const std::vector<std::string>& stamp, const IdMap& users,
                 const IdMap& items);
  ~EventLogWriter();
  EventLogWriter(const EventLogWriter&) = delete;
  EventLogWriter& operator=(const EventLogWriter&) = delete;

  void write(const EventRecord& rec);
  void close();

 private:
  void put(const std::string& text);

  void* file_ = nullptr;
  const IdMap& users_;
  const IdMap& items_;
  std::filesystem::path path_;
};

std::vector<EventRecord> read_event_log(const std::filesystem::path& path,
                                        const IdMap& users, const IdMap& items);

// Appends one row to `<out>/summary.csv`, writing the header when the file is
// new. `config_text` is the resolved configuration of the run.
void append_ledger_row(const std::filesystem::path& ledger,
                       const RunSummary& summary,
                       const std::vector<std::string>& config_lines);

}  // namespace statebench

#endif  // STATEBENCH_RESULTS_HPP_
