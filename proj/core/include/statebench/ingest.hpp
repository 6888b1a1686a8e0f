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

#ifndef STATEBENCH_INGEST_HPP_
#define STATEBENCH_INGEST_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "statebench/common.hpp"

namespace statebench {

struct Interaction {
  UserIndex user = 0;
  ItemIndex item = 0;
  double feedback = 1.0;
  Timestamp timestamp = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

// Bijection between external string ids and [0, size()).
class IdMap {
 public:
  // Returns the existing index of `external` or assigns the next one.
  std::uint32_t intern(std::string_view external);
  std::optional<std::uint32_t> find(std::string_view external) const;
  const std::string& external(std::uint32_t index) const;
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Timestamp-ordered feedback events. The id maps are shared between a log
// and every log derived from it (splits, windows, cleaned copies), so
// indices stay comparable across them.
struct InteractionLog {
  std::vector<Interaction> events;
  std::shared_ptr<const IdMap> users = std::make_shared<IdMap>();
  std::shared_ptr<const IdMap> items = std::make_shared<IdMap>();

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  std::size_t num_users() const { return users->size(); }
  std::size_t num_items() const { return items->size(); }

  // Same id maps, different events.
  InteractionLog with_events(std::vector<Interaction> new_events) const;
};

// Column selection for delimiter-separated input. A column is named by its
// header label when the file has a header, or by its 0-based position.
struct CsvSchema {
  std::string user_col = "user";
  std::string item_col = "item";
  std::string rating_col;  // empty: every event gets feedback 1.0
  std::string ts_col = "timestamp";
  char delimiter = ',';
  bool has_header = true;
};

struct SplitPlan {
  double warm_fraction = 0.5;
  double valid_fraction_of_warm = 0.1;
  std::size_t n_windows = 10;
};

struct SplitResult {
  InteractionLog warm_train;
  InteractionLog warm_valid;
  std::vector<InteractionLog> test_windows;

  // warm_train followed by warm_valid.
  InteractionLog warm() const;
};

InteractionLog load_csv(const std::filesystem::path& path,
                        const CsvSchema& schema);

// Collapses exact duplicates and removes every event of a (user, item) pair
// that carries two or more distinct feedback values.
InteractionLog clean(const InteractionLog& log);

SplitResult split(const InteractionLog& log, const SplitPlan& plan);

std::vector<InteractionLog> filter_cold_items(
    const std::vector<InteractionLog>& windows, const ItemSet& known_items);

ItemSet items_in(const InteractionLog& log);

InteractionLog concat(const InteractionLog& first, const InteractionLog& second);

// Compact columnar persistence: `<stem>.log` holds the events, and
// `<stem>.users.txt` / `<stem>.items.txt` list one external id per line in
// index order.
void save_log(const InteractionLog& log, const std::filesystem::path& stem);
InteractionLog load_log(const std::filesystem::path& stem);

}  // namespace statebench

#endif  // STATEBENCH_INGEST_HPP_
