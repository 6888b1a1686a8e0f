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

#include "statebench/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "statebench/binary_io.hpp"

namespace statebench {

std::uint32_t IdMap::intern(std::string_view external) {
  auto it = index_.find(std::string(external));
  if (it != index_.end()) return it->second;
  const auto next = static_cast<std::uint32_t>(ids_.size());
  ids_.emplace_back(external);
  index_.emplace(ids_.back(), next);
  return next;
}

std::optional<std::uint32_t> IdMap::find(std::string_view external) const {
  auto it = index_.find(std::string(external));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& IdMap::external(std::uint32_t index) const {
  if (index >= ids_.size()) {
    throw LookupError("id index " + std::to_string(index) + " out of range");
  }
  return ids_[index];
}

InteractionLog InteractionLog::with_events(
    std::vector<Interaction> new_events) const {
  InteractionLog out;
  out.events = std::move(new_events);
  out.users = users;
  out.items = items;
  return out;
}

InteractionLog SplitResult::warm() const {
  return concat(warm_train, warm_valid);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r' || s.front() == '\n')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one record. Double-quoted fields may contain the delimiter; a
// doubled quote inside them is a literal quote.
std::vector<std::string> split_fields(std::string_view line, char delim,
                                      std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"' && trim(current).empty()) {
      current.clear();
      quoted = true;
      field_was_quoted = true;
    } else if (c == delim) {
      fields.emplace_back(field_was_quoted ? current
                                           : std::string(trim(current)));
      current.clear();
      field_was_quoted = false;
    } else {
      current.push_back(c);
    }
  }
  if (quoted) throw IngestError("unterminated quoted field", line_no);
  fields.emplace_back(field_was_quoted ? current : std::string(trim(current)));
  return fields;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::size_t resolve_column(const std::string& name,
                           const std::vector<std::string>* header) {
  if (header != nullptr) {
    auto it = std::find(header->begin(), header->end(), name);
    if (it != header->end()) {
      return static_cast<std::size_t>(it - header->begin());
    }
  }
  if (auto idx = parse_index(name)) return *idx;
  throw SchemaError("missing column '" + name + "'");
}

double parse_feedback(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw IngestError("bad feedback value '" + std::string(s) + "'", line_no);
  }
  return v;
}

Timestamp parse_timestamp(std::string_view s, std::size_t line_no) {
  Timestamp v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  double d = 0.0;
  auto [dptr, dec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (dec == std::errc() && dptr == s.data() + s.size() && std::isfinite(d)) {
    return static_cast<Timestamp>(std::floor(d));
  }
  throw IngestError("bad timestamp '" + std::string(s) + "'", line_no);
}

}  // namespace

InteractionLog load_csv(const std::filesystem::path& path,
                        const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());

  auto users = std::make_shared<IdMap>();
  auto items = std::make_shared<IdMap>();
  std::vector<Interaction> events;

  std::string line;
  std::size_t line_no = 0;
  std::optional<std::vector<std::string>> header;
  bool columns_resolved = false;
  std::size_t user_col = 0, item_col = 0, ts_col = 0;
  std::optional<std::size_t> rating_col;
  std::size_t needed = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line, schema.delimiter, line_no);
    if (schema.has_header && !header) {
      header = std::move(fields);
      continue;
    }
    if (!columns_resolved) {
      const auto* h = header ? &*header : nullptr;
      user_col = resolve_column(schema.user_col, h);
      item_col = resolve_column(schema.item_col, h);
      ts_col = resolve_column(schema.ts_col, h);
      if (!schema.rating_col.empty()) {
        rating_col = resolve_column(schema.rating_col, h);
      }
      needed = std::max({user_col, item_col, ts_col, rating_col.value_or(0)}) + 1;
      if (h != nullptr && needed > h->size()) {
        throw SchemaError("column index beyond header width");
      }
      columns_resolved = true;
    }
    if (fields.size() < needed) {
      throw IngestError("expected at least " + std::to_string(needed) +
                            " fields, got " + std::to_string(fields.size()),
                        line_no);
    }
    if (fields[user_col].empty() || fields[item_col].empty()) {
      throw IngestError("empty user or item id", line_no);
    }
    Interaction ev;
    ev.user = users->intern(fields[user_col]);
    ev.item = items->intern(fields[item_col]);
    ev.feedback = rating_col ? parse_feedback(fields[*rating_col], line_no) : 1.0;
    ev.timestamp = parse_timestamp(fields[ts_col], line_no);
    events.push_back(ev);
  }
  if (in.bad()) throw IngestError("read failure on " + path.string());

  std::stable_sort(events.begin(), events.end(),
                   [](const Interaction& a, const Interaction& b) {
                     return a.timestamp < b.timestamp;
                   });

  InteractionLog log;
  log.events = std::move(events);
  log.users = std::move(users);
  log.items = std::move(items);
  return log;
}

InteractionLog clean(const InteractionLog& log) {
  using PairKey = std::pair<UserIndex, ItemIndex>;
  std::map<PairKey, std::set<double>> feedback_by_pair;
  for (const auto& ev : log.events) {
    feedback_by_pair[{ev.user, ev.item}].insert(ev.feedback);
  }

  using EventKey = std::tuple<UserIndex, ItemIndex, Timestamp, double>;
  std::set<EventKey> seen;
  std::vector<Interaction> kept;
  kept.reserve(log.events.size());
  for (const auto& ev : log.events) {
    if (feedback_by_pair[{ev.user, ev.item}].size() > 1) continue;
    if (!seen.insert({ev.user, ev.item, ev.timestamp, ev.feedback}).second) {
      continue;
    }
    kept.push_back(ev);
  }
  return log.with_events(std::move(kept));
}

SplitResult split(const InteractionLog& log, const SplitPlan& plan) {
  if (plan.n_windows == 0) throw SizingError("n_windows must be positive");
  if (!(plan.warm_fraction > 0.0 && plan.warm_fraction < 1.0)) {
    throw SizingError("warm_fraction must lie in (0, 1)");
  }
  if (!(plan.valid_fraction_of_warm >= 0.0 &&
        plan.valid_fraction_of_warm < 1.0)) {
    throw SizingError("valid_fraction_of_warm must lie in [0, 1)");
  }
  const std::size_t n = log.size();
  if (n < plan.n_windows * 2) {
    throw SizingError("log of " + std::to_string(n) +
                      " events is too small for " +
                      std::to_string(plan.n_windows) + " windows");
  }
  const auto warm = static_cast<std::size_t>(
      std::floor(plan.warm_fraction * static_cast<double>(n)));
  const auto valid = static_cast<std::size_t>(
      std::floor(plan.valid_fraction_of_warm * static_cast<double>(warm)));
  const std::size_t test = n - warm;
  if (test < plan.n_windows) {
    throw SizingError("test half of " + std::to_string(test) +
                      " events cannot fill " + std::to_string(plan.n_windows) +
                      " windows");
  }

  const auto begin = log.events.begin();
  auto slice = [&](std::size_t from, std::size_t to) {
    return log.with_events(std::vector<Interaction>(
        begin + static_cast<std::ptrdiff_t>(from),
        begin + static_cast<std::ptrdiff_t>(to)));
  };

  SplitResult out;
  out.warm_train = slice(0, warm - valid);
  out.warm_valid = slice(warm - valid, warm);
  const std::size_t base = test / plan.n_windows;
  const std::size_t extra = test % plan.n_windows;
  std::size_t pos = warm;
  for (std::size_t w = 0; w < plan.n_windows; ++w) {
    const std::size_t len = base + (w < extra ? 1 : 0);
    out.test_windows.push_back(slice(pos, pos + len));
    pos += len;
  }
  return out;
}

std::vector<InteractionLog> filter_cold_items(
    const std::vector<InteractionLog>& windows, const ItemSet& known_items) {
  std::vector<InteractionLog> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    std::vector<Interaction> kept;
    kept.reserve(w.size());
    for (const auto& ev : w.events) {
      if (known_items.contains(ev.item)) kept.push_back(ev);
    }
    out.push_back(w.with_events(std::move(kept)));
  }
  return out;
}

ItemSet items_in(const InteractionLog& log) {
  ItemSet s;
  for (const auto& ev : log.events) s.insert(ev.item);
  return s;
}

InteractionLog concat(const InteractionLog& first,
                      const InteractionLog& second) {
  if (first.users != second.users || first.items != second.items) {
    throw ArgumentError("cannot concatenate logs with different id maps");
  }
  std::vector<Interaction> events;
  events.reserve(first.size() + second.size());
  events.insert(events.end(), first.events.begin(), first.events.end());
  events.insert(events.end(), second.events.begin(), second.events.end());
  return first.with_events(std::move(events));
}

namespace {

constexpr std::string_view kLogMagic = "SBLOG001";

std::filesystem::path with_suffix(const std::filesystem::path& stem,
                                  const std::string& suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

void write_ids(const IdMap& ids, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  for (const auto& id : ids.ids()) out << id << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

std::shared_ptr<IdMap> read_ids(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  auto ids = std::make_shared<IdMap>();
  std::string line;
  while (std::getline(in, line)) ids->intern(line);
  return ids;
}

}  // namespace

void save_log(const InteractionLog& log, const std::filesystem::path& stem) {
  BinaryWriter w(with_suffix(stem, ".log"));
  w.magic(kLogMagic);
  w.u64(log.size());
  w.u64(log.num_users());
  w.u64(log.num_items());
  for (const auto& ev : log.events) w.u32(ev.user);
  for (const auto& ev : log.events) w.u32(ev.item);
  for (const auto& ev : log.events) w.f64(ev.feedback);
  for (const auto& ev : log.events) w.i64(ev.timestamp);
  w.finish();
  write_ids(*log.users, with_suffix(stem, ".users.txt"));
  write_ids(*log.items, with_suffix(stem, ".items.txt"));
}

InteractionLog load_log(const std::filesystem::path& stem) {
  BinaryReader r(with_suffix(stem, ".log"));
  r.expect_magic(kLogMagic);
  const auto n = r.u64();
  const auto n_users = r.u64();
  const auto n_items = r.u64();
  InteractionLog log;
  log.users = read_ids(with_suffix(stem, ".users.txt"));
  log.items = read_ids(with_suffix(stem, ".items.txt"));
  if (log.num_users() != n_users || log.num_items() != n_items) {
    throw Error("id map files disagree with " + stem.string() + ".log");
  }
  log.events.resize(n);
  for (auto& ev : log.events) ev.user = r.u32();
  for (auto& ev : log.events) ev.item = r.u32();
  for (auto& ev : log.events) ev.feedback = r.f64();
  for (auto& ev : log.events) ev.timestamp = r.i64();
  for (const auto& ev : log.events) {
    if (ev.user >= n_users || ev.item >= n_items) {
      throw Error("event index out of range in " + stem.string() + ".log");
    }
  }
  return log;
}

}  // namespace statebench
