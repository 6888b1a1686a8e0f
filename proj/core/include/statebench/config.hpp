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

#ifndef STATEBENCH_CONFIG_HPP_
#define STATEBENCH_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace statebench {

// Flat `dotted.key = value` configuration. Lines starting with '#' and blank
// lines are ignored; later assignments override earlier ones.
class Config {
 public:
  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list; empty when the key is absent.
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // Throws ConfigError naming the first key not matched by `known`. A known
  // entry ending in ".*" matches any key with that prefix.
  void check_keys(const std::vector<std::string>& known) const;

  // Deterministic `key = value` lines sorted by key.
  std::vector<std::string> lines() const;
  std::string to_text() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

  // Relative paths in the file resolve against this directory.
  const std::filesystem::path& base_dir() const { return base_dir_; }
  std::filesystem::path resolve_path(const std::string& value) const;

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

}  // namespace statebench

#endif  // STATEBENCH_CONFIG_HPP_
