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

#include "statebench/binary_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>

#include "statebench/common.hpp"

namespace statebench {
namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &v, sizeof(T));
    std::reverse(bytes.begin(), bytes.end());
    std::memcpy(&v, bytes.data(), sizeof(T));
    return v;
  }
}

}  // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw Error("cannot open for writing: " + path.string());
}

void BinaryWriter::raw(const void* data, std::size_t size) {
  out_.write(static_cast<const char*>(data),
             static_cast<std::streamsize>(size));
  if (!out_) throw Error("write failed: " + path_.string());
}

void BinaryWriter::magic(std::string_view tag) { raw(tag.data(), tag.size()); }

void BinaryWriter::u32(std::uint32_t v) {
  v = to_little(v);
  raw(&v, sizeof v);
}

void BinaryWriter::u64(std::uint64_t v) {
  v = to_little(v);
  raw(&v, sizeof v);
}

void BinaryWriter::i64(std::int64_t v) {
  v = to_little(v);
  raw(&v, sizeof v);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::f64s(std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    raw(values.data(), values.size_bytes());
  } else {
    for (double v : values) f64(v);
  }
}

void BinaryWriter::finish() {
  out_.flush();
  if (!out_) throw Error("flush failed: " + path_.string());
  out_.close();
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw Error("cannot open for reading: " + path.string());
}

void BinaryReader::raw(void* data, std::size_t size) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (static_cast<std::size_t>(in_.gcount()) != size) {
    throw Error("truncated file: " + path_.string());
  }
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  raw(got.data(), got.size());
  if (got != tag) {
    throw Error("bad file header in " + path_.string() + ": expected '" +
                std::string(tag) + "'");
  }
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t v;
  raw(&v, sizeof v);
  return to_little(v);
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v;
  raw(&v, sizeof v);
  return to_little(v);
}

std::int64_t BinaryReader::i64() {
  std::int64_t v;
  raw(&v, sizeof v);
  return to_little(v);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

void BinaryReader::f64s(std::span<double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    raw(values.data(), values.size_bytes());
  } else {
    for (double& v : values) v = f64();
  }
}

bool BinaryReader::at_end() {
  return in_.peek() == std::char_traits<char>::eof();
}

}  // namespace statebench
