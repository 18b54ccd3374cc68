// Copyright 2026 The trajssl Authors
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

#include "trajssl/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace trajssl::nn
{
namespace
{
static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'T', 'S', 'S', 'L'};

class Writer
{
public:
  explicit Writer(std::vector<char> & buf) : buf_(buf) {}

  template <typename T>
  void put(T value)
  {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf_.insert(buf_.end(), bytes, bytes + sizeof(T));
  }

  void put_bytes(const char * data, std::size_t n) { buf_.insert(buf_.end(), data, data + n); }

  void put_values(const std::vector<double> & values, DType dtype)
  {
    for (const double v : values) {
      if (dtype == DType::kF32) {
        put(static_cast<float>(v));
      } else {
        put(v);
      }
    }
  }

private:
  std::vector<char> & buf_;
};

class Reader
{
public:
  Reader(const std::vector<char> & buf, const std::string & origin) : buf_(buf), origin_(origin) {}

  template <typename T>
  T get()
  {
    need(sizeof(T));
    T value;
    std::memcpy(&value, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string(std::size_t n)
  {
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  std::vector<double> get_values(std::uint64_t n, DType dtype)
  {
    std::vector<double> out(n);
    for (auto & v : out) {
      v = dtype == DType::kF32 ? static_cast<double>(get<float>()) : get<double>();
    }
    return out;
  }

  bool done() const { return pos_ == buf_.size(); }

private:
  void need(std::size_t n) const
  {
    if (pos_ + n > buf_.size()) {
      throw CheckpointMismatch(fmt::format("checkpoint '{}' is truncated", origin_));
    }
  }

  const std::vector<char> & buf_;
  const std::string & origin_;
  std::size_t pos_{0};
};

std::vector<char> slurp(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::uint64_t TensorRecord::numel() const
{
  std::uint64_t n = 1;
  for (const auto d : dims) {
    n *= d;
  }
  return n;
}

const TensorRecord * Checkpoint::find(const std::string & name) const
{
  for (const auto & t : tensors) {
    if (t.name == name) {
      return &t;
    }
  }
  return nullptr;
}

void write_checkpoint(const std::filesystem::path & path, const Checkpoint & ckpt)
{
  std::vector<char> buf;
  Writer w(buf);
  w.put_bytes(kMagic.data(), kMagic.size());
  w.put<std::uint32_t>(Checkpoint::kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
  w.put<std::uint8_t>(ckpt.has_moments ? 1 : 0);
  if (ckpt.has_moments) {
    w.put<std::uint64_t>(ckpt.step);
  }
  for (const auto & t : ckpt.tensors) {
    if (t.name.size() > UINT16_MAX || t.dims.size() > UINT8_MAX || t.values.size() != t.numel()) {
      throw IoError(fmt::format("tensor '{}' cannot be encoded", t.name));
    }
    w.put<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
    w.put_bytes(t.name.data(), t.name.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.dtype));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(t.dims.size()));
    for (const auto d : t.dims) {
      w.put<std::uint64_t>(d);
    }
    w.put_values(t.values, t.dtype);
    if (ckpt.has_moments) {
      if (t.adam_m.size() != t.numel() || t.adam_v.size() != t.numel()) {
        throw IoError(fmt::format("tensor '{}' lacks optimizer moments", t.name));
      }
      w.put_values(t.adam_m, t.dtype);
      w.put_values(t.adam_v, t.dtype);
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw IoError(fmt::format("write to '{}' failed", path.string()));
  }
}

Checkpoint read_checkpoint(const std::filesystem::path & path)
{
  const std::vector<char> buf = slurp(path);
  const std::string origin = path.string();
  Reader r(buf, origin);
  if (r.get_string(4) != std::string(kMagic.data(), kMagic.size())) {
    throw CheckpointMismatch(fmt::format("'{}' is not a checkpoint (bad magic)", origin));
  }
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw CheckpointMismatch(fmt::format("'{}' has unsupported version {}", origin, version));
  }
  Checkpoint ckpt;
  const auto count = r.get<std::uint32_t>();
  ckpt.has_moments = (r.get<std::uint8_t>() & 1U) != 0;
  if (ckpt.has_moments) {
    ckpt.step = r.get<std::uint64_t>();
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord t;
    t.name = r.get_string(r.get<std::uint16_t>());
    const auto dtype = r.get<std::uint8_t>();
    if (dtype > 1) {
      throw CheckpointMismatch(fmt::format("tensor '{}' has unknown dtype {}", t.name, dtype));
    }
    t.dtype = static_cast<DType>(dtype);
    const auto rank = r.get<std::uint8_t>();
    for (std::uint8_t d = 0; d < rank; ++d) {
      t.dims.push_back(r.get<std::uint64_t>());
    }
    t.values = r.get_values(t.numel(), t.dtype);
    if (ckpt.has_moments) {
      t.adam_m = r.get_values(t.numel(), t.dtype);
      t.adam_v = r.get_values(t.numel(), t.dtype);
    }
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.done()) {
    throw CheckpointMismatch(fmt::format("'{}' has trailing bytes", origin));
  }
  return ckpt;
}

std::string file_digest(const std::filesystem::path & path)
{
  const std::vector<char> buf = slurp(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : buf) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace trajssl::nn
