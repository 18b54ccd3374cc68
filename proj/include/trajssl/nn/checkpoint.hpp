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

#ifndef TRAJSSL__NN__CHECKPOINT_HPP_
#define TRAJSSL__NN__CHECKPOINT_HPP_

#include "trajssl/errors.hpp"
#include "trajssl/nn/param_store.hpp"

#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <type_traits>
#include <vector>

namespace trajssl::nn
{
enum class DType : std::uint8_t { kF32 = 0, kF64 = 1 };

template <typename S>
constexpr DType dtype_of()
{
  static_assert(std::is_same_v<S, float> || std::is_same_v<S, double>);
  return std::is_same_v<S, float> ? DType::kF32 : DType::kF64;
}

struct TensorRecord
{
  std::string name;
  DType dtype{DType::kF32};
  std::vector<std::uint64_t> dims;
  /// Values widened to double; narrowing back to the stored dtype is exact.
  std::vector<double> values;
  std::vector<double> adam_m;
  std::vector<double> adam_v;

  std::uint64_t numel() const;
};

/**
 * @brief In-memory image of a checkpoint file.
 *
 * Layout, all little-endian: "TSSL", version u32, tensor count u32, flags u8 (bit 0: AdamW
 * moments present), and when moments are present the optimizer step u64. Then per tensor: name
 * length u16, UTF-8 name, dtype u8 (0 = f32, 1 = f64), rank u8, dims as u64 each, raw values,
 * and when moments are present the first and second moment in the same dtype and shape.
 */
struct Checkpoint
{
  static constexpr std::uint32_t kVersion = 1;

  bool has_moments{false};
  std::uint64_t step{0};
  std::vector<TensorRecord> tensors;

  const TensorRecord * find(const std::string & name) const;
};

/// Throws IoError.
void write_checkpoint(const std::filesystem::path & path, const Checkpoint & ckpt);
/// Throws IoError or CheckpointMismatch on a malformed file.
Checkpoint read_checkpoint(const std::filesystem::path & path);

/// FNV-1a 64 of the file contents, as 16 hex digits.
std::string file_digest(const std::filesystem::path & path);

/**
 * @brief Appends every entry of `store` as `name_prefix + name`.
 */
template <typename S>
void append_store(Checkpoint & ckpt, const ParamStore<S> & store, const std::string & name_prefix = {})
{
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto & p = store[i];
    TensorRecord rec;
    rec.name = name_prefix + p.name;
    rec.dtype = dtype_of<S>();
    rec.dims = {static_cast<std::uint64_t>(p.value.rows()), static_cast<std::uint64_t>(p.value.cols())};
    rec.values.assign(p.value.data(), p.value.data() + p.value.size());
    if (ckpt.has_moments) {
      rec.adam_m.assign(p.adam_m.data(), p.adam_m.data() + p.adam_m.size());
      rec.adam_v.assign(p.adam_v.data(), p.adam_v.data() + p.adam_v.size());
    }
    ckpt.tensors.push_back(std::move(rec));
  }
  if (ckpt.has_moments) {
    ckpt.step = store.step();
  }
}

/**
 * @brief Loads `name_prefix + name` for every entry of `store` whose name starts with `filter`.
 *
 * Missing or shape-mismatched tensors raise CheckpointMismatch naming the tensor. Moments and the
 * step counter are restored only when `with_moments` is set and the checkpoint carries them.
 */
template <typename S>
void load_store(
  const Checkpoint & ckpt, ParamStore<S> & store, const std::string & filter = {},
  const std::string & name_prefix = {}, bool with_moments = false)
{
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto & p = store[i];
    if (!p.name.starts_with(filter)) {
      continue;
    }
    const std::string full = name_prefix + p.name;
    const TensorRecord * rec = ckpt.find(full);
    if (!rec) {
      throw CheckpointMismatch(fmt::format("checkpoint lacks tensor '{}'", full));
    }
    std::uint64_t rows = 1;
    std::uint64_t cols = 1;
    if (rec->dims.size() == 2) {
      rows = rec->dims[0];
      cols = rec->dims[1];
    } else if (rec->dims.size() == 1) {
      cols = rec->dims[0];
    } else {
      throw CheckpointMismatch(fmt::format("tensor '{}' has unsupported rank {}", full, rec->dims.size()));
    }
    if (rows != static_cast<std::uint64_t>(p.value.rows()) || cols != static_cast<std::uint64_t>(p.value.cols())) {
      throw CheckpointMismatch(fmt::format(
        "tensor '{}' has shape ({}, {}), model expects ({}, {})", full, rows, cols, p.value.rows(), p.value.cols()));
    }
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      p.value.data()[k] = static_cast<S>(rec->values[k]);
    }
    if (with_moments && ckpt.has_moments) {
      for (Eigen::Index k = 0; k < p.value.size(); ++k) {
        p.adam_m.data()[k] = static_cast<S>(rec->adam_m[k]);
        p.adam_v.data()[k] = static_cast<S>(rec->adam_v[k]);
      }
    }
  }
  if (with_moments && ckpt.has_moments) {
    store.set_step(ckpt.step);
  }
}

}  // namespace trajssl::nn

#endif  // TRAJSSL__NN__CHECKPOINT_HPP_
