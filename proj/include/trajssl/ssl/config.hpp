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

#ifndef TRAJSSL__SSL__CONFIG_HPP_
#define TRAJSSL__SSL__CONFIG_HPP_

#include "trajssl/nn/optim.hpp"
#include "trajssl/ssl/recon_target.hpp"

#include <cstddef>
#include <string_view>

namespace trajssl::ssl
{
/// Which embedding feeds the trajectory decoder.
enum class TrlSource { kEncoder, kProjector };

std::string_view to_string(TrlSource source) noexcept;
/// "encoder" or "projector"; throws ParseError.
TrlSource trl_source_from_string(std::string_view name);

struct SslConfig
{
  double tau{0.1};
  double lambda{1.0};
  ReconTarget recon_target{ReconTarget::kOtherWindow};
  TrlSource trl_source{TrlSource::kEncoder};
  bool use_tcl{true};
  bool use_trl{true};
  int head_hidden{64};

  /// Throws ConfigError.
  void validate() const;
};

struct PretrainConfig
{
  int epochs{20};
  std::size_t batch_size{32};
  double ema_m0{0.996};
  int ema_every_n_steps{1};
  /// 0 disables intermediate checkpoints.
  int checkpoint_every_epochs{0};
  nn::AdamWConfig optim;

  /// Throws ConfigError.
  void validate() const;
};

}  // namespace trajssl::ssl

#endif  // TRAJSSL__SSL__CONFIG_HPP_
