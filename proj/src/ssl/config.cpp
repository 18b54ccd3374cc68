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

#include "trajssl/ssl/config.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>

namespace trajssl::ssl
{
std::string_view to_string(TrlSource source) noexcept
{
  return source == TrlSource::kProjector ? "projector" : "encoder";
}

TrlSource trl_source_from_string(std::string_view name)
{
  if (name == "encoder") {
    return TrlSource::kEncoder;
  }
  if (name == "projector") {
    return TrlSource::kProjector;
  }
  throw ParseError(fmt::format("unknown trl source '{}'", name));
}

void SslConfig::validate() const
{
  if (!(tau > 0.0)) {
    throw ConfigError(fmt::format("ssl.tau: must be > 0, got {}", tau));
  }
  if (!(lambda >= 0.0)) {
    throw ConfigError(fmt::format("ssl.lambda: must be >= 0, got {}", lambda));
  }
  if (!use_tcl && !use_trl) {
    throw ConfigError("ssl: at least one of use_tcl and use_trl must be set");
  }
  if (head_hidden < 1) {
    throw ConfigError(fmt::format("ssl.head_hidden: must be >= 1, got {}", head_hidden));
  }
}

void PretrainConfig::validate() const
{
  if (epochs < 0) {
    throw ConfigError(fmt::format("pretrain.epochs: must be >= 0, got {}", epochs));
  }
  if (batch_size < 2) {
    throw ConfigError(fmt::format("pretrain.batch_size: must be >= 2, got {}", batch_size));
  }
  if (!(ema_m0 >= 0.0 && ema_m0 <= 1.0)) {
    throw ConfigError(fmt::format("pretrain.ema_m0: must lie in [0, 1], got {}", ema_m0));
  }
  if (ema_every_n_steps < 1) {
    throw ConfigError(fmt::format("pretrain.ema_every_n_steps: must be >= 1, got {}", ema_every_n_steps));
  }
  if (checkpoint_every_epochs < 0) {
    throw ConfigError("pretrain.checkpoint_every_epochs: must be >= 0");
  }
  if (!(optim.lr >= 0.0) || !(optim.weight_decay >= 0.0) || !(optim.eps > 0.0) || !(optim.beta1 >= 0.0 && optim.beta1 < 1.0) ||
      !(optim.beta2 >= 0.0 && optim.beta2 < 1.0)) {
    throw ConfigError("optim: lr, weight_decay >= 0, eps > 0 and betas in [0, 1) required");
  }
}

}  // namespace trajssl::ssl
