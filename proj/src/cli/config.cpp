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

#include "trajssl/cli/config.hpp"

#include "trajssl/errors.hpp"

#include <fmt/format.h>

#include <fstream>

namespace trajssl::cli
{
using nlohmann::json;

std::string_view to_string(Precision p) noexcept
{
  return p == Precision::kF64 ? "f64" : "f32";
}

json to_json(const RunConfig & c)
{
  json j;
  j["seed"] = c.seed;
  j["precision"] = std::string(to_string(c.precision));
  j["standard"] = {
    {"sample_rate_hz", c.standard.sample_rate_hz},
    {"T_h", c.standard.T_h},
    {"T_f", c.standard.T_f},
    {"map_resolution", c.standard.map_resolution},
  };
  j["data"] = {
    {"pretrain_banks", c.data.pretrain_banks},
    {"finetune_banks", c.data.finetune_banks},
    {"eval_banks", c.data.eval_banks},
  };
  j["encoder"] = {
    {"embed_dim", c.encoder.embed_dim},
    {"hidden_dim", c.encoder.hidden_dim},
    {"k_map", c.encoder.k_map},
    {"attention_radius", c.encoder.attention_radius},
  };
  j["ssl"] = {
    {"tau", c.ssl.tau},
    {"lambda", c.ssl.lambda},
    {"recon_target", std::string(ssl::to_string(c.ssl.recon_target))},
    {"trl_source", std::string(ssl::to_string(c.ssl.trl_source))},
    {"use_tcl", c.ssl.use_tcl},
    {"use_trl", c.ssl.use_trl},
    {"head_hidden", c.ssl.head_hidden},
  };
  j["optim"] = {
    {"lr", c.optim.lr},
    {"weight_decay", c.optim.weight_decay},
    {"beta1", c.optim.beta1},
    {"beta2", c.optim.beta2},
    {"eps", c.optim.eps},
  };
  j["pretrain"] = {
    {"epochs", c.pretrain.epochs},
    {"batch_size", c.pretrain.batch_size},
    {"ema_m0", c.pretrain.ema_m0},
    {"ema_every_n_steps", c.pretrain.ema_every_n_steps},
    {"checkpoint_every_epochs", c.pretrain.checkpoint_every_epochs},
  };
  j["finetune"] = {
    {"epochs", c.finetune.epochs},
    {"batch_size", c.finetune.batch_size},
    {"modes", c.finetune.modes},
    {"head_hidden", c.finetune.head_hidden},
  };
  j["eval"] = {
    {"miss_threshold", c.eval.metrics.miss_threshold},
    {"min_ade_from_best_ade", c.eval.metrics.min_ade_from_best_ade},
    {"batch_size", c.eval.batch_size},
  };
  return j;
}

namespace
{
bool same_kind(const json & def, const json & v)
{
  if (def.is_number_float()) {
    return v.is_number();
  }
  if (def.is_number_unsigned()) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  }
  if (def.is_number_integer()) {
    return v.is_number_integer();
  }
  return def.type() == v.type();
}

void overlay(json & base, const json & over, const std::string & path)
{
  if (!over.is_object()) {
    throw ConfigError(fmt::format("{}: expected an object", path.empty() ? "<root>" : path));
  }
  for (auto it = over.begin(); it != over.end(); ++it) {
    const std::string field = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) {
      throw ConfigError(fmt::format("{}: unknown field", field));
    }
    json & slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), field);
      continue;
    }
    if (!same_kind(slot, it.value())) {
      throw ConfigError(fmt::format("{}: expected {}, got {}", field, slot.type_name(), it.value().type_name()));
    }
    if (slot.is_array()) {
      for (std::size_t i = 0; i < it.value().size(); ++i) {
        if (!it.value()[i].is_string()) {
          throw ConfigError(fmt::format("{}[{}]: expected string", field, i));
        }
      }
    }
    slot = it.value();
  }
}

template <typename T>
T field(const json & j, const char * section, const char * key)
{
  return j.at(section).at(key).get<T>();
}

template <typename F>
auto parse_enum(const std::string & path, F && parse)
{
  try {
    return parse();
  } catch (const ParseError & e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}
}  // namespace

RunConfig config_from_json(const json & overrides)
{
  json merged = to_json(RunConfig{});
  overlay(merged, overrides, "");

  RunConfig c;
  c.seed = merged.at("seed").get<std::uint64_t>();
  const auto precision = merged.at("precision").get<std::string>();
  if (precision == "f32") {
    c.precision = Precision::kF32;
  } else if (precision == "f64") {
    c.precision = Precision::kF64;
  } else {
    throw ConfigError(fmt::format("precision: expected \"f32\" or \"f64\", got \"{}\"", precision));
  }
  c.standard.sample_rate_hz = field<double>(merged, "standard", "sample_rate_hz");
  c.standard.T_h = field<int>(merged, "standard", "T_h");
  c.standard.T_f = field<int>(merged, "standard", "T_f");
  c.standard.map_resolution = field<double>(merged, "standard", "map_resolution");
  c.data.pretrain_banks = field<std::vector<std::string>>(merged, "data", "pretrain_banks");
  c.data.finetune_banks = field<std::vector<std::string>>(merged, "data", "finetune_banks");
  c.data.eval_banks = field<std::vector<std::string>>(merged, "data", "eval_banks");
  c.encoder.embed_dim = field<int>(merged, "encoder", "embed_dim");
  c.encoder.hidden_dim = field<int>(merged, "encoder", "hidden_dim");
  c.encoder.k_map = field<int>(merged, "encoder", "k_map");
  c.encoder.attention_radius = field<double>(merged, "encoder", "attention_radius");
  c.ssl.tau = field<double>(merged, "ssl", "tau");
  c.ssl.lambda = field<double>(merged, "ssl", "lambda");
  c.ssl.recon_target = parse_enum("ssl.recon_target", [&] {
    return ssl::recon_target_from_string(field<std::string>(merged, "ssl", "recon_target"));
  });
  c.ssl.trl_source = parse_enum("ssl.trl_source", [&] {
    return ssl::trl_source_from_string(field<std::string>(merged, "ssl", "trl_source"));
  });
  c.ssl.use_tcl = field<bool>(merged, "ssl", "use_tcl");
  c.ssl.use_trl = field<bool>(merged, "ssl", "use_trl");
  c.ssl.head_hidden = field<int>(merged, "ssl", "head_hidden");
  c.optim.lr = field<double>(merged, "optim", "lr");
  c.optim.weight_decay = field<double>(merged, "optim", "weight_decay");
  c.optim.beta1 = field<double>(merged, "optim", "beta1");
  c.optim.beta2 = field<double>(merged, "optim", "beta2");
  c.optim.eps = field<double>(merged, "optim", "eps");
  c.pretrain.epochs = field<int>(merged, "pretrain", "epochs");
  c.pretrain.batch_size = field<std::size_t>(merged, "pretrain", "batch_size");
  c.pretrain.ema_m0 = field<double>(merged, "pretrain", "ema_m0");
  c.pretrain.ema_every_n_steps = field<int>(merged, "pretrain", "ema_every_n_steps");
  c.pretrain.checkpoint_every_epochs = field<int>(merged, "pretrain", "checkpoint_every_epochs");
  c.pretrain.optim = c.optim;
  c.finetune.epochs = field<int>(merged, "finetune", "epochs");
  c.finetune.batch_size = field<std::size_t>(merged, "finetune", "batch_size");
  c.finetune.modes = field<int>(merged, "finetune", "modes");
  c.finetune.head_hidden = field<int>(merged, "finetune", "head_hidden");
  c.finetune.optim = c.optim;
  c.eval.metrics.miss_threshold = field<double>(merged, "eval", "miss_threshold");
  c.eval.metrics.min_ade_from_best_ade = field<bool>(merged, "eval", "min_ade_from_best_ade");
  c.eval.batch_size = field<std::size_t>(merged, "eval", "batch_size");
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path & path)
{
  if (path.empty()) {
    return config_from_json(json::object());
  }
  std::ifstream in(path);
  if (!in) {
    throw IoError(fmt::format("cannot open config '{}'", path.string()));
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error & e) {
    throw ConfigError(fmt::format("<root>: malformed JSON in '{}': {}", path.string(), e.what()));
  }
  return config_from_json(j);
}

void validate(const RunConfig & c)
{
  const auto wrap = [](const char * section, auto && fn) {
    try {
      fn();
    } catch (const ConfigError &) {
      throw;
    } catch (const Error & e) {
      throw ConfigError(fmt::format("{}: {}", section, e.what()));
    }
  };
  wrap("standard", [&] { c.standard.validate(); });
  wrap("encoder", [&] { c.encoder.validate(); });
  c.ssl.validate();
  c.pretrain.validate();
  c.finetune.validate();
  if (!(c.eval.metrics.miss_threshold >= 0.0)) {
    throw ConfigError("eval.miss_threshold: must be >= 0");
  }
  if (c.eval.batch_size < 1) {
    throw ConfigError("eval.batch_size: must be >= 1");
  }
}

std::string canonical_json(const RunConfig & cfg) { return to_json(cfg).dump(); }

std::string config_hash(const RunConfig & cfg)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : canonical_json(cfg)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace trajssl::cli
