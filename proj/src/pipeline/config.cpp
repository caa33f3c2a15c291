// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/pipeline/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace shufflepose::pipeline {

void TrainConfig::validate() const {
  if (base_lr <= 0.0) throw ConfigError("base_lr must be positive");
  if (decay_factor <= 0.0 || decay_factor > 1.0) {
    throw ConfigError("decay_factor must lie in (0, 1]");
  }
  if (decay_epochs.empty()) throw ConfigError("decay_epochs must not be empty");
  for (std::size_t i = 0; i < decay_epochs.size(); ++i) {
    // Default boundaries rescale with total_epochs, so the in-range check
    // only applies to explicitly configured ones.
    if (decay_epochs[i] <= 0 || (decay_epochs_set && decay_epochs[i] >= total_epochs)) {
      throw ConfigError("decay_epochs entries must lie strictly inside (0, total_epochs)");
    }
    if (i > 0 && decay_epochs[i] <= decay_epochs[i - 1]) {
      throw ConfigError("decay_epochs must be strictly increasing");
    }
  }
  if (total_epochs < 1) throw ConfigError("total_epochs must be >= 1");
  if (rotation_max_deg < 0.0) throw ConfigError("rotation_max_deg must be >= 0");
  if (scale_min <= 0.0 || scale_max < scale_min) {
    throw ConfigError("scale_min/scale_max must satisfy 0 < scale_min <= scale_max");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (dataset_size < 1) throw ConfigError("dataset_size must be >= 1");
  if (val_size < 1) throw ConfigError("val_size must be >= 1");
  if (sigma <= 0.0) throw ConfigError("sigma must be positive");
}

void EvalConfig::validate() const {
  if (oks_scale <= 0.0) throw ConfigError("oks_scale must be positive");
  if (oks_preset != "uniform" && oks_preset != "coco") {
    throw ConfigError("oks_preset must be 'uniform' or 'coco'");
  }
  if (oks_uniform_k <= 0.0) throw ConfigError("oks_uniform_k must be positive");
}

namespace {

Index parse_i64(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  Index out = 0;
  try {
    out = std::stoll(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
  if (pos != value.size()) {
    throw ConfigError("config key '" + key + "': trailing characters in '" + value + "'");
  }
  return out;
}

Scalar parse_f64(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  Scalar out = 0;
  try {
    out = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
  if (pos != value.size()) {
    throw ConfigError("config key '" + key + "': trailing characters in '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<Index> parse_i64_list(const std::string& key, const std::string& value) {
  std::vector<Index> out;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) {
      throw ConfigError("config key '" + key + "': empty list entry in '" + value + "'");
    }
    out.push_back(parse_i64(key, item.substr(b, e - b + 1)));
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': expected a comma-separated list");
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config parse_config_text(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string line;
  Index lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    }

    if (key == "base_channels") {
      cfg.model.base_channels = parse_i64(key, value);
    } else if (key == "blocks_per_stage") {
      cfg.model.blocks_per_stage = parse_i64(key, value);
    } else if (key == "num_keypoints") {
      cfg.model.num_keypoints = parse_i64(key, value);
    } else if (key == "groups") {
      cfg.model.groups = parse_i64(key, value);
    } else if (key == "variant") {
      cfg.model.variant = attention::parse_variant(value);
    } else if (key == "ohkm_k") {
      cfg.model.ohkm_k = parse_i64(key, value);
    } else if (key == "input_h") {
      cfg.model.input_h = parse_i64(key, value);
    } else if (key == "input_w") {
      cfg.model.input_w = parse_i64(key, value);
    } else if (key == "use_csm") {
      cfg.model.use_csm = parse_bool(key, value);
    } else if (key == "csm_reduce") {
      cfg.model.csm_reduce = parse_bool(key, value);
    } else if (key == "base_lr") {
      cfg.train.base_lr = parse_f64(key, value);
    } else if (key == "decay_factor") {
      cfg.train.decay_factor = parse_f64(key, value);
    } else if (key == "decay_epochs") {
      cfg.train.decay_epochs = parse_i64_list(key, value);
      cfg.train.decay_epochs_set = true;
    } else if (key == "total_epochs") {
      cfg.train.total_epochs = parse_i64(key, value);
    } else if (key == "rotation_max_deg") {
      cfg.train.rotation_max_deg = parse_f64(key, value);
    } else if (key == "scale_min") {
      cfg.train.scale_min = parse_f64(key, value);
    } else if (key == "scale_max") {
      cfg.train.scale_max = parse_f64(key, value);
    } else if (key == "batch_size") {
      cfg.train.batch_size = parse_i64(key, value);
    } else if (key == "seed") {
      cfg.train.seed = static_cast<std::uint64_t>(parse_i64(key, value));
    } else if (key == "augment") {
      cfg.train.augment = parse_bool(key, value);
    } else if (key == "dataset_size") {
      cfg.train.dataset_size = parse_i64(key, value);
    } else if (key == "val_size") {
      cfg.train.val_size = parse_i64(key, value);
    } else if (key == "sigma") {
      cfg.train.sigma = parse_f64(key, value);
    } else if (key == "flip_eval") {
      cfg.eval.flip = parse_bool(key, value);
    } else if (key == "decode_neighborhood") {
      cfg.eval.decode_neighborhood = parse_bool(key, value);
    } else if (key == "oks_scale") {
      cfg.eval.oks_scale = parse_f64(key, value);
    } else if (key == "oks_preset") {
      if (value != "uniform" && value != "coco") {
        throw ConfigError("config key 'oks_preset': expected 'uniform' or 'coco', got '" +
                          value + "'");
      }
      cfg.eval.oks_preset = value;
    } else if (key == "oks_uniform_k") {
      cfg.eval.oks_uniform_k = parse_f64(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "' (line " + std::to_string(lineno) + ")");
    }
  }
  cfg.model.validate();
  cfg.train.validate();
  cfg.eval.validate();
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_text(const Config& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "base_channels = " << cfg.model.base_channels << "\n"
     << "blocks_per_stage = " << cfg.model.blocks_per_stage << "\n"
     << "num_keypoints = " << cfg.model.num_keypoints << "\n"
     << "groups = " << cfg.model.groups << "\n"
     << "variant = " << attention::variant_name(cfg.model.variant) << "\n"
     << "ohkm_k = " << cfg.model.ohkm_k << "\n"
     << "input_h = " << cfg.model.input_h << "\n"
     << "input_w = " << cfg.model.input_w << "\n"
     << "use_csm = " << (cfg.model.use_csm ? "true" : "false") << "\n"
     << "csm_reduce = " << (cfg.model.csm_reduce ? "true" : "false") << "\n"
     << "base_lr = " << cfg.train.base_lr << "\n"
     << "decay_factor = " << cfg.train.decay_factor << "\n";
  os << "decay_epochs = ";
  for (std::size_t i = 0; i < cfg.train.decay_epochs.size(); ++i) {
    os << (i ? "," : "") << cfg.train.decay_epochs[i];
  }
  os << "\n"
     << "total_epochs = " << cfg.train.total_epochs << "\n"
     << "rotation_max_deg = " << cfg.train.rotation_max_deg << "\n"
     << "scale_min = " << cfg.train.scale_min << "\n"
     << "scale_max = " << cfg.train.scale_max << "\n"
     << "batch_size = " << cfg.train.batch_size << "\n"
     << "seed = " << cfg.train.seed << "\n"
     << "augment = " << (cfg.train.augment ? "true" : "false") << "\n"
     << "dataset_size = " << cfg.train.dataset_size << "\n"
     << "val_size = " << cfg.train.val_size << "\n"
     << "sigma = " << cfg.train.sigma << "\n"
     << "flip_eval = " << (cfg.eval.flip ? "true" : "false") << "\n"
     << "decode_neighborhood = " << (cfg.eval.decode_neighborhood ? "true" : "false") << "\n"
     << "oks_scale = " << cfg.eval.oks_scale << "\n"
     << "oks_preset = " << cfg.eval.oks_preset << "\n"
     << "oks_uniform_k = " << cfg.eval.oks_uniform_k << "\n";
  return os.str();
}

Scalar lr_schedule(Index epoch, const TrainConfig& cfg) {
  std::vector<Index> bounds = cfg.decay_epochs;
  if (!cfg.decay_epochs_set && cfg.total_epochs != 140) {
    bounds = {cfg.total_epochs * 90 / 140, cfg.total_epochs * 120 / 140};
  }
  Scalar lr = cfg.base_lr;
  for (Index b : bounds) {
    if (epoch >= b) lr *= cfg.decay_factor;
  }
  return lr;
}

}  // namespace shufflepose::pipeline
