#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kbgan/models.hpp"
#include "kbgan/training.hpp"

namespace kbgan {

enum class Precision { F32, F64 };

/// Named hyperparameter bundle, e.g. "wn18rr-transe".
struct Preset {
  std::string name;
  ModelSpec model;
  TrainConfig train;
};

/// Presets for {fb15k237, wn18, wn18rr} x {transe, transd, distmult, complex}.
const std::vector<Preset>& presets();
std::optional<Preset> find_preset(std::string_view name);

struct RunConfig {
  std::string command;
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::string preset;
  ModelSpec model;
  TrainConfig train;
  Precision precision = Precision::F32;
  std::filesystem::path generator;
  std::filesystem::path discriminator;
};

/// `key = value` lines covering every effective setting of a run.
std::string config_echo(const RunConfig& cfg);

std::string_view to_string(Precision p);
Precision parse_precision(std::string_view s);

}  // namespace kbgan
