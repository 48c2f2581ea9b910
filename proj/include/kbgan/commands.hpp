#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "kbgan/config.hpp"
#include "kbgan/evaluation.hpp"
#include "kbgan/training.hpp"

namespace kbgan {

/// Pretrains `cfg.model`; writes best.ckpt, final.ckpt, curve.tsv and config.txt under cfg.out.
TrainReport cmd_pretrain(const RunConfig& cfg, std::ostream& log);

/// Adversarially trains the discriminator checkpoint with the generator checkpoint; writes
/// best.ckpt (discriminator), final.ckpt, generator.ckpt, curve.tsv and config.txt.
TrainReport cmd_advtrain(const RunConfig& cfg, std::ostream& log);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path dataset;
  std::string split = "test";
  std::filesystem::path out;  // optional: report.tsv + ranks.tsv
  Precision precision = Precision::F32;
};

EvalReport cmd_eval(const EvalOptions& opt, std::ostream& out);

struct InspectOptions {
  std::filesystem::path generator;
  std::filesystem::path discriminator;  // optional
  std::filesystem::path dataset;
  std::size_t examples = 3;
  std::size_t ns = 20;
  std::size_t show = 5;
  std::uint64_t seed = 0;
};

/// Side-by-side table of uniformly drawn candidates and the generator's most
/// probable picks among them, for randomly chosen training positives.
void cmd_inspect_negatives(const InspectOptions& opt, std::ostream& out);

void write_curve(const std::filesystem::path& path, const TrainReport& report);

}  // namespace kbgan
