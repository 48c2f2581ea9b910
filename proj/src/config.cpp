#include "kbgan/config.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace kbgan {

std::string_view to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

Precision parse_precision(std::string_view s) {
  if (s == "f32") return Precision::F32;
  if (s == "f64") return Precision::F64;
  throw std::invalid_argument("unknown precision '" + std::string(s) + "' (expected f32, f64)");
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    std::vector<Preset> out;
    struct DatasetDefaults {
      const char* name;
      double lambda;
    };
    // Only the bilinear models' regularization weight differs between datasets.
    const DatasetDefaults datasets[] = {{"fb15k237", 1.0}, {"wn18", 0.1}, {"wn18rr", 0.1}};
    for (const auto& ds : datasets) {
      for (auto kind : {ModelKind::TransE, ModelKind::TransD, ModelKind::DistMult, ModelKind::ComplEx}) {
        Preset p;
        p.name = std::string(ds.name) + "-" + std::string(to_string(kind));
        if (is_translational(kind)) {
          p.model = {kind, Norm::L1, 50};
          p.train.gamma = 3.0;
          p.train.lambda = 0.0;
        } else {
          p.model = {kind, Norm::None, kind == ModelKind::ComplEx ? 25 : 50};
          p.train.lambda = ds.lambda;
        }
        out.push_back(std::move(p));
      }
    }
    return out;
  }();
  return all;
}

std::optional<Preset> find_preset(std::string_view name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

std::string config_echo(const RunConfig& cfg) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto kv = [&](const char* key, const auto& value) { os << key << " = " << value << '\n'; };
  kv("command", cfg.command);
  kv("dataset", cfg.dataset.string());
  kv("out", cfg.out.string());
  kv("preset", cfg.preset.empty() ? "none" : cfg.preset);
  kv("model", to_string(cfg.model.kind));
  kv("norm", to_string(cfg.model.norm));
  kv("k", cfg.model.k);
  kv("gamma", cfg.train.gamma);
  kv("lambda", cfg.train.lambda);
  kv("ns", cfg.train.ns);
  kv("ns_pretrain", cfg.train.ns_pretrain);
  kv("pretrain_epochs", cfg.train.pretrain_epochs);
  kv("adv_epochs", cfg.train.adv_epochs);
  kv("batches_per_epoch", cfg.train.batches_per_epoch);
  kv("eval_every_pretrain", cfg.train.eval_every_pretrain);
  kv("eval_every_adv", cfg.train.eval_every_adv);
  kv("seed", cfg.train.seed);
  kv("precision", to_string(cfg.precision));
  kv("adam_alpha", 0.001);
  kv("adam_beta1", 0.9);
  kv("adam_beta2", 0.999);
  kv("adam_epsilon", 1e-8);
  if (!cfg.generator.empty()) kv("generator", cfg.generator.string());
  if (!cfg.discriminator.empty()) kv("discriminator", cfg.discriminator.string());
  return os.str();
}

}  // namespace kbgan
