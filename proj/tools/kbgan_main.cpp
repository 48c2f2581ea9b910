// kbgan: pretrain, adversarially train, evaluate and inspect knowledge graph embeddings.

#include <CLI11.hpp>

#include <iostream>

#include "kbgan/checkpoint.hpp"
#include "kbgan/commands.hpp"

namespace {

struct TrainFlags {
  std::string preset;
  std::string model;
  int k = 0;
  double gamma = 0;
  std::string norm;
  double lambda = 0;
  std::size_t ns = 20;
  std::size_t epochs = 0;
  std::size_t batches = 100;
  std::size_t eval_every = 0;
  std::uint64_t seed = 0;
  std::string precision = "f32";
  CLI::Option* k_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* norm_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* ns_opt = nullptr;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* eval_opt = nullptr;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool model_flags) {
  cmd->add_option("--preset", f.preset, "Named hyperparameter preset, e.g. wn18rr-transe");
  if (model_flags) {
    cmd->add_option("--model", f.model, "transe | transd | distmult | complex");
    f.k_opt = cmd->add_option("--k", f.k, "Embedding dimension (complex dimension for ComplEx)");
    f.norm_opt = cmd->add_option("--norm", f.norm, "Distance norm for translation models")
                     ->check(CLI::IsMember({"l1", "l2"}));
    f.lambda_opt = cmd->add_option("--lambda", f.lambda, "L2 regularization weight (DistMult/ComplEx)");
  }
  f.gamma_opt = cmd->add_option("--gamma", f.gamma, "Margin of the hinge loss");
  f.ns_opt = cmd->add_option("--ns", f.ns, "Candidate negatives per positive")->capture_default_str();
  f.epochs_opt = cmd->add_option("--epochs", f.epochs, "Training epochs");
  cmd->add_option("--batches-per-epoch", f.batches, "Mini-batches per epoch")->capture_default_str();
  f.eval_opt = cmd->add_option("--eval-every", f.eval_every, "Validation interval in epochs");
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_option("--precision", f.precision, "Arithmetic precision")
      ->check(CLI::IsMember({"f32", "f64"}))
      ->capture_default_str();
}

kbgan::RunConfig build_config(const std::string& command, const TrainFlags& f, bool pretraining) {
  using namespace kbgan;
  RunConfig cfg;
  cfg.command = command;
  if (!f.preset.empty()) {
    auto p = find_preset(f.preset);
    if (!p) throw std::invalid_argument("unknown preset '" + f.preset + "'");
    cfg.preset = p->name;
    cfg.model = p->model;
    cfg.train = p->train;
  } else if (pretraining && f.model.empty()) {
    throw std::invalid_argument("either --preset or --model is required");
  }
  if (!f.model.empty()) {
    const auto kind = parse_model_kind(f.model);
    if (kind != cfg.model.kind || f.preset.empty()) {
      cfg.model.kind = kind;
      cfg.model.norm = is_translational(kind) ? Norm::L1 : Norm::None;
    }
  }
  if (f.k_opt && f.k_opt->count()) cfg.model.k = f.k;
  if (f.norm_opt && f.norm_opt->count()) cfg.model.norm = parse_norm(f.norm);
  if (f.lambda_opt && f.lambda_opt->count()) cfg.train.lambda = f.lambda;
  if (f.gamma_opt->count()) cfg.train.gamma = f.gamma;
  if (pretraining) {
    cfg.train.ns_pretrain = f.ns;
    if (f.epochs_opt->count()) cfg.train.pretrain_epochs = f.epochs;
    if (f.eval_opt->count()) cfg.train.eval_every_pretrain = f.eval_every;
  } else {
    cfg.train.ns = f.ns;
    if (f.epochs_opt->count()) cfg.train.adv_epochs = f.epochs;
    if (f.eval_opt->count()) cfg.train.eval_every_adv = f.eval_every;
  }
  cfg.train.batches_per_epoch = f.batches;
  cfg.train.seed = f.seed;
  cfg.precision = parse_precision(f.precision);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge graph embeddings with adversarially generated negatives"};
  app.require_subcommand(1);

  TrainFlags pre_flags, adv_flags;
  std::string pre_dataset, pre_out, adv_dataset, adv_out, adv_gen, adv_dis;

  auto* pre = app.add_subcommand("pretrain", "Train one embedding model with uniform/bern negatives");
  pre->add_option("--dataset", pre_dataset, "Directory with train.txt, valid.txt, test.txt")->required();
  pre->add_option("--out", pre_out, "Output directory")->required();
  add_train_flags(pre, pre_flags, true);

  auto* adv = app.add_subcommand("advtrain", "Adversarially train a discriminator with a generator");
  adv->add_option("--dataset", adv_dataset, "Directory with train.txt, valid.txt, test.txt")->required();
  adv->add_option("--out", adv_out, "Output directory")->required();
  adv->add_option("--generator", adv_gen, "Pretrained DistMult/ComplEx checkpoint")->required();
  adv->add_option("--discriminator", adv_dis, "Pretrained TransE/TransD checkpoint")->required();
  add_train_flags(adv, adv_flags, false);

  kbgan::EvalOptions eval_opt;
  std::string eval_precision = "f32";
  auto* ev = app.add_subcommand("eval", "Filtered MRR and Hits@10 of a checkpoint");
  ev->add_option("--checkpoint", eval_opt.checkpoint, "Checkpoint to evaluate")->required();
  ev->add_option("--dataset", eval_opt.dataset, "Dataset directory")->required();
  ev->add_option("--split", eval_opt.split, "Split to rank")
      ->check(CLI::IsMember({"train", "valid", "test"}))
      ->capture_default_str();
  ev->add_option("--out", eval_opt.out, "Write report.tsv and ranks.tsv here");
  ev->add_option("--precision", eval_precision, "Arithmetic precision")->check(CLI::IsMember({"f32", "f64"}));

  kbgan::InspectOptions ins_opt;
  auto* ins = app.add_subcommand("inspect-negatives", "Uniform vs generator-picked negatives, side by side");
  ins->add_option("--generator", ins_opt.generator, "Generator checkpoint")->required();
  ins->add_option("--discriminator", ins_opt.discriminator, "Optional discriminator checkpoint");
  ins->add_option("--dataset", ins_opt.dataset, "Dataset directory")->required();
  ins->add_option("--examples", ins_opt.examples, "Number of positives to show")->capture_default_str();
  ins->add_option("--ns", ins_opt.ns, "Candidate set size")->capture_default_str();
  ins->add_option("--show", ins_opt.show, "Rows per positive")->capture_default_str();
  ins->add_option("--seed", ins_opt.seed, "Random seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed()) {
      auto cfg = build_config("pretrain", pre_flags, true);
      cfg.dataset = pre_dataset;
      cfg.out = pre_out;
      kbgan::cmd_pretrain(cfg, std::cerr);
    } else if (adv->parsed()) {
      auto cfg = build_config("advtrain", adv_flags, false);
      cfg.dataset = adv_dataset;
      cfg.out = adv_out;
      cfg.generator = adv_gen;
      cfg.discriminator = adv_dis;
      kbgan::cmd_advtrain(cfg, std::cerr);
    } else if (ev->parsed()) {
      eval_opt.precision = kbgan::parse_precision(eval_precision);
      kbgan::cmd_eval(eval_opt, std::cout);
    } else if (ins->parsed()) {
      kbgan::cmd_inspect_negatives(ins_opt, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
