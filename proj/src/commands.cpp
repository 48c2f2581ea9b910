#include "kbgan/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "kbgan/adversarial.hpp"
#include "kbgan/checkpoint.hpp"

namespace kbgan {
namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Loads `dir` against the checkpoint vocabulary; the split files must not
/// introduce any name the checkpoint has never seen.
Dataset load_dataset_for(const std::filesystem::path& dir, const Vocabulary& vocab) {
  Dataset ds = load_dataset(dir, vocab);
  if (ds.vocab.num_entities() != vocab.num_entities() || ds.vocab.num_relations() != vocab.num_relations()) {
    throw std::runtime_error("vocabulary mismatch: dataset " + dir.string() + " contains " +
                             std::to_string(ds.vocab.num_entities() - vocab.num_entities()) + " entities and " +
                             std::to_string(ds.vocab.num_relations() - vocab.num_relations()) +
                             " relations unknown to the checkpoint");
  }
  return ds;
}

std::string metadata(const RunConfig& cfg) {
  std::ostringstream os;
  os << "kbgan " << cfg.command << " model=" << to_string(cfg.model.kind) << " seed=" << cfg.train.seed
     << " precision=" << to_string(cfg.precision);
  return os.str();
}

ProgressFn progress_printer(std::ostream& log, const char* stage) {
  return [&log, stage](const CurvePoint& pt) {
    log << stage << " epoch " << pt.epoch << "  valid MRR " << std::fixed << std::setprecision(2)
        << 100.0 * pt.valid_mrr << "  H@10 " << 100.0 * pt.valid_hits10 << "  loss " << std::setprecision(4)
        << pt.mean_loss << std::defaultfloat << '\n';
  };
}

template <class Scalar>
TrainReport run_pretrain(const RunConfig& cfg, const Dataset& ds, std::ostream& log) {
  Rng rng(cfg.train.seed);
  auto res = pretrain<Scalar>(cfg.model, ds, cfg.train, rng, progress_printer(log, "pretrain"));
  std::filesystem::create_directories(cfg.out);
  save_checkpoint(cfg.out / "best.ckpt", make_checkpoint(ds.vocab, res.best, metadata(cfg)));
  save_checkpoint(cfg.out / "final.ckpt", make_checkpoint(ds.vocab, res.last, metadata(cfg)));
  write_curve(cfg.out / "curve.tsv", res.report);
  write_text(cfg.out / "config.txt", config_echo(cfg));
  return res.report;
}

template <class Scalar>
TrainReport run_advtrain(const RunConfig& cfg, const Checkpoint& gen, const Checkpoint& dis, const Dataset& ds,
                         std::ostream& log) {
  Rng rng(cfg.train.seed);
  auto res = adversarial_train<Scalar>(gen.params.cast<Scalar>(), dis.params.cast<Scalar>(), ds, cfg.train, rng,
                                       {progress_printer(log, "advtrain"), {}});
  std::filesystem::create_directories(cfg.out);
  save_checkpoint(cfg.out / "best.ckpt", make_checkpoint(ds.vocab, res.best, metadata(cfg)));
  save_checkpoint(cfg.out / "final.ckpt", make_checkpoint(ds.vocab, res.last, metadata(cfg)));
  save_checkpoint(cfg.out / "generator.ckpt", make_checkpoint(ds.vocab, res.generator, metadata(cfg)));
  write_curve(cfg.out / "curve.tsv", res.report);
  write_text(cfg.out / "config.txt", config_echo(cfg));
  return res.report;
}

const std::vector<Triple>& select_split(const Dataset& ds, const std::string& split) {
  if (split == "train") return ds.triples.train;
  if (split == "valid") return ds.triples.valid;
  if (split == "test") return ds.triples.test;
  throw std::invalid_argument("unknown split '" + split + "' (expected train, valid, test)");
}

}  // namespace

void write_curve(const std::filesystem::path& path, const TrainReport& report) {
  std::ostringstream os;
  os << "epoch\tvalid_mrr_x100\tvalid_hits10_x100\tmean_loss\tmean_reward\tbest\n";
  os << std::setprecision(10);
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const auto& p = report.points[i];
    os << p.epoch << '\t' << 100.0 * p.valid_mrr << '\t' << 100.0 * p.valid_hits10 << '\t' << p.mean_loss << '\t'
       << p.mean_reward << '\t' << (i == report.best ? 1 : 0) << '\n';
  }
  write_text(path, os.str());
}

TrainReport cmd_pretrain(const RunConfig& cfg, std::ostream& log) {
  cfg.model.validate();
  cfg.train.validate();
  if (cfg.out.empty()) throw std::invalid_argument("--out is required");
  const Dataset ds = load_dataset(cfg.dataset);
  log << "loaded " << cfg.dataset.string() << ": " << ds.vocab.num_entities() << " entities, "
      << ds.vocab.num_relations() << " relations, " << ds.triples.train.size() << "/" << ds.triples.valid.size()
      << "/" << ds.triples.test.size() << " train/valid/test\n";
  return cfg.precision == Precision::F64 ? run_pretrain<double>(cfg, ds, log) : run_pretrain<float>(cfg, ds, log);
}

TrainReport cmd_advtrain(const RunConfig& cfg, std::ostream& log) {
  cfg.train.validate();
  if (cfg.out.empty()) throw std::invalid_argument("--out is required");
  const Checkpoint gen = load_checkpoint(cfg.generator);
  const Checkpoint dis = load_checkpoint(cfg.discriminator);
  if (is_translational(gen.params.spec.kind)) {
    throw std::invalid_argument("generator must be a DistMult or ComplEx checkpoint, got " +
                                std::string(to_string(gen.params.spec.kind)));
  }
  if (!is_translational(dis.params.spec.kind)) {
    throw std::invalid_argument("discriminator must be a TransE or TransD checkpoint, got " +
                                std::string(to_string(dis.params.spec.kind)));
  }
  if (!(gen.vocab == dis.vocab)) throw std::runtime_error("vocabulary mismatch between generator and discriminator");
  const Dataset ds = load_dataset_for(cfg.dataset, dis.vocab);

  RunConfig effective = cfg;
  effective.model = dis.params.spec;
  return cfg.precision == Precision::F64 ? run_advtrain<double>(effective, gen, dis, ds, log)
                                         : run_advtrain<float>(effective, gen, dis, ds, log);
}

EvalReport cmd_eval(const EvalOptions& opt, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  const Dataset ds = load_dataset_for(opt.dataset, ckpt.vocab);
  const auto& split = select_split(ds, opt.split);
  const FilterIndex filter(ds.triples);

  const EvalReport rep = opt.precision == Precision::F64
                             ? evaluate(ckpt.params.cast<double>(), std::span<const Triple>(split), filter)
                             : evaluate(ckpt.params, std::span<const Triple>(split), filter);

  out << "split: " << opt.split << (opt.split == "train" ? " (diagnostic: training triples)" : "") << '\n';
  out << "model: " << to_string(ckpt.params.spec.kind) << '\n';
  out << "triples: " << split.size() << '\n';
  out << "ranked: " << rep.count() << '\n';
  out << std::fixed << std::setprecision(2);
  out << "MRR: " << 100.0 * rep.mrr << '\n';
  out << "H@10: " << 100.0 * rep.hits_at_10 << '\n';
  out << std::defaultfloat;
  out << "ties: " << rep.ties << '\n';

  if (!opt.out.empty()) {
    std::filesystem::create_directories(opt.out);
    std::ostringstream table;
    table << std::setprecision(10);
    table << "split\tmrr_x100\thits10_x100\tranked\tties\n"
          << opt.split << '\t' << 100.0 * rep.mrr << '\t' << 100.0 * rep.hits_at_10 << '\t' << rep.count() << '\t'
          << rep.ties << '\n';
    write_text(opt.out / "report.tsv", table.str());

    std::ostringstream ranks;
    ranks << "head\trelation\ttail\tside\trank\tties\n";
    for (const auto& r : rep.ranks) {
      ranks << ds.vocab.entity_name(r.triple.h) << '\t' << ds.vocab.relation_name(r.triple.r) << '\t'
            << ds.vocab.entity_name(r.triple.t) << '\t' << to_string(r.side) << '\t' << r.rank << '\t' << r.ties
            << '\n';
    }
    write_text(opt.out / "ranks.tsv", ranks.str());
  }
  return rep;
}

void cmd_inspect_negatives(const InspectOptions& opt, std::ostream& out) {
  const Checkpoint gen = load_checkpoint(opt.generator);
  if (is_translational(gen.params.spec.kind)) {
    throw std::invalid_argument("generator must be a DistMult or ComplEx checkpoint");
  }
  std::optional<Checkpoint> dis;
  if (!opt.discriminator.empty()) {
    dis = load_checkpoint(opt.discriminator);
    if (!(dis->vocab == gen.vocab)) throw std::runtime_error("vocabulary mismatch between generator and discriminator");
  }
  const Dataset ds = load_dataset_for(opt.dataset, gen.vocab);
  const auto& train = ds.triples.train;
  const BernStats bern = compute_bern_stats(train, ds.vocab.num_relations());
  const auto& V = ds.vocab;

  out << "example\thead\trelation\ttail\tside\trank\tuniform_sample\tgenerator_pick\tprob\tdis_distance\n";
  Rng rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
  for (std::size_t ex = 0; ex < opt.examples; ++ex) {
    const Triple pos = train[pick(rng)];
    const auto dist = generator_distribution(gen.params, sample_candidates(pos, opt.ns, V.num_entities(), bern, rng));
    const auto& c = dist.candidates.candidates;
    std::vector<std::size_t> order(c.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist.probs[a] > dist.probs[b]; });

    const auto side = dist.candidates.side;
    auto name_of = [&](const Triple& x) { return V.entity_name(side == Side::Head ? x.h : x.t); };
    const std::size_t rows = std::min(opt.show, c.size());
    for (std::size_t i = 0; i < rows; ++i) {
      const Triple& picked = c[order[i]];
      out << ex << '\t' << V.entity_name(pos.h) << '\t' << V.relation_name(pos.r) << '\t' << V.entity_name(pos.t)
          << '\t' << to_string(side) << '\t' << i + 1 << '\t' << name_of(c[i]) << '\t' << name_of(picked) << '\t'
          << std::setprecision(4) << dist.probs[order[i]] << '\t';
      if (dis) {
        out << score(dis->params, picked);
      } else {
        out << '-';
      }
      out << std::defaultfloat << '\n';
    }
  }
}

}  // namespace kbgan
