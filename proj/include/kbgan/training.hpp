#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbgan/evaluation.hpp"
#include "kbgan/kgdata.hpp"
#include "kbgan/models.hpp"

namespace kbgan {

struct TrainConfig {
  double gamma = 3.0;
  double lambda = 0.0;
  std::size_t ns = 20;           // adversarial candidate-set size
  std::size_t ns_pretrain = 20;  // negatives per positive for log-softmax pretraining
  std::size_t pretrain_epochs = 1000;
  std::size_t adv_epochs = 5000;
  std::size_t batches_per_epoch = 100;
  std::size_t eval_every_pretrain = 50;
  std::size_t eval_every_adv = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("margin gamma must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (ns < 1 || ns_pretrain < 1) throw std::invalid_argument("candidate counts must be >= 1");
    if (batches_per_epoch < 1) throw std::invalid_argument("batches per epoch must be >= 1");
    if (eval_every_pretrain < 1 || eval_every_adv < 1) throw std::invalid_argument("eval interval must be >= 1");
  }
};

struct CurvePoint {
  std::size_t epoch = 0;
  double valid_mrr = 0.0;
  double valid_hits10 = 0.0;
  double mean_loss = 0.0;
  double mean_reward = std::numeric_limits<double>::quiet_NaN();
};

struct TrainReport {
  std::vector<CurvePoint> points;
  std::size_t best = 0;  // index into points

  const CurvePoint& best_point() const { return points.at(best); }

  /// Records a point; returns true when it becomes the new best (strictly higher MRR).
  bool record(const CurvePoint& pt) {
    points.push_back(pt);
    if (points.size() == 1 || pt.valid_mrr > points[best].valid_mrr) {
      best = points.size() - 1;
      return true;
    }
    return false;
  }
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, TrainReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const TrainReport& report() const { return report_; }

 private:
  TrainReport report_;
};

/// [f_pos - f_neg + gamma]_+ over distances.
template <class Scalar>
Scalar marginal_loss(Scalar f_pos, Scalar f_neg, Scalar gamma) {
  return std::max(Scalar(0), f_pos - f_neg + gamma);
}

/// Negative log-probability of the positive under a softmax over {pos} U negs.
/// `grad`, if non-empty, receives dL/dg for [pos, negs...] (size 1 + negs.size()).
template <class Scalar>
Scalar log_softmax_loss(Scalar g_pos, std::span<const Scalar> g_negs, std::span<Scalar> grad = {}) {
  if (g_negs.empty()) throw std::invalid_argument("log-softmax loss needs at least one negative");
  Scalar m = g_pos;
  for (Scalar g : g_negs) m = std::max(m, g);
  Scalar z = std::exp(g_pos - m);
  for (Scalar g : g_negs) z += std::exp(g - m);
  const Scalar log_z = std::log(z) + m;
  if (!grad.empty()) {
    grad[0] = std::exp(g_pos - log_z) - Scalar(1);
    for (std::size_t i = 0; i < g_negs.size(); ++i) grad[i + 1] = std::exp(g_negs[i] - log_z);
  }
  return log_z - g_pos;
}

/// Adam with bias correction, applied row-sparsely: only rows present in a
/// gradient have their moments and values updated.
template <class Scalar>
struct AdamState {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t t = 0;
  std::vector<EmbeddingTable<Scalar>> m;
  std::vector<EmbeddingTable<Scalar>> v;

  AdamState() = default;
  explicit AdamState(const ModelParams<Scalar>& p) {
    for (const auto& tab : p.tables) {
      m.push_back(EmbeddingTable<Scalar>::Zero(tab.rows(), tab.cols()));
      v.push_back(EmbeddingTable<Scalar>::Zero(tab.rows(), tab.cols()));
    }
  }
};

/// One optimizer step descending `grad`. Throws DivergenceError on non-finite input.
template <class Scalar>
void adam_step(ModelParams<Scalar>& p, AdamState<Scalar>& s, const SparseGradient<Scalar>& grad) {
  if (!grad.all_finite()) throw DivergenceError("non-finite gradient component", {});
  ++s.t;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  const Scalar b1 = static_cast<Scalar>(s.beta1), b2 = static_cast<Scalar>(s.beta2);
  const Scalar step = static_cast<Scalar>(s.alpha / bc1);
  const Scalar sqrt_bc2 = static_cast<Scalar>(std::sqrt(bc2));
  const Scalar eps = static_cast<Scalar>(s.epsilon);
  grad.for_each([&](auto key, const RowVector<Scalar>& g) {
    const auto ti = static_cast<std::size_t>(key.table);
    auto m = s.m[ti].row(key.row);
    auto v = s.v[ti].row(key.row);
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
    // theta -= alpha * m_hat / (sqrt(v_hat) + eps)
    p.tables[ti].row(key.row).array() -= step * m.array() / (v.array().sqrt() / sqrt_bc2 + eps);
  });
}

template <class Scalar>
struct TrainResult {
  ModelParams<Scalar> best;
  ModelParams<Scalar> last;
  TrainReport report;
};

/// Progress hook, called after each recorded evaluation point.
using ProgressFn = std::function<void(const CurvePoint&)>;

namespace detail {

inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

inline bool is_eval_epoch(std::size_t epoch, std::size_t total, std::size_t every) {
  return epoch % every == 0 || epoch == total;
}

/// Adds dL/dtheta of one margin pair to `g`; returns the loss.
template <class Scalar>
Scalar accumulate_hinge(const ModelParams<Scalar>& p, const Triple& pos, const Triple& neg, Scalar gamma,
                        SparseGradient<Scalar>& g) {
  const Scalar loss = marginal_loss(score(p, pos), score(p, neg), gamma);
  if (loss > Scalar(0)) {
    accumulate_score_gradient(p, pos, g, Scalar(1));
    accumulate_score_gradient(p, neg, g, Scalar(-1));
  }
  return loss;
}

}  // namespace detail

/// Trains one model from scratch with its natural loss: margin loss with 1:1
/// bern corruption for TransE/TransD, log-softmax over `ns_pretrain` sampled
/// negatives plus lazy L2 for DistMult/ComplEx. Keeps the best-validation-MRR
/// parameters.
template <class Scalar>
TrainResult<Scalar> pretrain(const ModelSpec& spec, const Dataset& data, const TrainConfig& cfg, Rng& rng,
                             const ProgressFn& progress = {}) {
  cfg.validate();
  const auto& train = data.triples.train;
  if (train.empty()) throw std::invalid_argument("training split is empty");
  const std::size_t n_ent = data.vocab.num_entities();
  const std::size_t n_rel = data.vocab.num_relations();

  const BernStats bern = compute_bern_stats(train, n_rel);
  const FilterIndex filter(data.triples);

  TrainResult<Scalar> res;
  res.last = initialize_params<Scalar>(spec, n_ent, n_rel, rng);
  res.best = res.last;
  AdamState<Scalar> adam(res.last);

  const bool translational = is_translational(spec.kind);
  const Scalar gamma = static_cast<Scalar>(cfg.gamma);
  const Scalar lambda = static_cast<Scalar>(cfg.lambda);
  const std::size_t batch_size = (train.size() + cfg.batches_per_epoch - 1) / cfg.batches_per_epoch;
  std::uniform_int_distribution<EntityId> pick_entity(0, static_cast<EntityId>(n_ent - 1));

  std::vector<Scalar> g_negs(cfg.ns_pretrain), dloss(cfg.ns_pretrain + 1);
  std::vector<std::pair<TableId, EntityId>> reg_rows;

  for (std::size_t epoch = 1; epoch <= cfg.pretrain_epochs; ++epoch) {
    const auto order = detail::shuffled_indices(train.size(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      SparseGradient<Scalar> grad;
      Scalar batch_loss = 0;
      for (std::size_t i = start; i < stop; ++i) {
        const Triple& pos = train[order[i]];
        if (translational) {
          const Triple neg = corrupt(pos, sample_side(pos.r, bern, rng), pick_entity(rng));
          batch_loss += detail::accumulate_hinge(res.last, pos, neg, gamma, grad);
          continue;
        }
        const CandidateSet cs = sample_candidates(pos, cfg.ns_pretrain, n_ent, bern, rng);
        for (std::size_t j = 0; j < cs.candidates.size(); ++j) g_negs[j] = goodness(res.last, cs.candidates[j]);
        batch_loss += log_softmax_loss<Scalar>(goodness(res.last, pos), g_negs, dloss);
        accumulate_goodness_gradient(res.last, pos, grad, dloss[0]);
        for (std::size_t j = 0; j < cs.candidates.size(); ++j) {
          accumulate_goodness_gradient(res.last, cs.candidates[j], grad, dloss[j + 1]);
        }
        if (lambda > Scalar(0)) {
          reg_rows = touched_rows(spec.kind, pos);
          for (const Triple& c : cs.candidates) {
            reg_rows.emplace_back(TableId::Entity, cs.side == Side::Head ? c.h : c.t);
          }
          batch_loss += l2_penalty<Scalar>(res.last, reg_rows, lambda);
          grad.add(l2_reg_gradient<Scalar>(res.last, reg_rows, lambda));
        }
      }
      if (!std::isfinite(static_cast<double>(batch_loss))) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch), res.report);
      }
      epoch_loss += static_cast<double>(batch_loss);
      try {
        adam_step(res.last, adam, grad);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at epoch " + std::to_string(epoch), res.report);
      }
      project_constraints(res.last, grad);
    }

    if (detail::is_eval_epoch(epoch, cfg.pretrain_epochs, cfg.eval_every_pretrain)) {
      const EvalReport ev = evaluate(res.last, std::span<const Triple>(data.triples.valid), filter);
      CurvePoint pt{epoch, ev.mrr, ev.hits_at_10, epoch_loss / static_cast<double>(train.size())};
      if (res.report.record(pt)) res.best = res.last;
      if (progress) progress(pt);
    }
  }
  return res;
}

}  // namespace kbgan
