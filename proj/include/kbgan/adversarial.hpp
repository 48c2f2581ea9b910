#pragma once

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "kbgan/evaluation.hpp"
#include "kbgan/kgdata.hpp"
#include "kbgan/models.hpp"
#include "kbgan/training.hpp"

namespace kbgan {

/// Softmax of generator goodness over one candidate set.
struct GeneratorDistribution {
  CandidateSet candidates;
  std::vector<double> probs;
};

template <class Scalar>
GeneratorDistribution generator_distribution(const ModelParams<Scalar>& gen, CandidateSet cands) {
  const auto& c = cands.candidates;
  if (c.empty()) throw std::invalid_argument("generator distribution over an empty candidate set");
  std::vector<double> g(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) g[i] = static_cast<double>(goodness(gen, c[i]));
  const double m = *std::max_element(g.begin(), g.end());
  double z = 0.0;
  for (double& x : g) z += (x = std::exp(x - m));
  for (double& x : g) x /= z;
  return {std::move(cands), std::move(g)};
}

struct SampledNegative {
  std::size_t index = 0;
  double p = 1.0;
};

inline SampledNegative sample_negative(const GeneratorDistribution& dist, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(dist.probs.begin(), dist.probs.end());
  const std::size_t i = pick(rng);
  return {i, dist.probs[i]};
}

/// Gradient of [f_D(pos) - f_D(neg) + gamma]_+ with respect to the discriminator.
template <class Scalar>
SparseGradient<Scalar> discriminator_step(const ModelParams<Scalar>& dis, const Triple& positive,
                                          const Triple& negative, Scalar gamma) {
  if (!is_translational(dis.spec.kind)) throw std::invalid_argument("discriminator must be a distance model");
  SparseGradient<Scalar> g;
  detail::accumulate_hinge(dis, positive, negative, gamma, g);
  return g;
}

/// -f_D(neg): the closer the discriminator puts a negative, the higher its reward.
template <class Scalar>
Scalar reward(const ModelParams<Scalar>& dis, const Triple& negative) {
  return -score(dis, negative);
}

/// Accumulates `scale * d log p_s / d theta_G` where
/// d log p_s = dg(s) - sum_j p_j dg(j) over the candidate set.
template <class Scalar>
void accumulate_log_prob_gradient(const ModelParams<Scalar>& gen, const GeneratorDistribution& dist,
                                  std::size_t sampled, SparseGradient<Scalar>& out, Scalar scale = Scalar(1)) {
  const auto& c = dist.candidates.candidates;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double coeff = (j == sampled ? 1.0 : 0.0) - dist.probs[j];
    accumulate_goodness_gradient(gen, c[j], out, static_cast<Scalar>(coeff) * scale);
  }
}

/// Policy-gradient ascent direction (r - b) * d log p_s / d theta_G.
template <class Scalar>
SparseGradient<Scalar> generator_step(const ModelParams<Scalar>& gen, const GeneratorDistribution& dist,
                                      std::size_t sampled, Scalar r, Scalar b) {
  if (sampled >= dist.probs.size() || !(dist.probs[sampled] > 0.0)) {
    throw std::invalid_argument("sampled index outside the support of the distribution");
  }
  SparseGradient<Scalar> g;
  if (r != b) accumulate_log_prob_gradient(gen, dist, sampled, g, r - b);
  return g;
}

inline double update_baseline(double reward_sum, std::size_t batch_size) {
  if (batch_size < 1) throw std::invalid_argument("baseline update needs a nonempty batch");
  return reward_sum / static_cast<double>(batch_size);
}

template <class Scalar>
struct AdversarialResult {
  ModelParams<Scalar> best;  // best-validation discriminator
  ModelParams<Scalar> last;  // discriminator after the final epoch
  ModelParams<Scalar> generator;
  TrainReport report;  // point at epoch 0 is the pretrained discriminator
};

/// Hooks for watching an adversarial run. `on_sample` sees every generated negative.
struct AdversarialHooks {
  ProgressFn progress;
  std::function<void(std::size_t epoch, const GeneratorDistribution&, const SampledNegative&)> on_sample;
};

/// The adversarial loop: per positive, draw `ns` uniform candidates, sample one
/// negative from the generator softmax, accumulate the discriminator hinge
/// gradient and the baselined policy gradient, then apply both with Adam once
/// per mini-batch and reset the baseline to that batch's mean reward.
template <class Scalar>
AdversarialResult<Scalar> adversarial_train(ModelParams<Scalar> gen, ModelParams<Scalar> dis, const Dataset& data,
                                            const TrainConfig& cfg, Rng& rng, const AdversarialHooks& hooks = {}) {
  cfg.validate();
  if (is_translational(gen.spec.kind)) throw std::invalid_argument("generator must be DistMult or ComplEx");
  if (!is_translational(dis.spec.kind)) throw std::invalid_argument("discriminator must be TransE or TransD");
  const std::size_t n_ent = data.vocab.num_entities();
  const std::size_t n_rel = data.vocab.num_relations();
  if (gen.num_entities() != n_ent || dis.num_entities() != n_ent || gen.num_relations() != n_rel ||
      dis.num_relations() != n_rel) {
    throw std::invalid_argument("generator, discriminator and dataset disagree on vocabulary size");
  }
  const auto& train = data.triples.train;
  if (train.empty()) throw std::invalid_argument("training split is empty");

  const BernStats bern = compute_bern_stats(train, n_rel);
  const FilterIndex filter(data.triples);

  AdversarialResult<Scalar> res;
  res.best = dis;
  if (cfg.adv_epochs == 0) {
    res.last = std::move(dis);
    res.generator = std::move(gen);
    return res;
  }

  {
    const EvalReport ev = evaluate(dis, std::span<const Triple>(data.triples.valid), filter);
    CurvePoint pt{0, ev.mrr, ev.hits_at_10, std::numeric_limits<double>::quiet_NaN()};
    res.report.record(pt);
    if (hooks.progress) hooks.progress(pt);
  }

  AdamState<Scalar> gen_adam(gen), dis_adam(dis);
  const Scalar gamma = static_cast<Scalar>(cfg.gamma);
  const std::size_t batch_size = (train.size() + cfg.batches_per_epoch - 1) / cfg.batches_per_epoch;
  double baseline = 0.0;

  for (std::size_t epoch = 1; epoch <= cfg.adv_epochs; ++epoch) {
    const auto order = detail::shuffled_indices(train.size(), rng);
    double epoch_loss = 0.0, epoch_reward = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      SparseGradient<Scalar> grad_dis, grad_gen;
      double reward_sum = 0.0;
      Scalar batch_loss = 0;
      for (std::size_t i = start; i < stop; ++i) {
        const Triple& pos = train[order[i]];
        const GeneratorDistribution dist =
            generator_distribution(gen, sample_candidates(pos, cfg.ns, n_ent, bern, rng));
        const SampledNegative s = sample_negative(dist, rng);
        const Triple& neg = dist.candidates.candidates[s.index];
        if (hooks.on_sample) hooks.on_sample(epoch, dist, s);

        batch_loss += detail::accumulate_hinge(dis, pos, neg, gamma, grad_dis);
        const Scalar r = reward(dis, neg);
        reward_sum += static_cast<double>(r);
        // Adam descends, so the ascent direction (r - b) dlog p_s enters negated.
        if (static_cast<double>(r) != baseline) {
          accumulate_log_prob_gradient(gen, dist, s.index, grad_gen, static_cast<Scalar>(baseline) - r);
        }
      }
      if (!std::isfinite(static_cast<double>(batch_loss)) || !std::isfinite(reward_sum)) {
        throw DivergenceError("non-finite loss at adversarial epoch " + std::to_string(epoch), res.report);
      }
      try {
        adam_step(gen, gen_adam, grad_gen);
        adam_step(dis, dis_adam, grad_dis);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at adversarial epoch " + std::to_string(epoch), res.report);
      }
      project_constraints(dis, grad_dis);
      baseline = update_baseline(reward_sum, stop - start);
      epoch_loss += static_cast<double>(batch_loss);
      epoch_reward += reward_sum;
    }

    if (detail::is_eval_epoch(epoch, cfg.adv_epochs, cfg.eval_every_adv)) {
      const EvalReport ev = evaluate(dis, std::span<const Triple>(data.triples.valid), filter);
      const auto n = static_cast<double>(train.size());
      CurvePoint pt{epoch, ev.mrr, ev.hits_at_10, epoch_loss / n, epoch_reward / n};
      if (res.report.record(pt)) res.best = dis;
      if (hooks.progress) hooks.progress(pt);
    }
  }
  res.last = std::move(dis);
  res.generator = std::move(gen);
  return res;
}

}  // namespace kbgan
