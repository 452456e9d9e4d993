#pragma once
// Supervision construction and training.
//
// Training examples simulate a decoding trajectory: the positive set plus
// sampled hard negatives, shuffled into a prefix. At every step the model is
// pushed toward every positive not yet inside the prefix (the remaining
// oracle targets), so supervision stays valid whatever order the model
// actually selects passages in. Teacher forcing, the conventional
// one-fixed-sequence alternative, is kept for ablation runs.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "marr/matching.hpp"
#include "marr/rng.hpp"
#include "marr/scorer.hpp"
#include "marr/types.hpp"

namespace marr {

// Picks `count` negatives (candidates outside the positive set) with the
// largest perturbed prior s(p_i) + gamma * g_i, g_i ~ Gumbel(0, 1). Returned
// in descending perturbed-score order; gamma = 0 draws no noise at all, so
// the choice is a plain sort by prior with index ascending on ties.
inline std::vector<int> sample_negatives(const CandidateSet& candidates,
                                         std::span<const int> positives, std::size_t count,
                                         std::span<const double> priors, double gamma,
                                         std::uint64_t seed) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (!priors.empty() && priors.size() != candidates.passages.size())
    throw std::invalid_argument("prior scores must align with the candidate set");

  std::vector<bool> positive(static_cast<std::size_t>(candidates.size()) + 1, false);
  for (int p : positives) {
    if (!candidates.valid_index(p))
      throw std::invalid_argument("positive index " + std::to_string(p) + " not in candidate set");
    positive[static_cast<std::size_t>(p)] = true;
  }

  std::vector<int> pool;
  for (int i = 1; i <= candidates.size(); ++i)
    if (!positive[static_cast<std::size_t>(i)]) pool.push_back(i);
  if (count > pool.size())
    throw std::invalid_argument("requested " + std::to_string(count) + " negatives but only " +
                                std::to_string(pool.size()) + " candidates are negative");

  std::mt19937_64 rng(seed);
  std::vector<double> perturbed(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double s = priors.empty() ? 0.0 : priors[static_cast<std::size_t>(pool[i] - 1)];
    perturbed[i] = gamma == 0.0 ? s : s + gamma * next_gumbel(rng);
  }

  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return perturbed[a] > perturbed[b]; });

  std::vector<int> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(pool[order[i]]);
  return out;
}

struct GumbelSampler {
  double gamma = 0.0;
  std::uint64_t seed = 0;

  std::vector<int> sample_negatives(const CandidateSet& candidates, std::span<const int> positives,
                                    std::size_t count, std::span<const double> priors) const {
    return marr::sample_negatives(candidates, positives, count, priors, gamma, seed);
  }
};

// Builds one dynamic-oracle example: positives from the greedy preprocessing
// scan, prefix = positives plus sampled negatives in a seeded uniform
// shuffle. Returns nullopt (example skipped) when no candidate covers any
// answer. pool_fraction > 0 additionally subsamples the candidate pool to
// ceil(|B| * fraction) passages (all positives plus the top sampled
// negatives) and records it in the example.
inline std::optional<SupervisionExample> build_dynamic_oracle_example(
    const Question& question, const CandidateSet& candidates, std::size_t k, double gamma,
    std::uint64_t seed, double pool_fraction = 0.0) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > static_cast<std::size_t>(candidates.size()))
    throw std::invalid_argument("k exceeds candidate set size");
  if (pool_fraction < 0.0 || pool_fraction > 1.0)
    throw std::invalid_argument("pool_fraction must be in [0, 1]");

  SupervisionExample example;
  example.question_id = question.id;
  example.positives = preproc_positives(k, question.answer_set, candidates);
  if (example.positives.empty()) {
    std::cerr << "warning: question " << question.id
              << " has no positive passages, supervision example skipped\n";
    return std::nullopt;
  }

  const std::vector<double> priors = standardized_prior_scores(candidates);
  const std::size_t prefix_negatives = k - example.positives.size();

  std::vector<int> negatives;
  if (pool_fraction > 0.0) {
    std::size_t pool_size = static_cast<std::size_t>(
        std::llround(pool_fraction * static_cast<double>(candidates.size())));
    pool_size = std::clamp(pool_size, k, static_cast<std::size_t>(candidates.size()));
    negatives = sample_negatives(candidates, example.positives, pool_size - example.positives.size(),
                                 priors, gamma, derive_seed(seed, "negatives"));
    example.pool = example.positives;
    example.pool.insert(example.pool.end(), negatives.begin(), negatives.end());
    std::sort(example.pool.begin(), example.pool.end());
  } else {
    negatives = sample_negatives(candidates, example.positives, prefix_negatives, priors, gamma,
                                 derive_seed(seed, "negatives"));
  }

  example.prefix = example.positives;
  example.prefix.insert(example.prefix.end(), negatives.begin(),
                        negatives.begin() + static_cast<std::ptrdiff_t>(prefix_negatives));
  std::mt19937_64 rng(derive_seed(seed, "prefix"));
  shuffle_in_place(example.prefix, rng);
  return example;
}

// Teacher-forcing target: the positive set ordered by a baseline ranking
// (indexes in rank order, best first). Returns nullopt when there are no
// positives.
inline std::optional<std::vector<int>> build_teacher_forcing_example(
    const Question& question, const CandidateSet& candidates, std::size_t k,
    std::span<const int> baseline_order) {
  std::vector<int> positives = preproc_positives(k, question.answer_set, candidates);
  if (positives.empty()) {
    std::cerr << "warning: question " << question.id
              << " has no positive passages, teacher-forcing example skipped\n";
    return std::nullopt;
  }
  std::vector<int> rank(static_cast<std::size_t>(candidates.size()) + 1, -1);
  for (std::size_t r = 0; r < baseline_order.size(); ++r)
    rank[static_cast<std::size_t>(baseline_order[r])] = static_cast<int>(r);
  for (int p : positives)
    if (rank[static_cast<std::size_t>(p)] < 0)
      throw std::invalid_argument("baseline ranking does not cover positive index " +
                                  std::to_string(p));
  std::sort(positives.begin(), positives.end(), [&](int a, int b) {
    return rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)];
  });
  return positives;
}

// Candidate indexes ordered by first-stage prior, best first; the baseline
// ranking used by teacher forcing.
inline std::vector<int> baseline_order_from_priors(const CandidateSet& candidates) {
  const std::vector<double> priors = standardized_prior_scores(candidates);
  std::vector<int> order(priors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i) + 1;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return priors[static_cast<std::size_t>(a - 1)] > priors[static_cast<std::size_t>(b - 1)];
  });
  return order;
}

namespace detail {

// Log-probabilities renormalized over a subsampled pool (1-based indexes).
// No-op when the pool is empty.
inline std::vector<double> restrict_to_pool(std::vector<double> log_probs,
                                            std::span<const int> pool) {
  if (pool.empty()) return log_probs;
  double max_lp = -std::numeric_limits<double>::infinity();
  for (int p : pool) max_lp = std::max(max_lp, log_probs[static_cast<std::size_t>(p - 1)]);
  double sum = 0.0;
  for (int p : pool) sum += std::exp(log_probs[static_cast<std::size_t>(p - 1)] - max_lp);
  const double lse = max_lp + std::log(sum);
  for (double& lp : log_probs) lp -= lse;
  return log_probs;
}

}  // namespace detail

// Sum over steps t = 1..k of -log P(o | q, B, P_{t-1}) for every remaining
// oracle target o at step t. Steps whose target set is empty contribute 0.
inline double dynamic_oracle_loss(const Scorer& scorer, const SupervisionExample& example,
                                  const Question& question, const CandidateSet& candidates) {
  double loss = 0.0;
  for (std::size_t t = 1; t <= example.prefix.size(); ++t) {
    const std::vector<int> targets = example.targets_at(t);
    if (targets.empty()) continue;
    const std::span<const int> prefix(example.prefix.data(), t - 1);
    const std::vector<double> log_probs =
        detail::restrict_to_pool(scorer.score_next(question, candidates, prefix), example.pool);
    for (int o : targets) loss -= log_probs[static_cast<std::size_t>(o - 1)];
  }
  return loss;
}

// -log prod_t P(o_t | o_1..o_{t-1}) for a fixed target sequence.
inline double teacher_forcing_loss(const Scorer& scorer, std::span<const int> sequence,
                                   const Question& question, const CandidateSet& candidates) {
  double loss = 0.0;
  for (std::size_t t = 0; t < sequence.size(); ++t) {
    const std::span<const int> prefix(sequence.data(), t);
    const std::vector<double> log_probs = scorer.score_next(question, candidates, prefix);
    loss -= log_probs[static_cast<std::size_t>(sequence[t] - 1)];
  }
  return loss;
}

// ---- gradient-descent training of the log-linear scorer ----

struct TrainItem {
  const Question* question = nullptr;
  const CandidateSet* candidates = nullptr;
  SupervisionExample example;
};

// dynamic_oracle: every step targets all remaining positives.
// teacher_forcing: the example's prefix is a fixed target sequence and each
// step targets exactly its next element (the conventional ablation).
enum class TrainMode { dynamic_oracle, teacher_forcing };

struct TrainOptions {
  std::size_t epochs = 100;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  bool stochastic = false;  // per-example updates in seeded shuffled order
  TrainMode mode = TrainMode::dynamic_oracle;
};

namespace detail {

// One softmax step: feature matrix for a fixed prefix plus the target rows.
struct TrainStep {
  std::vector<FeatureVector> features;  // |B| x F
  std::vector<std::size_t> targets;     // 0-based rows
  std::vector<std::size_t> pool;        // 0-based rows; empty = all
  std::size_t item = 0;                 // owning example, for mean-loss scaling
};

inline std::vector<TrainStep> build_steps(std::span<const TrainItem> items,
                                          TrainMode mode = TrainMode::dynamic_oracle) {
  std::vector<TrainStep> steps;
  for (std::size_t it = 0; it < items.size(); ++it) {
    const TrainItem& item = items[it];
    const SupervisionExample& ex = item.example;
    for (std::size_t t = 1; t <= ex.prefix.size(); ++t) {
      const std::vector<int> targets = mode == TrainMode::dynamic_oracle
                                           ? ex.targets_at(t)
                                           : std::vector<int>{ex.prefix[t - 1]};
      if (targets.empty()) continue;
      TrainStep step;
      step.item = it;
      step.features = loglinear_features(*item.question, *item.candidates,
                                         std::span<const int>(ex.prefix.data(), t - 1));
      for (int o : targets) step.targets.push_back(static_cast<std::size_t>(o - 1));
      for (int p : ex.pool) step.pool.push_back(static_cast<std::size_t>(p - 1));
      steps.push_back(std::move(step));
    }
  }
  return steps;
}

// Negative log-likelihood of the step's targets under softmax(w . phi),
// restricted to the pool, plus its gradient contribution.
inline double step_loss_and_gradient(const TrainStep& step, const Weights& weights,
                                     Weights& gradient) {
  const auto& rows = step.pool;
  std::vector<std::size_t> all;
  const std::vector<std::size_t>* active = &rows;
  if (rows.empty()) {
    all.resize(step.features.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    active = &all;
  }

  double max_logit = -std::numeric_limits<double>::infinity();
  std::vector<double> logits(active->size());
  for (std::size_t i = 0; i < active->size(); ++i) {
    double dot = 0.0;
    for (std::size_t f = 0; f < kNumFeatures; ++f)
      dot += weights[f] * step.features[(*active)[i]][f];
    logits[i] = dot;
    max_logit = std::max(max_logit, dot);
  }
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - max_logit);
  const double lse = max_logit + std::log(sum);

  FeatureVector expected{};
  for (std::size_t i = 0; i < active->size(); ++i) {
    const double prob = std::exp(logits[i] - lse);
    for (std::size_t f = 0; f < kNumFeatures; ++f)
      expected[f] += prob * step.features[(*active)[i]][f];
  }

  double loss = 0.0;
  for (std::size_t target : step.targets) {
    double dot = 0.0;
    for (std::size_t f = 0; f < kNumFeatures; ++f) dot += weights[f] * step.features[target][f];
    loss += lse - dot;
    for (std::size_t f = 0; f < kNumFeatures; ++f)
      gradient[f] += expected[f] - step.features[target][f];
  }
  return loss;
}

}  // namespace detail

// Mean dynamic-oracle loss over items and its analytic gradient, computed
// from precomputed features. The finite-difference check in the tests goes
// through the scorer path instead, keeping the two routes independent.
inline std::pair<double, Weights> loglinear_loss_and_gradient(const Weights& weights,
                                                              std::span<const TrainItem> items) {
  if (items.empty()) throw std::invalid_argument("no training items");
  const auto steps = detail::build_steps(items);
  double loss = 0.0;
  Weights gradient{};
  for (const auto& step : steps) loss += detail::step_loss_and_gradient(step, weights, gradient);
  const double scale = 1.0 / static_cast<double>(items.size());
  loss *= scale;
  for (double& g : gradient) g *= scale;
  return {loss, gradient};
}

struct TrainResult {
  LogLinearScorer scorer;
  std::vector<double> epoch_losses;  // mean loss before each update
  double final_loss = 0.0;
};

inline TrainResult train_loglinear(std::span<const TrainItem> items, const TrainOptions& options) {
  if (items.empty())
    throw std::invalid_argument("no usable supervision examples (all were skipped?)");
  const auto steps = detail::build_steps(items, options.mode);
  const double item_scale = 1.0 / static_cast<double>(items.size());

  auto mean_loss = [&](const Weights& w) {
    double loss = 0.0;
    Weights sink{};
    for (const auto& step : steps) loss += detail::step_loss_and_gradient(step, w, sink);
    return loss * item_scale;
  };

  Weights weights{};
  TrainResult result;
  std::mt19937_64 rng(options.seed);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    result.epoch_losses.push_back(mean_loss(weights));
    if (options.stochastic) {
      std::vector<std::size_t> order(steps.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      shuffle_in_place(order, rng);
      for (std::size_t si : order) {
        Weights gradient{};
        detail::step_loss_and_gradient(steps[si], weights, gradient);
        for (std::size_t f = 0; f < kNumFeatures; ++f)
          weights[f] -= options.learning_rate * gradient[f];
      }
    } else {
      Weights gradient{};
      for (const auto& step : steps) detail::step_loss_and_gradient(step, weights, gradient);
      for (std::size_t f = 0; f < kNumFeatures; ++f)
        weights[f] -= options.learning_rate * item_scale * gradient[f];
    }
  }
  result.final_loss = mean_loss(weights);
  result.scorer = LogLinearScorer(weights);
  return result;
}

}  // namespace marr
