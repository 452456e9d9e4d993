#pragma once
// The autoregressive scorer contract: log P(p | q, B, prefix) over the whole
// candidate pool. Scorers never mask; excluding already-selected passages is
// the decoder's job. Outputs always exponentiate to a distribution.

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "marr/matching.hpp"
#include "marr/text.hpp"
#include "marr/types.hpp"

namespace marr {

// Floor applied to log-probabilities wherever a zero probability would
// otherwise produce -inf (stored tabular zeros, decoder-side masking).
inline constexpr double kLogProbFloor = -50.0;

inline void check_prefix(const CandidateSet& candidates, std::span<const int> prefix) {
  std::unordered_set<int> seen;
  for (int index : prefix) {
    if (!candidates.valid_index(index))
      throw std::invalid_argument("prefix index " + std::to_string(index) +
                                  " not in candidate set");
    if (!seen.insert(index).second)
      throw std::invalid_argument("duplicate prefix index " + std::to_string(index));
  }
}

inline std::vector<double> log_softmax(std::span<const double> logits) {
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double x : logits) max_logit = std::max(max_logit, x);
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - max_logit);
  const double lse = max_logit + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

class Scorer {
 public:
  virtual ~Scorer() = default;

  // Log-probabilities over all |B| candidates given the selected-passage
  // prefix (1-based candidate indexes, no duplicates).
  virtual std::vector<double> score_next(const Question& question, const CandidateSet& candidates,
                                         std::span<const int> prefix) const = 0;
};

// Uniform over the candidate set whatever the prefix; the no-signal baseline.
class UniformScorer : public Scorer {
 public:
  std::vector<double> score_next(const Question&, const CandidateSet& candidates,
                                 std::span<const int> prefix) const override {
    check_prefix(candidates, prefix);
    return std::vector<double>(candidates.passages.size(),
                               -std::log(static_cast<double>(candidates.passages.size())));
  }
};

// ---- tabular scorer (test double) ----

// Explicit per-prefix distributions with a uniform fallback. Rows are
// renormalized on insert; zero entries are stored at the log floor.
class TabularScorer : public Scorer {
 public:
  explicit TabularScorer(int num_candidates) : size_(num_candidates) {
    if (num_candidates < 1) throw std::invalid_argument("tabular scorer needs >= 1 candidate");
  }

  void set_row(std::vector<int> prefix, const std::vector<double>& probs) {
    if (static_cast<int>(probs.size()) != size_)
      throw std::invalid_argument("tabular row length must equal candidate count");
    double sum = 0.0;
    for (double p : probs) {
      if (p < 0.0) throw std::invalid_argument("tabular row has a negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::invalid_argument("tabular row is not a probability distribution");
    std::vector<double> log_row(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
      log_row[i] = probs[i] > 0.0 ? std::log(probs[i] / sum) : kLogProbFloor;
    rows_[std::move(prefix)] = std::move(log_row);
  }

  // {"size": B, "rows": [{"prefix": [...], "probs": [...]}, ...]}
  static TabularScorer from_json(const nlohmann::json& j) {
    TabularScorer scorer(j.at("size").get<int>());
    for (const auto& row : j.at("rows"))
      scorer.set_row(row.at("prefix").get<std::vector<int>>(),
                     row.at("probs").get<std::vector<double>>());
    return scorer;
  }

  std::vector<double> score_next(const Question&, const CandidateSet& candidates,
                                 std::span<const int> prefix) const override {
    if (candidates.size() != size_)
      throw std::invalid_argument("candidate set size does not match tabular scorer");
    check_prefix(candidates, prefix);
    auto it = rows_.find(std::vector<int>(prefix.begin(), prefix.end()));
    if (it != rows_.end()) return it->second;
    return std::vector<double>(static_cast<std::size_t>(size_),
                               -std::log(static_cast<double>(size_)));
  }

 private:
  int size_;
  std::map<std::vector<int>, std::vector<double>> rows_;
};

// ---- coverage oracle (synthetic experiments) ----

// Softmax over three logit levels: passages covering an answer the prefix
// has not covered get (1 + novelty_bonus) / tau, passages covering only
// already-covered answers get 1 / tau, non-covering passages get 0.
class CoverageOracleScorer : public Scorer {
 public:
  explicit CoverageOracleScorer(double tau = 0.5, double novelty_bonus = 1.0)
      : tau_(tau), novelty_bonus_(novelty_bonus) {
    if (tau <= 0.0) throw std::invalid_argument("temperature must be positive");
  }

  std::vector<double> score_next(const Question& question, const CandidateSet& candidates,
                                 std::span<const int> prefix) const override {
    check_prefix(candidates, prefix);
    const AnswerSet& answers = question.answer_set;

    std::vector<bool> covered(answers.size(), false);
    for (int index : prefix)
      for (std::size_t a : covered_answer_ordinals(normalize(candidates.passage(index).text), answers))
        covered[a] = true;

    std::vector<double> logits(candidates.passages.size(), 0.0);
    for (std::size_t i = 0; i < candidates.passages.size(); ++i) {
      const auto hit = covered_answer_ordinals(normalize(candidates.passages[i].text), answers);
      if (hit.empty()) continue;
      bool novel = false;
      for (std::size_t a : hit)
        if (!covered[a]) novel = true;
      logits[i] = (novel ? 1.0 + novelty_bonus_ : 1.0) / tau_;
    }
    return log_softmax(logits);
  }

  double tau() const { return tau_; }
  double novelty_bonus() const { return novelty_bonus_; }

 private:
  double tau_;
  double novelty_bonus_;
};

// ---- log-linear scorer (trainable) ----

inline constexpr std::size_t kNumFeatures = 4;
inline constexpr std::array<const char*, kNumFeatures> kFeatureNames = {
    "lexical_overlap", "prior", "novelty", "prefix_overlap"};

using FeatureVector = std::array<double, kNumFeatures>;
using Weights = std::array<double, kNumFeatures>;

// Per-candidate features given a prefix:
//   lexical_overlap  fraction of the question's unique tokens found in the passage
//   prior            standardized first-stage score s(p)
//   novelty          fraction of the passage's covered answers the prefix has
//                    not covered yet (0 when the passage covers nothing);
//                    needs answer annotations, so it is a train-time signal
//   prefix_overlap   max Jaccard token overlap with any prefix passage
inline std::vector<FeatureVector> loglinear_features(const Question& question,
                                                     const CandidateSet& candidates,
                                                     std::span<const int> prefix) {
  check_prefix(candidates, prefix);
  const std::size_t n = candidates.passages.size();
  const AnswerSet& answers = question.answer_set;

  const auto question_tokens = unique_tokens(question.text);
  std::vector<std::unordered_set<std::string>> passage_tokens(n);
  for (std::size_t i = 0; i < n; ++i) passage_tokens[i] = unique_tokens(candidates.passages[i].text);

  const std::vector<double> priors = standardized_prior_scores(candidates);

  std::vector<bool> covered(answers.size(), false);
  for (int index : prefix)
    for (std::size_t a : covered_answer_ordinals(normalize(candidates.passage(index).text), answers))
      covered[a] = true;

  std::vector<FeatureVector> features(n);
  for (std::size_t i = 0; i < n; ++i) {
    double overlap = 0.0;
    if (!question_tokens.empty()) {
      for (const auto& t : question_tokens)
        if (passage_tokens[i].count(t)) overlap += 1.0;
      overlap /= static_cast<double>(question_tokens.size());
    }

    double novelty = 0.0;
    if (!answers.empty()) {
      const auto hit = covered_answer_ordinals(normalize(candidates.passages[i].text), answers);
      if (!hit.empty()) {
        double fresh = 0.0;
        for (std::size_t a : hit)
          if (!covered[a]) fresh += 1.0;
        novelty = fresh / static_cast<double>(hit.size());
      }
    }

    double prefix_overlap = 0.0;
    for (int index : prefix) {
      const auto& other = passage_tokens[static_cast<std::size_t>(index - 1)];
      double inter = 0.0;
      for (const auto& t : passage_tokens[i])
        if (other.count(t)) inter += 1.0;
      const double uni =
          static_cast<double>(passage_tokens[i].size() + other.size()) - inter;
      if (uni > 0.0) prefix_overlap = std::max(prefix_overlap, inter / uni);
    }

    features[i] = {overlap, priors[i], novelty, prefix_overlap};
  }
  return features;
}

class LogLinearScorer : public Scorer {
 public:
  LogLinearScorer() : weights_{} {}
  explicit LogLinearScorer(const Weights& weights) : weights_(weights) {}

  std::vector<double> score_next(const Question& question, const CandidateSet& candidates,
                                 std::span<const int> prefix) const override {
    const auto features = loglinear_features(question, candidates, prefix);
    std::vector<double> logits(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
      double dot = 0.0;
      for (std::size_t f = 0; f < kNumFeatures; ++f) dot += weights_[f] * features[i][f];
      logits[i] = dot;
    }
    return log_softmax(logits);
  }

  const Weights& weights() const { return weights_; }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t f = 0; f < kNumFeatures; ++f) j[kFeatureNames[f]] = weights_[f];
    return j;
  }

  static LogLinearScorer from_json(const nlohmann::json& j) {
    Weights w{};
    for (std::size_t f = 0; f < kNumFeatures; ++f) w[f] = j.value(kFeatureNames[f], 0.0);
    return LogLinearScorer(w);
  }

 private:
  Weights weights_;
};

}  // namespace marr
