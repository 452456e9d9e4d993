#pragma once
// Core domain types. All of them are plain values, immutable by convention
// after construction, and safe to share across parallel workers.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace marr {

struct Passage {
  std::string id;
  std::string title;
  std::string text;

  friend bool operator==(const Passage&, const Passage&) = default;
};

// One semantically distinct answer: a group of surface-form aliases,
// stored raw (pre-normalization) so the source data stays inspectable.
using DistinctAnswer = std::vector<std::string>;

struct AnswerSet {
  std::vector<DistinctAnswer> answers;

  std::size_t size() const { return answers.size(); }
  bool empty() const { return answers.empty(); }
  friend bool operator==(const AnswerSet&, const AnswerSet&) = default;
};

struct Question {
  std::string id;
  std::string text;
  AnswerSet answer_set;  // may be empty for inference-only questions

  friend bool operator==(const Question&, const Question&) = default;
};

// The candidate pool B for one question. Position j holds the passage with
// index j+1; indexes are 1-based and assigned by an explicit seeded
// permutation so that first-stage rank carries no positional signal.
struct CandidateSet {
  std::string question_id;
  std::vector<Passage> passages;
  std::vector<double> prior_scores;  // raw first-stage scores, aligned with
                                     // passages; empty when unknown
  std::uint64_t seed = 0;            // permutation seed used at assignment

  int size() const { return static_cast<int>(passages.size()); }

  bool valid_index(int index) const { return index >= 1 && index <= size(); }

  const Passage& passage(int index) const {
    if (!valid_index(index))
      throw std::out_of_range("candidate index " + std::to_string(index) +
                              " out of range 1.." + std::to_string(size()));
    return passages[static_cast<std::size_t>(index - 1)];
  }

  std::optional<int> index_of(std::string_view passage_id) const {
    for (int i = 0; i < size(); ++i)
      if (passages[static_cast<std::size_t>(i)].id == passage_id) return i + 1;
    return std::nullopt;
  }
};

// First-stage scores standardized to zero mean and unit variance within the
// candidate set; this is the prior s(p_i) consumed by negative sampling and
// by the trainable scorer. Returns zeros when scores are absent or constant.
inline std::vector<double> standardized_prior_scores(const CandidateSet& candidates) {
  const std::size_t n = candidates.passages.size();
  std::vector<double> out(n, 0.0);
  if (candidates.prior_scores.size() != n || n == 0) return out;
  double mean = 0.0;
  for (double s : candidates.prior_scores) mean += s;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double s : candidates.prior_scores) var += (s - mean) * (s - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = (candidates.prior_scores[i] - mean) / sd;
  return out;
}

// A decoded tree over candidate indexes: a list of root-anchored sequences
// where sequences[0] is the empty root and every later sequence extends an
// earlier one by exactly one index. `selected` is the flattened passage set
// in insertion order; node_log_probs (when present) align with sequences and
// hold the log-probability of each appended index given its path prefix,
// 0.0 for the root.
struct Tree {
  std::vector<std::vector<int>> sequences;
  std::vector<double> node_log_probs;
  std::vector<int> selected;

  friend bool operator==(const Tree&, const Tree&) = default;
};

// A simulated decoding trajectory used for training: the positive set
// (in preprocessing scan order) plus a length-k prefix interleaving the
// positives with sampled negatives. `pool`, when non-empty, is a sorted
// subsampled candidate pool the training softmax is restricted to.
struct SupervisionExample {
  std::string question_id;
  std::vector<int> positives;
  std::vector<int> prefix;
  std::vector<int> pool;

  // Remaining oracle targets at step t (1-based): positives minus the
  // prefix entries before t, in positive-scan order.
  std::vector<int> targets_at(std::size_t t) const {
    if (t < 1 || t > prefix.size())
      throw std::out_of_range("supervision step out of range");
    std::vector<int> out;
    for (int p : positives) {
      bool seen = false;
      for (std::size_t i = 0; i + 1 < t; ++i)
        if (prefix[i] == p) {
          seen = true;
          break;
        }
      if (!seen) out.push_back(p);
    }
    return out;
  }
};

}  // namespace marr
