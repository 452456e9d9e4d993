#pragma once
// Multi-answer retrieval metrics.
//
// recall@k:  success iff any distinct answer is covered by the k passages.
// mrecall@k: success iff all n answers are covered when n <= k, or at least
//            k answers are covered when n > k. Note this makes success at a
//            small k possible alongside failure at a larger k for the same
//            passages: the bar rises from k to n once n <= k.
// alpha-nDCG@k: rank-discounted gain where each repeated coverage of the
//            same answer is damped by (1 - alpha); normalized by the DCG of
//            an ideal reordering of the same passages (greedy by default,
//            exhaustive over all orderings behind a flag for short lists).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "marr/matching.hpp"
#include "marr/types.hpp"

namespace marr {

// Coverage matrix: row per ranked passage, column per distinct answer.
inline std::vector<std::vector<bool>> coverage_matrix(const AnswerSet& answers,
                                                      std::span<const Passage* const> passages) {
  std::vector<std::vector<bool>> cover(passages.size(),
                                       std::vector<bool>(answers.size(), false));
  for (std::size_t i = 0; i < passages.size(); ++i) {
    const std::string norm = normalize(passages[i]->text);
    for (std::size_t a = 0; a < answers.size(); ++a)
      cover[i][a] = covers_normalized(norm, answers.answers[a]);
  }
  return cover;
}

inline int covered_answer_count(const AnswerSet& answers,
                                std::span<const Passage* const> passages) {
  const auto cover = coverage_matrix(answers, passages);
  int count = 0;
  for (std::size_t a = 0; a < answers.size(); ++a)
    for (std::size_t i = 0; i < passages.size(); ++i)
      if (cover[i][a]) {
        ++count;
        break;
      }
  return count;
}

inline bool recall_at_k(const AnswerSet& answers, std::span<const Passage* const> passages) {
  return covered_answer_count(answers, passages) > 0;
}

// `passages` is the retrieved list already truncated to at most k entries;
// k itself still matters for the n > k branch.
inline bool mrecall_at_k(const AnswerSet& answers, std::span<const Passage* const> passages,
                         std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (answers.empty()) throw std::invalid_argument("mrecall needs a non-empty answer set");
  const std::size_t n = answers.size();
  const std::size_t c = static_cast<std::size_t>(covered_answer_count(answers, passages));
  return n <= k ? c == n : c >= k;
}

namespace detail {

// DCG of `order` (a permutation of coverage-matrix rows) truncated to k.
// Gain at rank i: sum over answers covered by the passage of
// (1 - alpha)^(times the answer was covered at earlier ranks).
inline double alpha_dcg_of_order(const std::vector<std::vector<bool>>& cover,
                                 std::span<const std::size_t> order, std::size_t k,
                                 double alpha, std::size_t num_answers) {
  std::vector<int> seen(num_answers, 0);
  double dcg = 0.0;
  const std::size_t depth = std::min(k, order.size());
  for (std::size_t rank = 0; rank < depth; ++rank) {
    const auto& row = cover[order[rank]];
    double gain = 0.0;
    for (std::size_t a = 0; a < num_answers; ++a)
      if (row[a]) {
        gain += std::pow(1.0 - alpha, static_cast<double>(seen[a]));
        ++seen[a];
      }
    dcg += gain / std::log2(static_cast<double>(rank) + 2.0);
  }
  return dcg;
}

inline double greedy_ideal_dcg(const std::vector<std::vector<bool>>& cover, std::size_t k,
                               double alpha, std::size_t num_answers) {
  const std::size_t n = cover.size();
  std::vector<bool> used(n, false);
  std::vector<int> seen(num_answers, 0);
  double dcg = 0.0;
  const std::size_t depth = std::min(k, n);
  for (std::size_t rank = 0; rank < depth; ++rank) {
    std::size_t best = n;
    double best_gain = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      double gain = 0.0;
      for (std::size_t a = 0; a < num_answers; ++a)
        if (cover[i][a]) gain += std::pow(1.0 - alpha, static_cast<double>(seen[a]));
      if (gain > best_gain) {  // ties keep the earliest original position
        best_gain = gain;
        best = i;
      }
    }
    used[best] = true;
    for (std::size_t a = 0; a < num_answers; ++a)
      if (cover[best][a]) ++seen[a];
    dcg += best_gain / std::log2(static_cast<double>(rank) + 2.0);
  }
  return dcg;
}

inline double brute_force_ideal_dcg(const std::vector<std::vector<bool>>& cover, std::size_t k,
                                    double alpha, std::size_t num_answers) {
  const std::size_t n = cover.size();
  if (n > 8)
    throw std::invalid_argument("exhaustive ideal DCG is limited to 8 passages, got " +
                                std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  double best = 0.0;
  do {
    best = std::max(best, alpha_dcg_of_order(cover, order, k, alpha, num_answers));
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

}  // namespace detail

enum class IdealMode { greedy, brute_force };

inline double alpha_dcg(const AnswerSet& answers, std::span<const Passage* const> ranked,
                        std::size_t k, double alpha) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const auto cover = coverage_matrix(answers, ranked);
  std::vector<std::size_t> identity(ranked.size());
  std::iota(identity.begin(), identity.end(), 0);
  return detail::alpha_dcg_of_order(cover, identity, k, alpha, answers.size());
}

inline double alpha_ndcg(const AnswerSet& answers, std::span<const Passage* const> ranked,
                         std::size_t k, double alpha = 0.9,
                         IdealMode ideal = IdealMode::greedy) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const auto cover = coverage_matrix(answers, ranked);
  std::vector<std::size_t> identity(ranked.size());
  std::iota(identity.begin(), identity.end(), 0);
  const double dcg = detail::alpha_dcg_of_order(cover, identity, k, alpha, answers.size());
  const double ideal_dcg =
      ideal == IdealMode::greedy
          ? detail::greedy_ideal_dcg(cover, k, alpha, answers.size())
          : detail::brute_force_ideal_dcg(cover, k, alpha, answers.size());
  return ideal_dcg > 0.0 ? dcg / ideal_dcg : 0.0;
}

// ---- report types ----

struct QuestionEval {
  std::string qid;
  int n_answers = 0;
  int covered = 0;
  bool recall = false;
  bool mrecall = false;
  double alpha_ndcg = 0.0;
  int depth = 0;
};

struct MetricAggregate {
  std::size_t count = 0;
  double recall_rate = 0.0;
  double mrecall_rate = 0.0;
  double mean_alpha_ndcg = 0.0;
};

inline MetricAggregate aggregate(std::span<const QuestionEval> records) {
  MetricAggregate agg;
  agg.count = records.size();
  if (records.empty()) return agg;
  for (const auto& r : records) {
    agg.recall_rate += r.recall ? 1.0 : 0.0;
    agg.mrecall_rate += r.mrecall ? 1.0 : 0.0;
    agg.mean_alpha_ndcg += r.alpha_ndcg;
  }
  const double n = static_cast<double>(records.size());
  agg.recall_rate /= n;
  agg.mrecall_rate /= n;
  agg.mean_alpha_ndcg /= n;
  return agg;
}

struct BucketRow {
  int n_answers = 0;
  std::size_t count = 0;
  double fraction = 0.0;
  MetricAggregate metrics;
};

// Metric breakdown by distinct-answer count.
inline std::vector<BucketRow> breakdown_by_answer_count(std::span<const QuestionEval> records) {
  std::vector<int> ns;
  for (const auto& r : records) ns.push_back(r.n_answers);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  std::vector<BucketRow> rows;
  for (int n : ns) {
    std::vector<QuestionEval> subset;
    for (const auto& r : records)
      if (r.n_answers == n) subset.push_back(r);
    BucketRow row;
    row.n_answers = n;
    row.count = subset.size();
    row.fraction = records.empty() ? 0.0
                                   : static_cast<double>(subset.size()) /
                                         static_cast<double>(records.size());
    row.metrics = aggregate(subset);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace marr
