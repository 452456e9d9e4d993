#pragma once
// Decoding algorithms over an autoregressive scorer.
//
// seq_decode grows a single chain: at each step take the argmax over
// unselected passages given everything selected so far.
//
// tree_decode grows a tree: every iteration it considers extending any
// existing branch by any passage, weights each extension's (floored)
// log-probability by the length penalty at the target depth, and takes the
// globally best one. Deep extensions look for a new answer; wide extensions
// back off to the next-best passage at an existing step. With beta > 0 the
// penalty multiplies negative numbers, so depth is disfavored as beta grows.
//
// Ties break deterministically: lowest passage index, then shortest branch,
// then oldest branch.
//
// Selecting a passage masks it globally (not just the duplicate-sequence
// mask): otherwise the best extension can re-add a passage already in the
// selection through a different branch, spending iterations without growing
// the selection. The flag mask_selected keeps the duplicate-sequence-only
// behavior reachable (a passage may then reappear on other branches; it can
// never extend its own prefix, which would make the conditional ill-formed);
// a stall guard throws if the selection cannot reach k.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "marr/scorer.hpp"
#include "marr/types.hpp"

namespace marr {

// ((5 + y) / 6)^beta; y is the depth of the expansion being scored. l(1) = 1
// for every beta, so the penalty never affects first-step comparisons.
inline double length_penalty(double beta, int y) {
  if (y < 1) throw std::invalid_argument("length penalty needs y >= 1");
  return std::pow((5.0 + static_cast<double>(y)) / 6.0, beta);
}

namespace detail {

inline double floored(double log_prob) { return std::max(log_prob, kLogProbFloor); }

}  // namespace detail

inline Tree seq_decode(const Scorer& scorer, const Question& question,
                       const CandidateSet& candidates, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > static_cast<std::size_t>(candidates.size()))
    throw std::invalid_argument("k exceeds candidate set size");

  Tree tree;
  tree.sequences.push_back({});
  tree.node_log_probs.push_back(0.0);

  std::vector<bool> taken(static_cast<std::size_t>(candidates.size()) + 1, false);
  for (std::size_t step = 0; step < k; ++step) {
    const std::vector<double> scores = scorer.score_next(question, candidates, tree.selected);
    int best = -1;
    double best_score = 0.0;
    for (int p = 1; p <= candidates.size(); ++p) {
      if (taken[static_cast<std::size_t>(p)]) continue;
      const double s = detail::floored(scores[static_cast<std::size_t>(p - 1)]);
      if (best == -1 || s > best_score) {
        best = p;
        best_score = s;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    tree.selected.push_back(best);
    std::vector<int> chain = tree.sequences.back();
    chain.push_back(best);
    tree.sequences.push_back(std::move(chain));
    tree.node_log_probs.push_back(best_score);
  }
  return tree;
}

inline Tree tree_decode(const Scorer& scorer, const Question& question,
                        const CandidateSet& candidates, std::size_t k, double beta,
                        bool mask_selected = true) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > static_cast<std::size_t>(candidates.size()))
    throw std::invalid_argument("k exceeds candidate set size");
  const std::size_t b = candidates.passages.size();

  // One branch per tree node. Scores are computed once per branch; `order`
  // ranks passages by (score desc, index asc) and `cursor` advances past
  // entries that became masked. Both masks only ever grow, so a skipped
  // entry never has to be revisited.
  struct Branch {
    std::vector<int> prefix;
    std::vector<double> scores;   // floored log-probs
    std::vector<int> order;
    std::size_t cursor = 0;
    std::vector<bool> child;      // passages already appended to this branch
    std::vector<bool> in_prefix;  // passages on this branch's own path
    double penalty = 1.0;         // l(|prefix| + 1)
  };

  std::vector<bool> selected_mask(b + 1, false);
  auto make_branch = [&](std::vector<int> prefix) {
    Branch branch;
    branch.penalty = length_penalty(beta, static_cast<int>(prefix.size()) + 1);
    branch.scores = scorer.score_next(question, candidates, prefix);
    for (double& s : branch.scores) s = detail::floored(s);
    branch.in_prefix.assign(b + 1, false);
    for (int p : prefix) branch.in_prefix[static_cast<std::size_t>(p)] = true;
    branch.prefix = std::move(prefix);
    branch.order.resize(b);
    for (std::size_t i = 0; i < b; ++i) branch.order[i] = static_cast<int>(i) + 1;
    std::stable_sort(branch.order.begin(), branch.order.end(), [&](int x, int y) {
      return branch.scores[static_cast<std::size_t>(x - 1)] >
             branch.scores[static_cast<std::size_t>(y - 1)];
    });
    branch.child.assign(b + 1, false);
    return branch;
  };

  std::vector<Branch> branches;
  branches.push_back(make_branch({}));

  Tree tree;
  tree.sequences.push_back({});
  tree.node_log_probs.push_back(0.0);

  const std::size_t max_iterations = (k + 1) * (b + 1);  // stall guard for mask_selected=false
  std::size_t iterations = 0;
  while (tree.selected.size() < k) {
    if (++iterations > max_iterations)
      throw std::runtime_error("tree decoding stalled: selection cannot reach k");

    int best_branch = -1;
    int best_passage = -1;
    double best_value = 0.0;
    for (std::size_t bi = 0; bi < branches.size(); ++bi) {
      Branch& branch = branches[bi];
      while (branch.cursor < b) {
        const int p = branch.order[branch.cursor];
        const bool masked = branch.child[static_cast<std::size_t>(p)] ||
                            branch.in_prefix[static_cast<std::size_t>(p)] ||
                            (mask_selected && selected_mask[static_cast<std::size_t>(p)]);
        if (!masked) break;
        ++branch.cursor;
      }
      if (branch.cursor >= b) continue;
      const int p = branch.order[branch.cursor];
      const double value = branch.penalty * branch.scores[static_cast<std::size_t>(p - 1)];
      const bool better =
          best_branch == -1 || value > best_value ||
          (value == best_value &&
           (p < best_passage ||
            (p == best_passage &&
             branch.prefix.size() < branches[static_cast<std::size_t>(best_branch)].prefix.size())));
      if (better) {
        best_branch = static_cast<int>(bi);
        best_passage = p;
        best_value = value;
      }
    }
    if (best_branch == -1) throw std::runtime_error("tree decoding exhausted all expansions");

    Branch& parent = branches[static_cast<std::size_t>(best_branch)];
    parent.child[static_cast<std::size_t>(best_passage)] = true;
    if (!selected_mask[static_cast<std::size_t>(best_passage)]) {
      selected_mask[static_cast<std::size_t>(best_passage)] = true;
      tree.selected.push_back(best_passage);
    }
    std::vector<int> extended = parent.prefix;
    extended.push_back(best_passage);
    tree.sequences.push_back(extended);
    tree.node_log_probs.push_back(parent.scores[static_cast<std::size_t>(best_passage - 1)]);
    if (tree.selected.size() < k) branches.push_back(make_branch(std::move(extended)));
  }
  return tree;
}

// Reference implementation of tree decoding: every iteration rescans all
// (branch, passage) pairs from scratch, rescoring each branch through the
// scorer with no caching. Used as the equivalence oracle for tree_decode.
inline Tree reference_tree_decode(const Scorer& scorer, const Question& question,
                                  const CandidateSet& candidates, std::size_t k, double beta,
                                  bool mask_selected = true) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > static_cast<std::size_t>(candidates.size()))
    throw std::invalid_argument("k exceeds candidate set size");

  Tree tree;
  tree.sequences.push_back({});
  tree.node_log_probs.push_back(0.0);

  const std::size_t max_iterations =
      (k + 1) * (candidates.passages.size() + 1);
  std::size_t iterations = 0;
  while (tree.selected.size() < k) {
    if (++iterations > max_iterations)
      throw std::runtime_error("tree decoding stalled: selection cannot reach k");

    int best_branch = -1;
    int best_passage = -1;
    double best_value = 0.0;
    double best_raw = 0.0;
    for (std::size_t si = 0; si < tree.sequences.size(); ++si) {
      const std::vector<int>& prefix = tree.sequences[si];
      const std::vector<double> scores = scorer.score_next(question, candidates, prefix);
      for (int p = 1; p <= candidates.size(); ++p) {
        if (mask_selected &&
            std::find(tree.selected.begin(), tree.selected.end(), p) != tree.selected.end())
          continue;
        if (std::find(prefix.begin(), prefix.end(), p) != prefix.end()) continue;
        std::vector<int> extended = prefix;
        extended.push_back(p);
        if (std::find(tree.sequences.begin(), tree.sequences.end(), extended) !=
            tree.sequences.end())
          continue;
        const double raw = detail::floored(scores[static_cast<std::size_t>(p - 1)]);
        const double value = length_penalty(beta, static_cast<int>(prefix.size()) + 1) * raw;
        const bool better =
            best_branch == -1 || value > best_value ||
            (value == best_value &&
             (p < best_passage ||
              (p == best_passage &&
               prefix.size() <
                   tree.sequences[static_cast<std::size_t>(best_branch)].size())));
        if (better) {
          best_branch = static_cast<int>(si);
          best_passage = p;
          best_value = value;
          best_raw = raw;
        }
      }
    }
    if (best_branch == -1) throw std::runtime_error("tree decoding exhausted all expansions");

    std::vector<int> extended = tree.sequences[static_cast<std::size_t>(best_branch)];
    extended.push_back(best_passage);
    if (std::find(tree.selected.begin(), tree.selected.end(), best_passage) ==
        tree.selected.end())
      tree.selected.push_back(best_passage);
    tree.sequences.push_back(std::move(extended));
    tree.node_log_probs.push_back(best_raw);
  }
  return tree;
}

// The independent-scoring extreme: the top k of the first-step distribution,
// emitted as a star tree of depth 1.
inline Tree top_k_decode(const Scorer& scorer, const Question& question,
                         const CandidateSet& candidates, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k > static_cast<std::size_t>(candidates.size()))
    throw std::invalid_argument("k exceeds candidate set size");

  std::vector<double> scores = scorer.score_next(question, candidates, {});
  for (double& s : scores) s = detail::floored(s);
  std::vector<int> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i) + 1;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a - 1)] > scores[static_cast<std::size_t>(b - 1)];
  });

  Tree tree;
  tree.sequences.push_back({});
  tree.node_log_probs.push_back(0.0);
  for (std::size_t i = 0; i < k; ++i) {
    tree.sequences.push_back({order[i]});
    tree.node_log_probs.push_back(scores[static_cast<std::size_t>(order[i] - 1)]);
    tree.selected.push_back(order[i]);
  }
  return tree;
}

// Tree score f: sum over non-root nodes of the (floored) log-probability of
// the appended passage given its path prefix, recomputed via the scorer.
inline double tree_score(const Tree& tree, const Scorer& scorer, const Question& question,
                         const CandidateSet& candidates) {
  double total = 0.0;
  for (std::size_t i = 0; i < tree.sequences.size(); ++i) {
    const std::vector<int>& seq = tree.sequences[i];
    if (seq.empty()) continue;
    const std::span<const int> prefix(seq.data(), seq.size() - 1);
    const std::vector<double> scores = scorer.score_next(question, candidates, prefix);
    total += detail::floored(scores[static_cast<std::size_t>(seq.back() - 1)]);
  }
  return total;
}

// Max branch length. A tree that selected nothing has no depth.
inline int tree_depth(const Tree& tree) {
  if (tree.selected.empty()) throw std::invalid_argument("depth of an empty tree is undefined");
  std::size_t depth = 0;
  for (const auto& seq : tree.sequences) depth = std::max(depth, seq.size());
  return static_cast<int>(depth);
}

inline double mean_tree_depth(std::span<const Tree> trees) {
  if (trees.empty()) throw std::invalid_argument("no trees to average");
  double total = 0.0;
  for (const auto& t : trees) total += static_cast<double>(tree_depth(t));
  return total / static_cast<double>(trees.size());
}

}  // namespace marr
