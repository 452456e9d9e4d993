#pragma once
// Evaluation report: per-question records, aggregates over all questions and
// over multi-answer questions, depth statistics and the answer-count
// breakdown. Serializes to JSON and to an aligned text table.

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "marr/decoding.hpp"
#include "marr/io.hpp"
#include "marr/metrics.hpp"
#include "marr/types.hpp"

namespace marr {

struct EvalConfig {
  std::size_t k = 5;
  double alpha = 0.9;
  IdealMode ideal = IdealMode::greedy;
  std::optional<double> beta;   // reporting only
  std::optional<double> gamma;  // reporting only
};

struct EvalReport {
  std::size_t k = 5;
  double alpha = 0.9;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::vector<QuestionEval> per_question;
  MetricAggregate all;
  MetricAggregate multi;  // questions with more than one distinct answer
  std::optional<double> mean_depth;
  std::vector<BucketRow> buckets;

  json to_json() const {
    json j;
    j["k"] = k;
    j["alpha"] = alpha;
    j["beta"] = beta ? json(*beta) : json(nullptr);
    j["gamma"] = gamma ? json(*gamma) : json(nullptr);
    json per = json::array();
    for (const auto& r : per_question)
      per.push_back(json{{"qid", r.qid},
                         {"n_answers", r.n_answers},
                         {"covered", r.covered},
                         {"recall", r.recall},
                         {"mrecall", r.mrecall},
                         {"alpha_ndcg", r.alpha_ndcg},
                         {"depth", r.depth}});
    j["per_question"] = std::move(per);
    auto agg_json = [](const MetricAggregate& a) {
      return json{{"count", a.count},
                  {"recall", a.recall_rate},
                  {"mrecall", a.mrecall_rate},
                  {"alpha_ndcg", a.mean_alpha_ndcg}};
    };
    j["aggregates"] = json{{"all", agg_json(all)}, {"multi_answer", agg_json(multi)}};
    j["mean_depth"] = mean_depth ? json(*mean_depth) : json(nullptr);
    json rows = json::array();
    for (const auto& b : buckets)
      rows.push_back(json{{"n_answers", b.n_answers},
                          {"count", b.count},
                          {"fraction", b.fraction},
                          {"recall", b.metrics.recall_rate},
                          {"mrecall", b.metrics.mrecall_rate},
                          {"alpha_ndcg", b.metrics.mean_alpha_ndcg}});
    j["buckets"] = std::move(rows);
    return j;
  }

  std::string to_table() const {
    std::ostringstream out;
    out << std::fixed;
    out << "questions: " << all.count << "   k: " << k << "   alpha: " << std::setprecision(2)
        << alpha << "\n";
    out << std::setprecision(3);
    out << std::left << std::setw(16) << "metric" << std::right << std::setw(8) << "all"
        << std::setw(10) << "n>1" << "\n";
    const std::string kstr = std::to_string(k);
    out << std::left << std::setw(16) << ("recall@" + kstr) << std::right << std::setw(8)
        << all.recall_rate << std::setw(10) << multi.recall_rate << "\n";
    out << std::left << std::setw(16) << ("mrecall@" + kstr) << std::right << std::setw(8)
        << all.mrecall_rate << std::setw(10) << multi.mrecall_rate << "\n";
    out << std::left << std::setw(16) << ("alpha-ndcg@" + kstr) << std::right << std::setw(8)
        << all.mean_alpha_ndcg << std::setw(10) << multi.mean_alpha_ndcg << "\n";
    if (mean_depth)
      out << "mean tree depth: " << std::setprecision(1) << *mean_depth << "\n";
    if (!buckets.empty()) {
      out << "\nbreakdown by distinct-answer count\n";
      out << std::setprecision(3);
      out << std::right << std::setw(4) << "n" << std::setw(7) << "count" << std::setw(8)
          << "frac" << std::setw(9) << "recall" << std::setw(9) << "mrec" << std::setw(9)
          << "andcg" << "\n";
      for (const auto& b : buckets)
        out << std::right << std::setw(4) << b.n_answers << std::setw(7) << b.count
            << std::setw(8) << b.fraction << std::setw(9) << b.metrics.recall_rate
            << std::setw(9) << b.metrics.mrecall_rate << std::setw(9)
            << b.metrics.mean_alpha_ndcg << "\n";
    }
    return out.str();
  }
};

// Scores predictions against annotated questions. Passages are resolved
// through each question's candidate set; the ranked list fed to the metrics
// is the selection insertion order truncated to k. Questions without answer
// annotations are skipped with a warning.
inline EvalReport evaluate_predictions(
    const std::vector<Question>& questions,
    const std::unordered_map<std::string, const CandidateSet*>& candidates_by_qid,
    const std::vector<PredictionRecord>& predictions, const EvalConfig& config) {
  std::unordered_map<std::string, const PredictionRecord*> prediction_by_qid;
  for (const auto& p : predictions) prediction_by_qid[p.qid] = &p;

  std::vector<const Question*> ordered;
  for (const auto& q : questions) ordered.push_back(&q);
  std::sort(ordered.begin(), ordered.end(),
            [](const Question* a, const Question* b) { return a->id < b->id; });

  EvalReport report;
  report.k = config.k;
  report.alpha = config.alpha;
  report.beta = config.beta;
  report.gamma = config.gamma;

  std::vector<Tree> trees;
  for (const Question* q : ordered) {
    if (q->answer_set.empty()) {
      std::cerr << "warning: question " << q->id << " has no answer annotations, skipped\n";
      continue;
    }
    auto pit = prediction_by_qid.find(q->id);
    if (pit == prediction_by_qid.end())
      throw std::runtime_error("no prediction for question " + q->id);
    auto cit = candidates_by_qid.find(q->id);
    if (cit == candidates_by_qid.end())
      throw std::runtime_error("no candidate set for question " + q->id);
    const CandidateSet& candidates = *cit->second;
    const Tree& tree = pit->second->tree;

    std::vector<const Passage*> ranked;
    for (int index : tree.selected) {
      if (ranked.size() >= config.k) break;
      ranked.push_back(&candidates.passage(index));
    }

    QuestionEval record;
    record.qid = q->id;
    record.n_answers = static_cast<int>(q->answer_set.size());
    record.covered = covered_answer_count(q->answer_set, ranked);
    record.recall = record.covered > 0;
    record.mrecall = mrecall_at_k(q->answer_set, ranked, config.k);
    record.alpha_ndcg = alpha_ndcg(q->answer_set, ranked, config.k, config.alpha, config.ideal);
    record.depth = tree_depth(tree);
    report.per_question.push_back(std::move(record));
    trees.push_back(tree);
  }

  report.all = aggregate(report.per_question);
  std::vector<QuestionEval> multi;
  for (const auto& r : report.per_question)
    if (r.n_answers > 1) multi.push_back(r);
  report.multi = aggregate(multi);
  if (!trees.empty()) report.mean_depth = mean_tree_depth(trees);
  report.buckets = breakdown_by_answer_count(report.per_question);
  return report;
}

}  // namespace marr
