#pragma once
// End-to-end pipeline: index -> retrieve -> (train) -> decode -> evaluate.
// Every stage writes its artifact under the output directory so any stage
// can be re-run in isolation, and all randomness flows from the named seeds
// in the config, so a rerun of the same config is byte-identical.

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "marr/decoding.hpp"
#include "marr/io.hpp"
#include "marr/lexical_index.hpp"
#include "marr/report.hpp"
#include "marr/scorer.hpp"
#include "marr/supervision.hpp"
#include "marr/validate.hpp"

namespace marr {

struct PipelineConfig {
  std::string corpus_path;
  std::string questions_path;
  std::string outdir;

  std::size_t candidate_size = 100;
  std::size_t k = 5;
  double beta = 0.0;
  double gamma = 1.0;
  double alpha = 0.9;

  std::string scorer = "coverage";  // coverage | loglinear | uniform
  std::string algo = "tree";        // seq | tree | topk
  std::string ideal = "greedy";     // greedy | brute

  bool train = false;
  std::size_t epochs = 100;
  double learning_rate = 0.5;
  bool stochastic = false;
  double pool_fraction = 0.0;
  std::string weights_path;  // preload log-linear weights instead of training

  double coverage_tau = 0.5;
  double coverage_novelty_bonus = 1.0;

  std::uint64_t seed_permutation = 1;
  std::uint64_t seed_supervision = 2;
  std::uint64_t seed_training = 3;

  void validate() const {
    if (corpus_path.empty() || questions_path.empty() || outdir.empty())
      throw std::invalid_argument("config needs corpus, questions and outdir paths");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (candidate_size < 1) throw std::invalid_argument("candidate_size must be >= 1");
    if (k > candidate_size)
      throw std::invalid_argument("k (" + std::to_string(k) + ") exceeds candidate_size (" +
                                  std::to_string(candidate_size) + ")");
    if (scorer != "coverage" && scorer != "loglinear" && scorer != "uniform")
      throw std::invalid_argument("unknown scorer: " + scorer);
    if (algo != "seq" && algo != "tree" && algo != "topk")
      throw std::invalid_argument("unknown decode algorithm: " + algo);
    if (ideal != "greedy" && ideal != "brute")
      throw std::invalid_argument("unknown ideal mode: " + ideal);
    if (pool_fraction < 0.0 || pool_fraction > 1.0)
      throw std::invalid_argument("pool_fraction must be in [0, 1]");
    if (scorer == "loglinear" && !train && weights_path.empty())
      throw std::invalid_argument("loglinear scorer needs train=true or a weights file");
  }

  static PipelineConfig from_json(const json& j) {
    static const std::unordered_set<std::string> known = {
        "corpus", "questions", "outdir",   "candidate_size", "k",     "beta",  "gamma",
        "alpha",  "scorer",    "algo",     "ideal",          "train", "seeds", "coverage",
        "weights"};
    static const std::unordered_set<std::string> known_train = {
        "enabled", "epochs", "learning_rate", "stochastic", "pool_fraction"};
    static const std::unordered_set<std::string> known_seeds = {"permutation", "supervision",
                                                                "training"};
    static const std::unordered_set<std::string> known_coverage = {"tau", "novelty_bonus"};
    auto check_keys = [](const json& obj, const std::unordered_set<std::string>& allowed,
                         const std::string& where) {
      for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
          throw std::invalid_argument("unknown config key: " + where + "." + it.key());
    };
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!known.count(it.key()))
        throw std::invalid_argument("unknown config key: " + it.key());
    if (j.contains("train")) check_keys(j.at("train"), known_train, "train");
    if (j.contains("seeds")) check_keys(j.at("seeds"), known_seeds, "seeds");
    if (j.contains("coverage")) check_keys(j.at("coverage"), known_coverage, "coverage");

    PipelineConfig c;
    c.corpus_path = j.at("corpus").get<std::string>();
    c.questions_path = j.at("questions").get<std::string>();
    c.outdir = j.at("outdir").get<std::string>();
    c.candidate_size = j.value("candidate_size", c.candidate_size);
    c.k = j.value("k", c.k);
    c.beta = j.value("beta", c.beta);
    c.gamma = j.value("gamma", c.gamma);
    c.alpha = j.value("alpha", c.alpha);
    c.scorer = j.value("scorer", c.scorer);
    c.algo = j.value("algo", c.algo);
    c.ideal = j.value("ideal", c.ideal);
    c.weights_path = j.value("weights", c.weights_path);
    if (j.contains("train")) {
      const auto& t = j.at("train");
      c.train = t.value("enabled", false);
      c.epochs = t.value("epochs", c.epochs);
      c.learning_rate = t.value("learning_rate", c.learning_rate);
      c.stochastic = t.value("stochastic", c.stochastic);
      c.pool_fraction = t.value("pool_fraction", c.pool_fraction);
    }
    if (j.contains("coverage")) {
      const auto& cov = j.at("coverage");
      c.coverage_tau = cov.value("tau", c.coverage_tau);
      c.coverage_novelty_bonus = cov.value("novelty_bonus", c.coverage_novelty_bonus);
    }
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      c.seed_permutation = s.value("permutation", c.seed_permutation);
      c.seed_supervision = s.value("supervision", c.seed_supervision);
      c.seed_training = s.value("training", c.seed_training);
    }
    c.validate();
    return c;
  }

  static PipelineConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    in >> j;
    return from_json(j);
  }
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage ") + name + ": " + e.what());
  }
}

}  // namespace detail

struct PipelineArtifacts {
  std::filesystem::path index;
  std::filesystem::path candidates;
  std::filesystem::path supervision;
  std::filesystem::path weights;
  std::filesystem::path predictions;
  std::filesystem::path report_json;
  std::filesystem::path report_table;
};

struct PipelineResult {
  EvalReport report;
  PipelineArtifacts artifacts;
};

inline PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  const std::filesystem::path out(config.outdir);
  std::filesystem::create_directories(out);

  PipelineArtifacts artifacts{
      out / "index.json",       out / "candidates.jsonl", out / "supervision.jsonl",
      out / "weights.json",     out / "predictions.jsonl", out / "report.json",
      out / "report.txt"};

  // load + validate
  std::vector<Passage> corpus;
  std::vector<Question> questions;
  detail::stage("load", [&] {
    corpus = read_corpus_jsonl(config.corpus_path);
    questions = read_questions_jsonl(config.questions_path);
    std::sort(questions.begin(), questions.end(),
              [](const Question& a, const Question& b) { return a.id < b.id; });
    const ValidationReport report = validate_dataset(corpus, questions);
    if (!report.ok())
      throw std::runtime_error("dataset is not well-formed:\n" + report.to_string());
    return 0;
  });
  const auto corpus_map = corpus_by_id(corpus);

  // index
  LexicalIndex index;
  detail::stage("index", [&] {
    index = build_index(corpus);
    save_index(index, artifacts.index.string());
    return 0;
  });

  // retrieve
  std::vector<CandidateSet> candidates;
  detail::stage("retrieve", [&] {
    std::vector<CandidateRecord> records;
    for (const auto& q : questions) {
      candidates.push_back(retrieve(index, corpus_map, q, config.candidate_size,
                                    derive_seed(config.seed_permutation, q.id)));
      records.push_back(to_record(candidates.back()));
    }
    write_candidates_jsonl(artifacts.candidates.string(), records);
    return 0;
  });

  // supervision + training (log-linear only)
  std::unique_ptr<Scorer> scorer;
  if (config.scorer == "loglinear" && config.train) {
    std::vector<TrainItem> items;
    detail::stage("supervision", [&] {
      std::vector<SupervisionExample> examples;
      for (std::size_t i = 0; i < questions.size(); ++i) {
        auto example = build_dynamic_oracle_example(
            questions[i], candidates[i], config.k, config.gamma,
            derive_seed(config.seed_supervision, questions[i].id), config.pool_fraction);
        if (!example) continue;
        items.push_back({&questions[i], &candidates[i], *example});
        examples.push_back(std::move(*example));
      }
      write_supervision_jsonl(artifacts.supervision.string(), examples);
      return 0;
    });
    detail::stage("train", [&] {
      TrainOptions options;
      options.epochs = config.epochs;
      options.learning_rate = config.learning_rate;
      options.seed = config.seed_training;
      options.stochastic = config.stochastic;
      const TrainResult result = train_loglinear(items, options);
      std::vector<std::pair<std::string, double>> weights;
      for (std::size_t f = 0; f < kNumFeatures; ++f)
        weights.emplace_back(kFeatureNames[f], result.scorer.weights()[f]);
      write_weights_json(artifacts.weights.string(), weights);
      scorer = std::make_unique<LogLinearScorer>(result.scorer);
      return 0;
    });
  } else {
    detail::stage("scorer", [&] {
      if (config.scorer == "coverage")
        scorer = std::make_unique<CoverageOracleScorer>(config.coverage_tau,
                                                        config.coverage_novelty_bonus);
      else if (config.scorer == "uniform")
        scorer = std::make_unique<UniformScorer>();
      else {  // loglinear with preloaded weights
        std::ifstream in(config.weights_path);
        if (!in) throw std::runtime_error("cannot open weights " + config.weights_path);
        json j;
        in >> j;
        scorer = std::make_unique<LogLinearScorer>(LogLinearScorer::from_json(j));
      }
      return 0;
    });
  }

  // decode
  std::vector<PredictionRecord> predictions;
  detail::stage("decode", [&] {
    for (std::size_t i = 0; i < questions.size(); ++i) {
      const std::size_t k = std::min(config.k, static_cast<std::size_t>(candidates[i].size()));
      Tree tree;
      if (config.algo == "seq")
        tree = seq_decode(*scorer, questions[i], candidates[i], k);
      else if (config.algo == "tree")
        tree = tree_decode(*scorer, questions[i], candidates[i], k, config.beta);
      else
        tree = top_k_decode(*scorer, questions[i], candidates[i], k);
      predictions.push_back({questions[i].id, std::move(tree)});
    }
    write_predictions_jsonl(artifacts.predictions.string(), predictions);
    return 0;
  });

  // evaluate
  PipelineResult result;
  result.artifacts = artifacts;
  detail::stage("evaluate", [&] {
    std::unordered_map<std::string, const CandidateSet*> by_qid;
    for (const auto& c : candidates) by_qid[c.question_id] = &c;
    EvalConfig eval_config;
    eval_config.k = config.k;
    eval_config.alpha = config.alpha;
    eval_config.ideal = config.ideal == "brute" ? IdealMode::brute_force : IdealMode::greedy;
    eval_config.beta = config.beta;
    eval_config.gamma = config.gamma;
    result.report = evaluate_predictions(questions, by_qid, predictions, eval_config);
    std::ofstream json_out(artifacts.report_json, std::ios::binary);
    json_out << result.report.to_json().dump(2) << "\n";
    std::ofstream table_out(artifacts.report_table, std::ios::binary);
    table_out << result.report.to_table();
    return 0;
  });
  return result;
}

}  // namespace marr
