// marr: multi-answer retrieval reranking toolkit.
//
// Subcommands cover the whole pipeline: build a lexical index, retrieve
// candidate pools, preprocess regex-annotated questions, construct training
// supervision, train the log-linear scorer, decode passage sets, evaluate
// them, generate synthetic worlds, and run everything from one config file.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "marr/marr.hpp"

namespace {

using namespace marr;

std::vector<Question> load_sorted_questions(const std::string& path) {
  std::vector<Question> questions = read_questions_jsonl(path);
  std::sort(questions.begin(), questions.end(),
            [](const Question& a, const Question& b) { return a.id < b.id; });
  return questions;
}

// Candidate sets aligned with the given questions. The candidates file only
// stores passage ids; prior scores are recomputed separately from the index
// when one is supplied.
std::vector<CandidateSet> load_candidates_for(
    const std::vector<Question>& questions, const std::string& candidates_path,
    const std::unordered_map<std::string, const Passage*>& corpus) {
  const std::vector<CandidateRecord> records = read_candidates_jsonl(candidates_path);
  std::unordered_map<std::string, const CandidateRecord*> by_qid;
  for (const auto& r : records) by_qid[r.qid] = &r;

  std::vector<CandidateSet> out;
  for (const auto& q : questions) {
    auto it = by_qid.find(q.id);
    if (it == by_qid.end())
      throw std::runtime_error("no candidate record for question " + q.id);
    out.push_back(resolve_candidates(*it->second, corpus));
  }
  return out;
}

std::unique_ptr<Scorer> make_scorer(const std::string& kind, const std::string& weights_path,
                                    const std::string& table_path, double tau,
                                    double novelty_bonus) {
  if (kind == "coverage") return std::make_unique<CoverageOracleScorer>(tau, novelty_bonus);
  if (kind == "uniform") return std::make_unique<UniformScorer>();
  if (kind == "loglinear") {
    if (weights_path.empty()) throw std::runtime_error("--weights is required for loglinear");
    std::ifstream in(weights_path);
    if (!in) throw std::runtime_error("cannot open weights " + weights_path);
    json j;
    in >> j;
    return std::make_unique<LogLinearScorer>(LogLinearScorer::from_json(j));
  }
  if (kind == "tabular") {
    if (table_path.empty()) throw std::runtime_error("--table is required for tabular");
    std::ifstream in(table_path);
    if (!in) throw std::runtime_error("cannot open table " + table_path);
    json j;
    in >> j;
    return std::make_unique<TabularScorer>(TabularScorer::from_json(j));
  }
  throw std::runtime_error("unknown scorer: " + kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-answer retrieval reranking toolkit"};
  app.require_subcommand(1);

  // ---- index ----
  std::string corpus_path, out_path;
  auto* cmd_index = app.add_subcommand("index", "build a lexical index over a corpus");
  cmd_index->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  cmd_index->add_option("--out", out_path, "output index file")->required();

  // ---- retrieve ----
  std::string index_path, questions_path;
  std::size_t size = 100;
  std::uint64_t seed = 13;
  auto* cmd_retrieve = app.add_subcommand("retrieve", "retrieve candidate pools per question");
  cmd_retrieve->add_option("--index", index_path, "lexical index file")->required();
  cmd_retrieve->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  cmd_retrieve->add_option("--questions", questions_path, "questions JSONL")->required();
  cmd_retrieve->add_option("--size", size, "candidate pool size |B|")->capture_default_str();
  cmd_retrieve->add_option("--seed", seed, "index-permutation seed")->capture_default_str();
  cmd_retrieve->add_option("--out", out_path, "output candidates JSONL")->required();

  // ---- preprocess-trec ----
  std::string trec_path, discards_path;
  std::size_t max_matches = 100, max_tokens = 5;
  auto* cmd_trec =
      app.add_subcommand("preprocess-trec", "turn regex-annotated questions into answer sets");
  cmd_trec->add_option("--input", trec_path, "raw TREC questions JSONL")->required();
  cmd_trec->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  cmd_trec->add_option("--out", out_path, "output questions JSONL")->required();
  cmd_trec->add_option("--discards", discards_path, "discard log JSONL");
  cmd_trec->add_option("--max-matches", max_matches, "discard above this many distinct matches")
      ->capture_default_str();
  cmd_trec->add_option("--max-tokens", max_tokens, "drop answers longer than this")
      ->capture_default_str();

  // ---- make-supervision ----
  std::string candidates_path, mode = "dynamic";
  std::size_t k = 5;
  double gamma = 1.0, pool_fraction = 0.0;
  auto* cmd_sup = app.add_subcommand("make-supervision", "build training examples");
  cmd_sup->add_option("--questions", questions_path, "questions JSONL")->required();
  cmd_sup->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  cmd_sup->add_option("--candidates", candidates_path, "candidates JSONL")->required();
  cmd_sup->add_option("--index", index_path, "lexical index (for prior scores)");
  cmd_sup->add_option("--k", k, "prefix length")->capture_default_str();
  cmd_sup->add_option("--gamma", gamma, "Gumbel noise scale for negative sampling")
      ->capture_default_str();
  cmd_sup->add_option("--seed", seed, "sampling seed")->capture_default_str();
  cmd_sup->add_option("--pool-fraction", pool_fraction, "subsampled pool fraction (0 = off)")
      ->capture_default_str();
  cmd_sup->add_option("--mode", mode, "dynamic | teacher")->capture_default_str();
  cmd_sup->add_option("--out", out_path, "output supervision JSONL")->required();

  // ---- train ----
  std::string supervision_path;
  std::size_t epochs = 100;
  double lr = 0.5;
  bool stochastic = false;
  std::string train_mode = "dynamic";
  auto* cmd_train = app.add_subcommand("train", "train the log-linear scorer");
  cmd_train->add_option("--questions", questions_path, "questions JSONL")->required();
  cmd_train->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  cmd_train->add_option("--candidates", candidates_path, "candidates JSONL")->required();
  cmd_train->add_option("--supervision", supervision_path, "supervision JSONL")->required();
  cmd_train->add_option("--index", index_path, "lexical index (for prior scores)");
  cmd_train->add_option("--epochs", epochs, "training epochs")->capture_default_str();
  cmd_train->add_option("--lr", lr, "learning rate")->capture_default_str();
  cmd_train->add_option("--seed", seed, "training seed (stochastic order)")
      ->capture_default_str();
  cmd_train->add_flag("--stochastic", stochastic, "per-example updates in shuffled order");
  cmd_train->add_option("--mode", train_mode,
                        "dynamic (remaining-positive targets) | teacher (sequence NLL)")
      ->capture_default_str();
  cmd_train->add_option("--out", out_path, "output weights JSON")->required();

  // ---- decode ----
  std::string algo = "tree", scorer_kind = "coverage", weights_path, table_path;
  double beta = 0.0, tau = 0.5, novelty_bonus = 1.0;
  auto* cmd_decode = app.add_subcommand("decode", "decode passage selections");
  cmd_decode->add_option("--questions", questions_path, "questions JSONL")->required();
  cmd_decode->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  cmd_decode->add_option("--candidates", candidates_path, "candidates JSONL")->required();
  cmd_decode->add_option("--index", index_path, "lexical index (for prior scores)");
  cmd_decode->add_option("--algo", algo, "seq | tree | topk")->capture_default_str();
  cmd_decode->add_option("--k", k, "passages to select")->capture_default_str();
  cmd_decode->add_option("--beta", beta, "length-penalty exponent")->capture_default_str();
  cmd_decode->add_option("--seed", seed, "accepted for config symmetry; decoding is deterministic")
      ->capture_default_str();
  cmd_decode->add_option("--scorer", scorer_kind, "coverage | loglinear | uniform | tabular")
      ->capture_default_str();
  cmd_decode->add_option("--weights", weights_path, "weights JSON for loglinear");
  cmd_decode->add_option("--table", table_path, "row table JSON for tabular");
  cmd_decode->add_option("--tau", tau, "coverage oracle temperature")->capture_default_str();
  cmd_decode->add_option("--novelty-bonus", novelty_bonus, "coverage oracle novelty bonus")
      ->capture_default_str();
  cmd_decode->add_option("--out", out_path, "output predictions JSONL")->required();

  // ---- evaluate ----
  std::string predictions_path, table_out, ideal = "greedy";
  double alpha = 0.9;
  bool bucket = true;
  auto* cmd_eval = app.add_subcommand("evaluate", "score predictions against answer sets");
  cmd_eval->add_option("--questions", questions_path, "questions JSONL")->required();
  cmd_eval->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  cmd_eval->add_option("--candidates", candidates_path, "candidates JSONL")->required();
  cmd_eval->add_option("--predictions", predictions_path, "predictions JSONL")->required();
  cmd_eval->add_option("--k", k, "evaluation cutoff")->capture_default_str();
  cmd_eval->add_option("--alpha", alpha, "alpha-nDCG redundancy penalty")->capture_default_str();
  cmd_eval->add_option("--ideal", ideal, "greedy | brute ideal for alpha-nDCG")
      ->capture_default_str();
  cmd_eval->add_flag("--bucket,!--no-bucket", bucket, "include answer-count breakdown")
      ->capture_default_str();
  cmd_eval->add_option("--out", out_path, "output report JSON")->required();
  cmd_eval->add_option("--table", table_out, "output aligned text table");

  // ---- synth ----
  std::size_t num_questions = 50;
  std::vector<int> answers_choices = {2, 3};
  std::vector<int> duplication = {1};
  int distractors = 10;
  std::string out_corpus, out_questions;
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic world");
  cmd_synth->add_option("--questions", num_questions, "number of questions")
      ->capture_default_str();
  cmd_synth->add_option("--answers", answers_choices, "answer-count choices (uniform)")
      ->capture_default_str();
  cmd_synth->add_option("--dup", duplication, "passages per answer (answer j gets entry min(j, last))")
      ->capture_default_str();
  cmd_synth->add_option("--distractors", distractors, "distractor passages per question")
      ->capture_default_str();
  cmd_synth->add_option("--seed", seed, "world seed")->capture_default_str();
  cmd_synth->add_option("--out-corpus", out_corpus, "output corpus JSONL")->required();
  cmd_synth->add_option("--out-questions", out_questions, "output questions JSONL")->required();

  // ---- run ----
  std::string config_path;
  auto* cmd_run = app.add_subcommand("run", "run the whole pipeline from a config file");
  cmd_run->add_option("--config", config_path, "pipeline config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_index) {
      const auto corpus = read_corpus_jsonl(corpus_path);
      save_index(build_index(corpus), out_path);
      std::cout << "indexed " << corpus.size() << " passages -> " << out_path << "\n";
    } else if (*cmd_retrieve) {
      const auto corpus = read_corpus_jsonl(corpus_path);
      const auto corpus_map = corpus_by_id(corpus);
      const auto index = load_index(index_path);
      const auto questions = load_sorted_questions(questions_path);
      std::vector<CandidateRecord> records;
      for (const auto& q : questions)
        records.push_back(
            to_record(retrieve(index, corpus_map, q, size, derive_seed(seed, q.id))));
      write_candidates_jsonl(out_path, records);
      std::cout << "retrieved candidates for " << records.size() << " questions -> " << out_path
                << "\n";
    } else if (*cmd_trec) {
      const auto corpus = read_corpus_jsonl(corpus_path);
      const auto raw = read_trec_jsonl(trec_path);
      std::vector<Question> questions;
      std::vector<DiscardRecord> discards;
      for (const auto& t : raw) {
        TrecResult result =
            trec_extract_answers(t.id, t.answer_regex, corpus, max_matches, max_tokens);
        if (auto* answers = std::get_if<AnswerSet>(&result))
          questions.push_back({t.id, t.question, std::move(*answers)});
        else {
          const auto& d = std::get<TrecDiscard>(result);
          discards.push_back({t.id, d.reason, d.match_count});
        }
      }
      write_questions_jsonl(out_path, questions);
      if (!discards_path.empty()) write_discards_jsonl(discards_path, discards);
      std::cout << "kept " << questions.size() << " questions, discarded " << discards.size()
                << "\n";
    } else if (*cmd_sup) {
      const auto corpus = read_corpus_jsonl(corpus_path);
      const auto corpus_map = corpus_by_id(corpus);
      const auto questions = load_sorted_questions(questions_path);
      std::optional<LexicalIndex> index;
      if (!index_path.empty()) index = load_index(index_path);
      auto candidates = load_candidates_for(questions, candidates_path, corpus_map);
      if (index)
        for (std::size_t i = 0; i < questions.size(); ++i)
          candidates[i] = rescore_candidates(*index, questions[i], std::move(candidates[i]));
      std::vector<SupervisionExample> examples;
      for (std::size_t i = 0; i < questions.size(); ++i) {
        if (mode == "teacher") {
          auto sequence = build_teacher_forcing_example(
              questions[i], candidates[i], k, baseline_order_from_priors(candidates[i]));
          if (!sequence) continue;
          examples.push_back({questions[i].id, *sequence, *sequence, {}});
        } else {
          auto example =
              build_dynamic_oracle_example(questions[i], candidates[i], k, gamma,
                                           derive_seed(seed, questions[i].id), pool_fraction);
          if (example) examples.push_back(std::move(*example));
        }
      }
      write_supervision_jsonl(out_path, examples);
      std::cout << "wrote " << examples.size() << " supervision examples -> " << out_path << "\n";
    } else if (*cmd_train) {
      const auto corpus = read_corpus_jsonl(corpus_path);
      const auto corpus_map = corpus_by_id(corpus);
      const auto questions = load_sorted_questions(questions_path);
      std::optional<LexicalIndex> index;
      if (!index_path.empty()) index = load_index(index_path);
      auto candidates = load_candidates_for(questions, candidates_path, corpus_map);
      if (index)
        for (std::size_t i = 0; i < questions.size(); ++i)
          candidates[i] = rescore_candidates(*index, questions[i], std::move(candidates[i]));
      const auto examples = read_supervision_jsonl(supervision_path);
      std::unordered_map<std::string, std::size_t> question_pos;
      for (std::size_t i = 0; i < questions.size(); ++i) question_pos[questions[i].id] = i;
      std::vector<TrainItem> items;
      for (const auto& e : examples) {
        auto it = question_pos.find(e.question_id);
        if (it == question_pos.end())
          throw std::runtime_error("supervision example for unknown question " + e.question_id);
        items.push_back({&questions[it->second], &candidates[it->second], e});
      }
      TrainOptions options{epochs, lr, seed, stochastic,
                           train_mode == "teacher" ? TrainMode::teacher_forcing
                                                   : TrainMode::dynamic_oracle};
      const TrainResult result = train_loglinear(items, options);
      std::vector<std::pair<std::string, double>> weights;
      for (std::size_t f = 0; f < kNumFeatures; ++f)
        weights.emplace_back(kFeatureNames[f], result.scorer.weights()[f]);
      write_weights_json(out_path, weights);
      std::cout << "trained on " << items.size() << " examples, mean loss "
                << result.epoch_losses.front() << " -> " << result.final_loss << ", weights -> "
                << out_path << "\n";
    } else if (*cmd_decode) {
      const auto corpus = read_corpus_jsonl(corpus_path);
      const auto corpus_map = corpus_by_id(corpus);
      const auto questions = load_sorted_questions(questions_path);
      std::optional<LexicalIndex> index;
      if (!index_path.empty()) index = load_index(index_path);
      auto candidates = load_candidates_for(questions, candidates_path, corpus_map);
      if (index)
        for (std::size_t i = 0; i < questions.size(); ++i)
          candidates[i] = rescore_candidates(*index, questions[i], std::move(candidates[i]));
      const auto scorer = make_scorer(scorer_kind, weights_path, table_path, tau, novelty_bonus);
      std::vector<PredictionRecord> predictions;
      for (std::size_t i = 0; i < questions.size(); ++i) {
        const std::size_t kk = std::min(k, static_cast<std::size_t>(candidates[i].size()));
        Tree tree;
        if (algo == "seq")
          tree = seq_decode(*scorer, questions[i], candidates[i], kk);
        else if (algo == "tree")
          tree = tree_decode(*scorer, questions[i], candidates[i], kk, beta);
        else if (algo == "topk")
          tree = top_k_decode(*scorer, questions[i], candidates[i], kk);
        else
          throw std::runtime_error("unknown decode algorithm: " + algo);
        predictions.push_back({questions[i].id, std::move(tree)});
      }
      write_predictions_jsonl(out_path, predictions);
      std::cout << "decoded " << predictions.size() << " questions -> " << out_path << "\n";
    } else if (*cmd_eval) {
      const auto corpus = read_corpus_jsonl(corpus_path);
      const auto corpus_map = corpus_by_id(corpus);
      const auto questions = load_sorted_questions(questions_path);
      const auto candidates = load_candidates_for(questions, candidates_path, corpus_map);
      const auto predictions = read_predictions_jsonl(predictions_path);
      std::unordered_map<std::string, const CandidateSet*> by_qid;
      for (const auto& c : candidates) by_qid[c.question_id] = &c;
      EvalConfig config;
      config.k = k;
      config.alpha = alpha;
      config.ideal = ideal == "brute" ? IdealMode::brute_force : IdealMode::greedy;
      EvalReport report = evaluate_predictions(questions, by_qid, predictions, config);
      if (!bucket) report.buckets.clear();
      std::ofstream json_out(out_path, std::ios::binary);
      if (!json_out) throw std::runtime_error("cannot write " + out_path);
      json_out << report.to_json().dump(2) << "\n";
      if (!table_out.empty()) {
        std::ofstream t(table_out, std::ios::binary);
        if (!t) throw std::runtime_error("cannot write " + table_out);
        t << report.to_table();
      }
      std::cout << report.to_table();
    } else if (*cmd_synth) {
      SyntheticWorldSpec spec;
      spec.num_questions = num_questions;
      spec.answers_per_question = answers_choices;
      spec.passages_per_answer = duplication;
      spec.distractors_per_question = distractors;
      const SyntheticWorld world = generate_synthetic_world(spec, seed);
      write_corpus_jsonl(out_corpus, world.corpus);
      write_questions_jsonl(out_questions, world.questions);
      std::cout << "generated " << world.questions.size() << " questions over "
                << world.corpus.size() << " passages\n";
    } else if (*cmd_run) {
      const PipelineConfig config = PipelineConfig::load(config_path);
      const PipelineResult result = run_pipeline(config);
      std::cout << result.report.to_table();
      std::cout << "report -> " << result.artifacts.report_json.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
