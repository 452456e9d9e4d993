#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "marr/matching.hpp"
#include "marr/pipeline.hpp"
#include "marr/synthetic.hpp"

using namespace marr;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "marr_pipeline_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int coverage_count(const std::vector<Passage>& corpus, const DistinctAnswer& answer) {
  int count = 0;
  for (const auto& p : corpus)
    if (covers(p, answer)) ++count;
  return count;
}

}  // namespace

TEST_CASE("synthetic world generation", "[synthetic]") {
  SECTION("one answer, one passage") {
    SyntheticWorldSpec spec;
    spec.num_questions = 1;
    spec.answers_per_question = {1};
    spec.passages_per_answer = {1};
    spec.distractors_per_question = 0;
    const SyntheticWorld world = generate_synthetic_world(spec, 3);
    REQUIRE(world.questions.size() == 1);
    REQUIRE(world.corpus.size() == 1);
    CHECK(coverage_count(world.corpus, world.questions[0].answer_set.answers[0]) == 1);
  }
  SECTION("duplication controls per-answer coverage counts") {
    SyntheticWorldSpec spec;
    spec.num_questions = 4;
    spec.answers_per_question = {2};
    spec.passages_per_answer = {5, 1};
    spec.distractors_per_question = 3;
    const SyntheticWorld world = generate_synthetic_world(spec, 11);
    for (const auto& q : world.questions) {
      CHECK(coverage_count(world.corpus, q.answer_set.answers[0]) == 5);
      CHECK(coverage_count(world.corpus, q.answer_set.answers[1]) == 1);
    }
  }
  SECTION("every answer is covered and distractors cover nothing") {
    SyntheticWorldSpec spec;
    spec.num_questions = 10;
    const SyntheticWorld world = generate_synthetic_world(spec, 5);
    for (const auto& q : world.questions)
      for (const auto& answer : q.answer_set.answers)
        CHECK(coverage_count(world.corpus, answer) >= 1);
    for (const auto& p : world.corpus) {
      if (p.id.find("-d") == std::string::npos) continue;
      for (const auto& q : world.questions)
        for (const auto& answer : q.answer_set.answers) CHECK_FALSE(covers(p, answer));
    }
  }
  SECTION("seed changes the world but keeps the invariants") {
    SyntheticWorldSpec spec;
    spec.num_questions = 3;
    const SyntheticWorld a = generate_synthetic_world(spec, 1);
    const SyntheticWorld b = generate_synthetic_world(spec, 2);
    CHECK(a.corpus[0].text != b.corpus[0].text);
    for (const auto& q : b.questions)
      for (const auto& answer : q.answer_set.answers)
        CHECK(coverage_count(b.corpus, answer) >= 1);
  }
  SECTION("generated worlds pass dataset validation") {
    SyntheticWorldSpec spec;
    spec.num_questions = 5;
    const SyntheticWorld world = generate_synthetic_world(spec, 8);
    CHECK(validate_dataset(world.corpus, world.questions).ok());
  }
  SECTION("spec validation") {
    SyntheticWorldSpec spec;
    spec.passages_per_answer = {0};
    CHECK_THROWS(generate_synthetic_world(spec, 1));
  }
}

TEST_CASE("pipeline on a three-question fixture", "[pipeline]") {
  const auto dir = fresh_dir("three_question");
  SyntheticWorldSpec spec;
  spec.num_questions = 3;
  spec.answers_per_question = {2};
  spec.passages_per_answer = {2, 1};
  spec.distractors_per_question = 4;
  const SyntheticWorld world = generate_synthetic_world(spec, 77);
  write_corpus_jsonl((dir / "corpus.jsonl").string(), world.corpus);
  write_questions_jsonl((dir / "questions.jsonl").string(), world.questions);

  PipelineConfig config;
  config.corpus_path = (dir / "corpus.jsonl").string();
  config.questions_path = (dir / "questions.jsonl").string();
  config.outdir = (dir / "out").string();
  config.candidate_size = 10;
  config.k = 2;
  config.scorer = "coverage";
  config.algo = "seq";

  const PipelineResult result = run_pipeline(config);
  CHECK(result.report.per_question.size() == 3);
  CHECK(result.report.all.count == 3);
  for (const auto& r : result.report.per_question) CHECK(r.depth == 2);  // seq chains
  CHECK(std::filesystem::exists(result.artifacts.index));
  CHECK(std::filesystem::exists(result.artifacts.candidates));
  CHECK(std::filesystem::exists(result.artifacts.predictions));
  CHECK(std::filesystem::exists(result.artifacts.report_json));
  CHECK(std::filesystem::exists(result.artifacts.report_table));

  SECTION("written artifacts parse back") {
    const auto records = read_candidates_jsonl(result.artifacts.candidates.string());
    CHECK(records.size() == 3);
    const auto predictions = read_predictions_jsonl(result.artifacts.predictions.string());
    CHECK(predictions.size() == 3);
    for (const auto& p : predictions) CHECK(p.tree.selected.size() == 2);
  }
}

TEST_CASE("pipeline reruns are byte-identical", "[pipeline]") {
  const auto dir = fresh_dir("determinism");
  SyntheticWorldSpec spec;
  spec.num_questions = 4;
  const SyntheticWorld world = generate_synthetic_world(spec, 123);
  write_corpus_jsonl((dir / "corpus.jsonl").string(), world.corpus);
  write_questions_jsonl((dir / "questions.jsonl").string(), world.questions);

  PipelineConfig config;
  config.corpus_path = (dir / "corpus.jsonl").string();
  config.questions_path = (dir / "questions.jsonl").string();
  config.candidate_size = 12;
  config.k = 3;
  config.scorer = "loglinear";
  config.train = true;
  config.epochs = 20;
  config.algo = "tree";
  config.beta = 1.0;

  config.outdir = (dir / "out_a").string();
  const PipelineResult a = run_pipeline(config);
  config.outdir = (dir / "out_b").string();
  const PipelineResult b = run_pipeline(config);

  CHECK(slurp(a.artifacts.report_json) == slurp(b.artifacts.report_json));
  CHECK(slurp(a.artifacts.report_table) == slurp(b.artifacts.report_table));
  CHECK(slurp(a.artifacts.predictions) == slurp(b.artifacts.predictions));
  CHECK(slurp(a.artifacts.candidates) == slurp(b.artifacts.candidates));
  CHECK(slurp(a.artifacts.supervision) == slurp(b.artifacts.supervision));
  CHECK(slurp(a.artifacts.weights) == slurp(b.artifacts.weights));
}

TEST_CASE("pipeline config validation", "[pipeline]") {
  PipelineConfig config;
  config.corpus_path = "c.jsonl";
  config.questions_path = "q.jsonl";
  config.outdir = "out";

  SECTION("k larger than the candidate pool") {
    config.k = 200;
    config.candidate_size = 100;
    CHECK_THROWS_WITH(config.validate(), Catch::Matchers::ContainsSubstring("exceeds"));
  }
  SECTION("unknown scorer / algo / ideal") {
    config.scorer = "neural";
    CHECK_THROWS(config.validate());
    config.scorer = "coverage";
    config.algo = "beam";
    CHECK_THROWS(config.validate());
    config.algo = "tree";
    config.ideal = "exactish";
    CHECK_THROWS(config.validate());
  }
  SECTION("loglinear needs weights or training") {
    config.scorer = "loglinear";
    config.train = false;
    CHECK_THROWS(config.validate());
    config.weights_path = "w.json";
    CHECK_NOTHROW(config.validate());
  }
  SECTION("unknown config keys are rejected") {
    const json j{{"corpus", "c"}, {"questions", "q"}, {"outdir", "o"}, {"typo_key", 1}};
    CHECK_THROWS_WITH(PipelineConfig::from_json(j),
                      Catch::Matchers::ContainsSubstring("typo_key"));
  }
  SECTION("a config file round-trips through from_json") {
    const json j{{"corpus", "c"},  {"questions", "q"}, {"outdir", "o"},
                 {"candidate_size", 30}, {"k", 4},
                 {"train", json{{"enabled", true}, {"epochs", 10}}},
                 {"seeds", json{{"permutation", 9}}},
                 {"scorer", "loglinear"}};
    const PipelineConfig c = PipelineConfig::from_json(j);
    CHECK(c.candidate_size == 30);
    CHECK(c.k == 4);
    CHECK(c.train);
    CHECK(c.epochs == 10);
    CHECK(c.seed_permutation == 9);
    CHECK(c.seed_supervision == 2);  // untouched default
  }
}

TEST_CASE("pipeline stage errors carry the stage name", "[pipeline]") {
  PipelineConfig config;
  config.corpus_path = "/nonexistent/corpus.jsonl";
  config.questions_path = "/nonexistent/questions.jsonl";
  config.outdir = (fresh_dir("stage_error") / "out").string();
  try {
    run_pipeline(config);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("stage load") != std::string::npos);
  }
}
