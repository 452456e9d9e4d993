#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "marr/io.hpp"
#include "marr/rng.hpp"
#include "marr/types.hpp"
#include "marr/validate.hpp"

using namespace marr;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "marr_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

Question make_question(std::mt19937_64& rng, int i) {
  Question q;
  q.id = "q" + std::to_string(i);
  q.text = "who played mark number " + std::to_string(i);
  const std::size_t groups = 1 + next_below(rng, 3);
  for (std::size_t g = 0; g < groups; ++g) {
    DistinctAnswer answer;
    const std::size_t aliases = 1 + next_below(rng, 2);
    for (std::size_t a = 0; a < aliases; ++a)
      answer.push_back("alias" + std::to_string(i) + "g" + std::to_string(g) + "a" +
                       std::to_string(a));
    q.answer_set.answers.push_back(answer);
  }
  return q;
}

}  // namespace

TEST_CASE("serialization round-trips are identities", "[io]") {
  std::mt19937_64 rng(7);

  SECTION("passages") {
    const Passage p{"p1", "Glenn Quinn", "He was best known for Mark Healy on Roseanne."};
    CHECK(passage_from_json(to_json(p)) == p);
  }
  SECTION("questions, including aliases with raw unicode whitespace") {
    Question q = make_question(rng, 3);
    q.answer_set.answers.push_back({"new\xc2\xa0york", "new york"});
    CHECK(question_from_json(to_json(q)) == q);
    const Question inference_only{"q9", "who is it", {}};
    CHECK(question_from_json(to_json(inference_only)) == inference_only);
  }
  SECTION("candidate records") {
    const CandidateRecord r{"q1", {"p3", "p1", "p2"}, 99};
    CHECK(candidate_record_from_json(to_json(r)) == r);
  }
  SECTION("predictions") {
    PredictionRecord r;
    r.qid = "q1";
    r.tree.sequences = {{}, {3}, {3, 1}, {2}};
    r.tree.selected = {3, 1, 2};
    const PredictionRecord parsed = prediction_from_json(to_json(r));
    CHECK(parsed.qid == r.qid);
    CHECK(parsed.tree.sequences == r.tree.sequences);
    CHECK(parsed.tree.selected == r.tree.selected);
  }
  SECTION("supervision examples") {
    const SupervisionExample e{"q1", {2, 5}, {5, 9, 2}, {2, 5, 9, 11}};
    const SupervisionExample parsed = supervision_from_json(to_json(e));
    CHECK(parsed.question_id == e.question_id);
    CHECK(parsed.positives == e.positives);
    CHECK(parsed.prefix == e.prefix);
    CHECK(parsed.pool == e.pool);
  }
  SECTION("trec questions") {
    const TrecQuestion t{"t1", "where did lindbergh take off", "Long Island|New\\s?York"};
    CHECK(trec_question_from_json(to_json(t)) == t);
  }
}

TEST_CASE("jsonl files round-trip and report line numbers on bad input", "[io]") {
  std::mt19937_64 rng(11);
  std::vector<Question> questions;
  for (int i = 0; i < 5; ++i) questions.push_back(make_question(rng, i));

  const auto path = temp_file("questions.jsonl");
  write_questions_jsonl(path.string(), questions);
  CHECK(read_questions_jsonl(path.string()) == questions);

  std::ofstream bad(path, std::ios::app);
  bad << "{not json\n";
  bad.close();
  try {
    read_questions_jsonl(path.string());
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":6:") != std::string::npos);
  }
}

TEST_CASE("prediction loader rejects malformed trees", "[io]") {
  json j{{"qid", "q1"}, {"tree", json::array({json::array()})}, {"set", {1}}};
  CHECK_THROWS(prediction_from_json(j));  // set does not match the (empty) tree

  json orphan{{"qid", "q1"},
              {"tree", json::array({json::array(), {3, 1}})},
              {"set", {1}}};
  CHECK_THROWS(prediction_from_json(orphan));  // [3,1] extends no existing sequence
}

TEST_CASE("candidate index mapping is a bijection", "[types]") {
  CandidateSet c;
  c.question_id = "q1";
  for (int i = 0; i < 6; ++i) c.passages.push_back({"p" + std::to_string(i), "", "text"});

  std::vector<int> hit;
  for (int index = 1; index <= c.size(); ++index) {
    const Passage& p = c.passage(index);
    const auto back = c.index_of(p.id);
    REQUIRE(back.has_value());
    CHECK(*back == index);
    hit.push_back(index);
  }
  std::sort(hit.begin(), hit.end());
  CHECK(hit == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK_THROWS(c.passage(0));
  CHECK_THROWS(c.passage(7));
}

TEST_CASE("standardized prior scores", "[types]") {
  CandidateSet c;
  for (int i = 0; i < 4; ++i) c.passages.push_back({"p" + std::to_string(i), "", "t"});
  SECTION("absent scores give zeros") {
    const auto z = standardized_prior_scores(c);
    CHECK(z == std::vector<double>{0, 0, 0, 0});
  }
  SECTION("z-scores have zero mean, unit variance") {
    c.prior_scores = {1.0, 2.0, 3.0, 4.0};
    const auto z = standardized_prior_scores(c);
    double mean = 0, var = 0;
    for (double v : z) mean += v;
    mean /= 4;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= 4;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::abs(var - 1.0) < 1e-12);
    CHECK(z[0] < z[1]);
  }
  SECTION("constant scores give zeros") {
    c.prior_scores = {2.0, 2.0, 2.0, 2.0};
    CHECK(standardized_prior_scores(c) == std::vector<double>{0, 0, 0, 0});
  }
}

TEST_CASE("dataset validation catches the documented violations", "[validate]") {
  std::vector<Passage> corpus{{"p1", "", "some text"}, {"p2", "", "other text"}};
  std::vector<Question> questions{{"q1", "who", {{{"alias a"}}}}};

  SECTION("well-formed fixture yields an empty report") {
    std::vector<Question> three;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 3; ++i) three.push_back(make_question(rng, i));
    std::vector<CandidateRecord> candidates{{"q0", {"p1", "p2"}, 1}};
    CHECK(validate_dataset(corpus, three, candidates).ok());
  }
  SECTION("empty answer set") {
    questions.push_back({"q2", "what", {}});
    const auto report = validate_dataset(corpus, questions);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].message == "empty answer set");
  }
  SECTION("duplicate passage index in a candidate set") {
    std::vector<CandidateRecord> candidates{{"q1", {"p1", "p1"}, 0}};
    const auto report = validate_dataset(corpus, questions, candidates);
    REQUIRE_FALSE(report.ok());
    CHECK(report.violations[0].message.find("duplicate passage") != std::string::npos);
  }
  SECTION("duplicate passage id in corpus") {
    corpus.push_back({"p1", "", "again"});
    CHECK_FALSE(validate_dataset(corpus, questions).ok());
  }
  SECTION("overlapping alias groups after normalization") {
    questions[0].answer_set.answers = {{"New York"}, {"new  york!"}};
    CHECK_FALSE(validate_dataset(corpus, questions).ok());
  }
  SECTION("empty passage text") {
    corpus[1].text = "";
    CHECK_FALSE(validate_dataset(corpus, questions).ok());
  }
}
