#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <variant>
#include <vector>

#include "marr/matching.hpp"
#include "marr/rng.hpp"
#include "marr/text.hpp"

using namespace marr;

namespace {

// Independent containment oracle: tokenize both sides and look for the alias
// token list as a contiguous run of passage tokens.
bool oracle_covers(const std::string& passage_text, const std::string& alias) {
  const std::vector<std::string> hay = tokens(passage_text);
  const std::vector<std::string> needle = tokens(alias);
  if (needle.empty() || hay.size() < needle.size()) return false;
  for (std::size_t start = 0; start + needle.size() <= hay.size(); ++start) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j)
      if (hay[start + j] != needle[j]) {
        match = false;
        break;
      }
    if (match) return true;
  }
  return false;
}

Passage passage(const std::string& id, const std::string& text) { return {id, "", text}; }

CandidateSet pool(std::vector<std::string> texts) {
  CandidateSet c;
  c.question_id = "q";
  for (std::size_t i = 0; i < texts.size(); ++i)
    c.passages.push_back({"p" + std::to_string(i + 1), "", texts[i]});
  return c;
}

}  // namespace

TEST_CASE("covers matches aliases on token boundaries", "[matching]") {
  const Passage roseanne =
      passage("p4", "Roseanne (season 10) ... In September 2017, Ames McNamara was announced "
                    "to be cast as Mark Conner-Healy.");
  CHECK(covers(roseanne, {"ames mcnamara"}));
  CHECK(covers(roseanne, {"nobody at all", "Ames McNamara"}));  // only alias #2 present
  CHECK_FALSE(covers(roseanne, {"glenn quinn"}));

  CHECK_FALSE(covers(passage("p1", "the new yorker magazine"), {"york"}));
  CHECK(covers(passage("p2", "the new york times"), {"york"}));
  CHECK(covers(passage("p3", "flew to New\xc2\xa0York in 1927"), {"new york"}));
  CHECK_FALSE(covers(passage("p5", "anything"), {""}));  // empty alias never matches
}

TEST_CASE("covers agrees with the token-scan oracle on fuzzed cases", "[matching][fuzz]") {
  std::mt19937_64 rng(424242);
  const std::string vocab[] = {"york",  "new",    "yorker", "magazine", "ames",
                               "mcnamara", "mark", "healy", "a",        "10"};
  int positives = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::string text;
    const std::size_t words = 1 + next_below(rng, 12);
    for (std::size_t i = 0; i < words; ++i) {
      if (!text.empty()) text += next_below(rng, 4) == 0 ? ", " : " ";
      text += vocab[next_below(rng, std::size(vocab))];
    }
    std::string alias = vocab[next_below(rng, std::size(vocab))];
    if (next_below(rng, 2) == 0) alias += " " + vocab[next_below(rng, std::size(vocab))];
    if (next_below(rng, 3) == 0) alias[0] = static_cast<char>(std::toupper(alias[0]));

    const bool expected = oracle_covers(text, alias);
    positives += expected ? 1 : 0;
    CHECK(covers(passage("p", text), {alias}) == expected);
  }
  CHECK(positives > 100);  // the fuzz actually exercises both outcomes
}

TEST_CASE("greedy positive preprocessing", "[matching]") {
  // pA covers a1, pB covers a1, pC covers a2
  const CandidateSet b = pool({"info about alpha here", "alpha again", "now beta instead"});
  const AnswerSet answers{{{"alpha"}, {"beta"}}};

  SECTION("covered answers are dropped from later consideration") {
    CHECK(preproc_positives(5, answers, b) == std::vector<int>{1, 3});
  }
  SECTION("stops at k positives") {
    const CandidateSet two = pool({"info about alpha here", "now beta instead"});
    CHECK(preproc_positives(1, answers, two) == std::vector<int>{1});
  }
  SECTION("no coverage anywhere gives the empty set") {
    CHECK(preproc_positives(5, answers, pool({"nothing", "relevant"})).empty());
  }
  SECTION("scan order is a parameter") {
    const std::vector<int> reversed{3, 2, 1};
    CHECK(preproc_positives(5, answers, b, reversed) == std::vector<int>{3, 2});
  }
  SECTION("a passage covering several answers removes all of them") {
    const CandidateSet multi = pool({"alpha and beta together", "alpha alone", "beta alone"});
    CHECK(preproc_positives(5, answers, multi) == std::vector<int>{1});
  }
}

TEST_CASE("positive preprocessing replay properties", "[matching][fuzz]") {
  std::mt19937_64 rng(99);
  const std::string answer_words[] = {"ruby", "topaz", "onyx", "jade", "opal"};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_answers = 1 + next_below(rng, 4);
    AnswerSet answers;
    for (std::size_t a = 0; a < n_answers; ++a) answers.answers.push_back({answer_words[a]});

    std::vector<std::string> texts;
    const std::size_t n_passages = 1 + next_below(rng, 8);
    for (std::size_t i = 0; i < n_passages; ++i) {
      std::string text = "filler";
      for (std::size_t a = 0; a < n_answers; ++a)
        if (next_below(rng, 3) == 0) text += " " + answer_words[a];
      texts.push_back(text);
    }
    const CandidateSet b = pool(texts);
    const std::size_t k = 1 + next_below(rng, 4);
    const std::vector<int> positives = preproc_positives(k, answers, b);

    CHECK(positives.size() <= std::min(k, static_cast<std::size_t>(b.size())));
    // replay: each kept passage covers an answer uncovered by earlier picks
    std::vector<bool> covered(n_answers, false);
    for (int index : positives) {
      const std::string norm = normalize(b.passage(index).text);
      bool fresh = false;
      for (std::size_t a = 0; a < n_answers; ++a)
        if (!covered[a] && covers_normalized(norm, answers.answers[a])) fresh = true;
      CHECK(fresh);
      for (std::size_t a = 0; a < n_answers; ++a)
        if (covers_normalized(norm, answers.answers[a])) covered[a] = true;
    }
  }
}

TEST_CASE("regex answer extraction reproduces the grouping example", "[matching][trec]") {
  const std::vector<Passage> corpus{
      passage("p1", "He took off from Roosevelt Field bound for Paris."),
      passage("p2", "The field is in New York according to one account."),
      passage("p3", "Another mention of new\xc2\xa0york appears here."),
      passage("p4", "A line break splits new\nyork in this text."),
      passage("p5", "Some write it as newyork with no space."),
      passage("p6", "Long Island is the larger area."),
  };
  const TrecResult result =
      trec_extract_answers("t1", "Long Island|New\\s?York|Roosevelt Field", corpus);
  REQUIRE(std::holds_alternative<AnswerSet>(result));
  const AnswerSet& answers = std::get<AnswerSet>(result);
  REQUIRE(answers.size() == 3);

  CHECK(answers.answers[0] == DistinctAnswer{"Roosevelt Field"});
  REQUIRE(answers.answers[1].size() == 4);
  CHECK(answers.answers[1][0] == "New York");
  CHECK(answers.answers[1][1] == "new\xc2\xa0york");
  CHECK(answers.answers[1][2] == "new\nyork");
  CHECK(answers.answers[1][3] == "newyork");
  CHECK(answers.answers[2] == DistinctAnswer{"Long Island"});
}

TEST_CASE("regex answer extraction discards degenerate questions", "[matching][trec]") {
  SECTION("no match") {
    const std::vector<Passage> corpus{passage("p1", "nothing relevant here")};
    const TrecResult result = trec_extract_answers("t2", "Zanzibar", corpus);
    REQUIRE(std::holds_alternative<TrecDiscard>(result));
    CHECK(std::get<TrecDiscard>(result).reason == "no valid answer found");
  }
  SECTION("permissive regex with more than 100 distinct matches") {
    std::vector<Passage> corpus;
    for (int i = 0; i < 101; ++i)
      corpus.push_back(passage("p" + std::to_string(i), "word" + std::to_string(i)));
    const TrecResult result = trec_extract_answers("t3", ".*", corpus);
    REQUIRE(std::holds_alternative<TrecDiscard>(result));
    const auto& discard = std::get<TrecDiscard>(result);
    CHECK(discard.match_count == 101);
    CHECK(discard.reason.find("more than 100") != std::string::npos);
  }
  SECTION("answers longer than five tokens are dropped") {
    const std::vector<Passage> corpus{
        passage("p1", "the quick brown fox jumps over things"),
        passage("p2", "a short fox too")};
    const TrecResult result =
        trec_extract_answers("t4", "the quick brown fox jumps over|short fox", corpus);
    REQUIRE(std::holds_alternative<AnswerSet>(result));
    const AnswerSet& answers = std::get<AnswerSet>(result);
    REQUIRE(answers.size() == 1);
    CHECK(answers.answers[0] == DistinctAnswer{"short fox"});
  }
  SECTION("only over-long matches leaves nothing to keep") {
    const std::vector<Passage> corpus{passage("p1", "one two three four five six")};
    const TrecResult result = trec_extract_answers("t5", "one two three four five six", corpus);
    REQUIRE(std::holds_alternative<TrecDiscard>(result));
  }
  SECTION("invalid regex names the question") {
    const std::vector<Passage> corpus{passage("p1", "text")};
    try {
      trec_extract_answers("t6", "(unclosed", corpus);
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("t6") != std::string::npos);
    }
  }
}

TEST_CASE("regex grouping partitions the surviving matches", "[matching][trec][fuzz]") {
  std::mt19937_64 rng(1234);
  const std::string forms[] = {"silver fox", "silver\xc2\xa0" "fox", "silverfox",
                               "red panda",  "redpanda",          "blue jay"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Passage> corpus;
    const std::size_t n = 2 + next_below(rng, 8);
    for (std::size_t i = 0; i < n; ++i)
      corpus.push_back(passage("p" + std::to_string(i),
                               "sighting of " + forms[next_below(rng, std::size(forms))]));
    const TrecResult result =
        trec_extract_answers("t", "silver\\s?fox|red\\s?panda|blue jay", corpus);
    if (!std::holds_alternative<AnswerSet>(result)) continue;
    const AnswerSet& answers = std::get<AnswerSet>(result);
    std::size_t total = 0;
    std::unordered_set<std::string> seen;
    for (const auto& group : answers.answers) {
      REQUIRE_FALSE(group.empty());
      const std::string key = group_key(group.front());
      for (const auto& alias : group) {
        CHECK(group_key(alias) == key);  // group members share one key
        CHECK(seen.insert(alias).second);  // each match lands in exactly one group
        ++total;
      }
    }
    CHECK(total == seen.size());
  }
}
