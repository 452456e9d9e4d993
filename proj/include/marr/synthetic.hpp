#pragma once
// Synthetic world generation for end-to-end experiments. Every question gets
// a unique topic token; every distinct answer gets a unique alias token that
// appears in exactly its designated passages (so coverage is controlled by
// construction). Duplication puts the same answer into several passages,
// reproducing the failure mode where independent scoring spends the whole
// budget re-retrieving one answer. Distractors share the question's topic
// but contain no answer.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "marr/rng.hpp"
#include "marr/types.hpp"

namespace marr {

struct SyntheticWorldSpec {
  std::size_t num_questions = 50;
  std::vector<int> answers_per_question = {2, 3};  // uniform choice per question
  std::vector<int> passages_per_answer = {1};      // answer j gets entry min(j, last)
  int distractors_per_question = 10;
  std::uint64_t vocab_seed = 0;

  void validate() const {
    if (num_questions < 1) throw std::invalid_argument("need at least one question");
    if (answers_per_question.empty())
      throw std::invalid_argument("answers_per_question must not be empty");
    for (int n : answers_per_question)
      if (n < 1) throw std::invalid_argument("answers per question must be >= 1");
    if (passages_per_answer.empty())
      throw std::invalid_argument("passages_per_answer must not be empty");
    for (int d : passages_per_answer)
      if (d < 1) throw std::invalid_argument("duplication must be >= 1");
    if (distractors_per_question < 0)
      throw std::invalid_argument("distractor count must be >= 0");
  }
};

struct SyntheticWorld {
  std::vector<Passage> corpus;
  std::vector<Question> questions;
};

namespace detail {

// Pronounceable nonsense word, unique within the generator.
class WordGenerator {
 public:
  explicit WordGenerator(std::mt19937_64& rng) : rng_(rng) {}

  std::string next() {
    static const char* consonants = "bcdfgklmnprstvz";
    static const char* vowels = "aeiou";
    for (;;) {
      std::string word;
      const std::size_t syllables = 2 + next_below(rng_, 3);
      for (std::size_t s = 0; s < syllables; ++s) {
        word += consonants[next_below(rng_, 15)];
        word += vowels[next_below(rng_, 5)];
      }
      if (used_.insert(word).second) return word;
    }
  }

 private:
  std::mt19937_64& rng_;
  std::unordered_set<std::string> used_;
};

}  // namespace detail

inline SyntheticWorld generate_synthetic_world(const SyntheticWorldSpec& spec,
                                               std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(derive_seed(seed, spec.vocab_seed));
  detail::WordGenerator words(rng);

  SyntheticWorld world;
  for (std::size_t qi = 0; qi < spec.num_questions; ++qi) {
    const std::string qid = "synth-q" + std::to_string(qi);
    const std::string topic = words.next();

    Question question;
    question.id = qid;
    question.text = "what does the " + topic + " chronicle mention";

    const int n_answers = spec.answers_per_question[next_below(
        rng, spec.answers_per_question.size())];
    for (int a = 0; a < n_answers; ++a) {
      const std::string alias = words.next();
      question.answer_set.answers.push_back({alias});
      const int copies =
          spec.passages_per_answer[std::min(static_cast<std::size_t>(a),
                                            spec.passages_per_answer.size() - 1)];
      for (int c = 0; c < copies; ++c) {
        Passage p;
        p.id = qid + "-a" + std::to_string(a) + "-c" + std::to_string(c);
        p.title = topic + " notes";
        p.text = "the " + topic + " chronicle mentions " + alias + " in entry " + words.next();
        world.corpus.push_back(std::move(p));
      }
    }

    for (int d = 0; d < spec.distractors_per_question; ++d) {
      Passage p;
      p.id = qid + "-d" + std::to_string(d);
      p.title = topic + " notes";
      p.text = "the " + topic + " chronicle lists entry " + words.next() + " without incident";
      world.corpus.push_back(std::move(p));
    }

    world.questions.push_back(std::move(question));
  }
  return world;
}

}  // namespace marr
