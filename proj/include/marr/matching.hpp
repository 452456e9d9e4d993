#pragma once
// Answer containment and positive-set preprocessing.
//
// A passage covers a distinct answer when at least one of the answer's
// aliases, after normalization, occurs in the normalized passage text on
// token boundaries ("york" does not match inside "yorker").

#include <regex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "marr/text.hpp"
#include "marr/types.hpp"

namespace marr {

inline bool contains_token_phrase(const std::string& normalized_text,
                                  const std::string& normalized_phrase) {
  if (normalized_phrase.empty()) return false;
  const std::string padded_text = " " + normalized_text + " ";
  const std::string padded_phrase = " " + normalized_phrase + " ";
  return padded_text.find(padded_phrase) != std::string::npos;
}

inline bool covers_normalized(const std::string& normalized_text, const DistinctAnswer& answer) {
  for (const auto& alias : answer)
    if (contains_token_phrase(normalized_text, normalize(alias))) return true;
  return false;
}

inline bool covers(const Passage& passage, const DistinctAnswer& answer) {
  return covers_normalized(normalize(passage.text), answer);
}

// Ordinals of the answers covered by one passage.
inline std::vector<std::size_t> covered_answer_ordinals(const std::string& normalized_text,
                                                        const AnswerSet& answers) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < answers.answers.size(); ++i)
    if (covers_normalized(normalized_text, answers.answers[i])) out.push_back(i);
  return out;
}

// Greedy positive-set preprocessing: scan the candidate pool in index order
// (or a caller-supplied scan order), keep a passage iff it covers an answer
// no earlier kept passage covered, drop every answer the kept passage
// mentions, and stop once k positives are collected. Greedy in scan order,
// so the result can be smaller than the best achievable coverage.
inline std::vector<int> preproc_positives(std::size_t k, const AnswerSet& answers,
                                          const CandidateSet& candidates,
                                          std::span<const int> scan_order = {}) {
  std::vector<int> order;
  if (scan_order.empty()) {
    order.resize(static_cast<std::size_t>(candidates.size()));
    for (int i = 0; i < candidates.size(); ++i) order[static_cast<std::size_t>(i)] = i + 1;
  } else {
    order.assign(scan_order.begin(), scan_order.end());
  }

  std::vector<bool> answer_left(answers.size(), true);
  std::vector<int> positives;
  for (int index : order) {
    if (positives.size() >= k) break;
    const std::string norm = normalize(candidates.passage(index).text);
    bool covers_remaining = false;
    for (std::size_t a = 0; a < answers.size(); ++a)
      if (answer_left[a] && covers_normalized(norm, answers.answers[a])) {
        covers_remaining = true;
        break;
      }
    if (!covers_remaining) continue;
    positives.push_back(index);
    for (std::size_t a = 0; a < answers.size(); ++a)
      if (answer_left[a] && covers_normalized(norm, answers.answers[a])) answer_left[a] = false;
  }
  return positives;
}

// ---- regex answer extraction ----

// std::regex works on bytes, so a bare \s only matches ASCII whitespace.
// Source data expects \s to also match the Unicode spaces that normalize()
// folds, so rewrite \s outside character classes into an explicit
// alternation over their UTF-8 encodings.
inline std::string widen_whitespace_classes(const std::string& pattern) {
  static const std::string kAlternation = [] {
    const char* encodings[] = {"\xC2\xA0",     "\xC2\x85",     "\xE1\x9A\x80", "\xE2\x80\x80",
                               "\xE2\x80\x81", "\xE2\x80\x82", "\xE2\x80\x83", "\xE2\x80\x84",
                               "\xE2\x80\x85", "\xE2\x80\x86", "\xE2\x80\x87", "\xE2\x80\x88",
                               "\xE2\x80\x89", "\xE2\x80\x8A", "\xE2\x80\xA8", "\xE2\x80\xA9",
                               "\xE2\x80\xAF", "\xE2\x81\x9F", "\xE3\x80\x80"};
    std::string s = "(?:\\s";
    for (const char* e : encodings) {
      s += '|';
      s += e;
    }
    s += ')';
    return s;
  }();

  std::string out;
  out.reserve(pattern.size());
  bool in_class = false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char c = pattern[i];
    if (c == '\\' && i + 1 < pattern.size()) {
      if (!in_class && pattern[i + 1] == 's') {
        out += kAlternation;
        ++i;
      } else {
        out += c;
        out += pattern[++i];
      }
      continue;
    }
    if (c == '[') in_class = true;
    if (c == ']') in_class = false;
    out += c;
  }
  return out;
}

struct TrecDiscard {
  std::string reason;
  std::size_t match_count = 0;
};

using TrecResult = std::variant<AnswerSet, TrecDiscard>;

// Runs a question's answer regex over the corpus text and builds the set of
// distinct answers. Matching is case-insensitive. A question is discarded
// when the regex matches nothing, or matches more than `max_matches`
// distinct strings (an overly permissive pattern), or when no match
// survives the `max_tokens` short-answer filter. Surviving matches are
// grouped into one distinct answer per whitespace-removed normalized form;
// aliases keep their raw matched spelling.
inline TrecResult trec_extract_answers(const std::string& question_id,
                                       const std::string& answer_regex,
                                       const std::vector<Passage>& corpus,
                                       std::size_t max_matches = 100,
                                       std::size_t max_tokens = 5) {
  std::regex re;
  try {
    re.assign(widen_whitespace_classes(answer_regex),
              std::regex::ECMAScript | std::regex::icase);
  } catch (const std::regex_error& e) {
    throw std::runtime_error("question " + question_id + ": invalid answer regex: " + e.what());
  }

  std::vector<std::string> matches;  // distinct, first-occurrence order
  std::unordered_set<std::string> seen;
  for (const auto& passage : corpus) {
    for (auto it = std::sregex_iterator(passage.text.begin(), passage.text.end(), re);
         it != std::sregex_iterator(); ++it) {
      std::string m = it->str();
      if (m.empty()) continue;
      if (seen.insert(m).second) matches.push_back(std::move(m));
    }
  }

  if (matches.empty()) return TrecDiscard{"no valid answer found", 0};
  if (matches.size() > max_matches)
    return TrecDiscard{"more than " + std::to_string(max_matches) + " valid answers",
                       matches.size()};

  AnswerSet answers;
  std::unordered_map<std::string, std::size_t> group_of;
  std::size_t kept = 0;
  for (const auto& m : matches) {
    if (token_count(m) > max_tokens) continue;
    const std::string key = group_key(m);
    if (key.empty()) continue;
    ++kept;
    auto [it, inserted] = group_of.emplace(key, answers.answers.size());
    if (inserted)
      answers.answers.push_back({m});
    else
      answers.answers[it->second].push_back(m);
  }
  if (kept == 0)
    return TrecDiscard{"no answers within " + std::to_string(max_tokens) + " tokens",
                       matches.size()};
  return answers;
}

}  // namespace marr
