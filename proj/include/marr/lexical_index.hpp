#pragma once
// First-stage retrieval: an inverted index over normalized tokens with BM25
// scoring. Any deterministic ranker would do here; BM25 is the conventional
// lexical choice. Constants below are the ones every scored match uses.
//
// score(q, d) = sum over unique query terms t of
//   idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(d) / avg_len)),
//   idf(t) = log(1 + (N - df + 0.5) / (df + 0.5))

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "marr/io.hpp"
#include "marr/rng.hpp"
#include "marr/text.hpp"
#include "marr/types.hpp"

namespace marr {

inline constexpr double kBm25K1 = 1.2;
inline constexpr double kBm25B = 0.75;

struct Posting {
  int doc = 0;  // ordinal into LexicalIndex::docs, ascending within a list
  int tf = 0;
};

struct LexicalIndex {
  struct DocEntry {
    std::string id;
    int length = 0;  // token count
  };

  std::vector<DocEntry> docs;  // sorted by passage id
  std::map<std::string, std::vector<Posting>> postings;
  double avg_doc_length = 0.0;

  std::size_t corpus_size() const { return docs.size(); }
};

inline LexicalIndex build_index(const std::vector<Passage>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("cannot index an empty corpus");

  std::vector<const Passage*> by_id;
  by_id.reserve(corpus.size());
  for (const auto& p : corpus) by_id.push_back(&p);
  std::sort(by_id.begin(), by_id.end(),
            [](const Passage* a, const Passage* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < by_id.size(); ++i)
    if (by_id[i]->id == by_id[i - 1]->id)
      throw std::invalid_argument("duplicate passage id in corpus: " + by_id[i]->id);

  LexicalIndex index;
  index.docs.reserve(by_id.size());
  double total_length = 0.0;
  for (std::size_t ord = 0; ord < by_id.size(); ++ord) {
    const auto toks = tokens(by_id[ord]->text);
    index.docs.push_back({by_id[ord]->id, static_cast<int>(toks.size())});
    total_length += static_cast<double>(toks.size());
    std::map<std::string, int> counts;
    for (const auto& t : toks) ++counts[t];
    for (const auto& [term, tf] : counts)
      index.postings[term].push_back({static_cast<int>(ord), tf});
  }
  index.avg_doc_length = total_length / static_cast<double>(index.docs.size());
  return index;
}

// BM25 match score per doc ordinal. Query terms are deduplicated and
// accumulated in sorted order so the floating-point sum is reproducible.
inline std::vector<double> match_scores(const LexicalIndex& index, std::string_view query) {
  std::vector<double> scores(index.docs.size(), 0.0);
  std::vector<std::string> terms = tokens(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  const double n = static_cast<double>(index.docs.size());
  for (const auto& term : terms) {
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    const double df = static_cast<double>(it->second.size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (const auto& [doc, tf] : it->second) {
      const double len_norm =
          1.0 - kBm25B + kBm25B * static_cast<double>(index.docs[static_cast<std::size_t>(doc)].length) /
                             index.avg_doc_length;
      scores[static_cast<std::size_t>(doc)] +=
          idf * (static_cast<double>(tf) * (kBm25K1 + 1.0)) /
          (static_cast<double>(tf) + kBm25K1 * len_norm);
    }
  }
  return scores;
}

struct ScoredId {
  std::string id;
  double score = 0.0;
};

// Full ranking, score descending with ties broken by passage id ascending.
inline std::vector<ScoredId> rank_all(const LexicalIndex& index, std::string_view query) {
  const std::vector<double> scores = match_scores(index, query);
  std::vector<ScoredId> out;
  out.reserve(index.docs.size());
  for (std::size_t i = 0; i < index.docs.size(); ++i) out.push_back({index.docs[i].id, scores[i]});
  // docs are already id-sorted, so a stable sort by score keeps id order on ties
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredId& a, const ScoredId& b) { return a.score > b.score; });
  return out;
}

// Retrieves the top-`size` candidate pool for a question, then assigns
// candidate indexes by a seeded permutation so index position carries no
// rank information. Prior scores travel with the passages.
inline CandidateSet retrieve(const LexicalIndex& index,
                             const std::unordered_map<std::string, const Passage*>& corpus,
                             const Question& question, std::size_t size, std::uint64_t seed) {
  if (size == 0) throw std::invalid_argument("candidate size must be positive");
  std::vector<ScoredId> ranked = rank_all(index, question.text);
  if (ranked.size() < size) {
    std::cerr << "warning: corpus has " << ranked.size() << " passages, fewer than requested "
              << size << " candidates for question " << question.id << "\n";
  } else {
    ranked.resize(size);
  }

  std::vector<std::size_t> perm(ranked.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  shuffle_in_place(perm, rng);

  CandidateSet out;
  out.question_id = question.id;
  out.seed = seed;
  out.passages.reserve(ranked.size());
  out.prior_scores.reserve(ranked.size());
  for (std::size_t pos : perm) {
    auto it = corpus.find(ranked[pos].id);
    if (it == corpus.end())
      throw std::runtime_error("index refers to passage missing from corpus: " + ranked[pos].id);
    out.passages.push_back(*it->second);
    out.prior_scores.push_back(ranked[pos].score);
  }
  return out;
}

inline std::optional<int> doc_ordinal(const LexicalIndex& index, std::string_view passage_id) {
  const auto it = std::lower_bound(
      index.docs.begin(), index.docs.end(), passage_id,
      [](const LexicalIndex::DocEntry& d, std::string_view id) { return d.id < id; });
  if (it == index.docs.end() || it->id != passage_id) return std::nullopt;
  return static_cast<int>(it - index.docs.begin());
}

// Recomputes prior scores for a candidate set loaded from disk (the
// candidates file stores passage ids only). Deterministic, so this matches
// the scores retrieve() produced for the same index and question.
inline CandidateSet rescore_candidates(const LexicalIndex& index, const Question& question,
                                       CandidateSet candidates) {
  const std::vector<double> scores = match_scores(index, question.text);
  candidates.prior_scores.clear();
  candidates.prior_scores.reserve(candidates.passages.size());
  for (const auto& p : candidates.passages) {
    const auto ord = doc_ordinal(index, p.id);
    if (!ord) throw std::runtime_error("candidate passage not in index: " + p.id);
    candidates.prior_scores.push_back(scores[static_cast<std::size_t>(*ord)]);
  }
  return candidates;
}

// ---- persistence: a single JSON file with a versioned header ----

inline constexpr const char* kIndexFormat = "marr.lexical-index";
inline constexpr int kIndexVersion = 1;

inline void save_index(const LexicalIndex& index, const std::string& path) {
  json j;
  j["format"] = kIndexFormat;
  j["version"] = kIndexVersion;
  json docs = json::array();
  for (const auto& d : index.docs) docs.push_back(json{{"id", d.id}, {"len", d.length}});
  j["docs"] = std::move(docs);
  json postings = json::object();
  for (const auto& [term, list] : index.postings) {
    json entries = json::array();
    for (const auto& p : list) entries.push_back(json::array({p.doc, p.tf}));
    postings[term] = std::move(entries);
  }
  j["postings"] = std::move(postings);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << "\n";
}

inline LexicalIndex load_index(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  if (j.value("format", std::string{}) != kIndexFormat)
    throw std::runtime_error(path + ": not a lexical index file");
  if (j.value("version", 0) != kIndexVersion)
    throw std::runtime_error(path + ": unsupported index version");

  LexicalIndex index;
  for (const auto& d : j.at("docs"))
    index.docs.push_back({d.at("id").get<std::string>(), d.at("len").get<int>()});
  double total = 0.0;
  for (const auto& d : index.docs) total += static_cast<double>(d.length);
  index.avg_doc_length = index.docs.empty() ? 0.0 : total / static_cast<double>(index.docs.size());
  const auto& postings = j.at("postings");
  for (auto it = postings.begin(); it != postings.end(); ++it) {
    std::vector<Posting>& list = index.postings[it.key()];
    for (const auto& entry : it.value())
      list.push_back({entry.at(0).get<int>(), entry.at(1).get<int>()});
  }
  return index;
}

}  // namespace marr
