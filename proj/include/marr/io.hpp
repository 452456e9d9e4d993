#pragma once
// JSONL readers and writers for every on-disk record. One JSON object per
// line, UTF-8. Read errors carry the file path and 1-based line number.

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "marr/types.hpp"

namespace marr {

using json = nlohmann::json;

namespace detail {

inline void for_each_jsonl(const std::string& path,
                           const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      fn(j, lineno);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace detail

// ---- corpus: {"id","title","text"} ----

inline json to_json(const Passage& p) {
  return json{{"id", p.id}, {"title", p.title}, {"text", p.text}};
}

inline Passage passage_from_json(const json& j) {
  return Passage{j.at("id").get<std::string>(),
                 j.value("title", std::string{}),
                 j.at("text").get<std::string>()};
}

inline std::vector<Passage> read_corpus_jsonl(const std::string& path) {
  std::vector<Passage> out;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(passage_from_json(j)); });
  return out;
}

inline void write_corpus_jsonl(const std::string& path, const std::vector<Passage>& corpus) {
  auto out = detail::open_out(path);
  for (const auto& p : corpus) out << to_json(p).dump() << "\n";
}

// ---- questions: {"id","question","answers":[["alias",...],...]} ----

inline json to_json(const Question& q) {
  json j{{"id", q.id}, {"question", q.text}};
  if (!q.answer_set.empty()) {
    json answers = json::array();
    for (const auto& a : q.answer_set.answers) answers.push_back(a);
    j["answers"] = std::move(answers);
  }
  return j;
}

inline Question question_from_json(const json& j) {
  Question q{j.at("id").get<std::string>(), j.at("question").get<std::string>(), {}};
  if (j.contains("answers"))
    for (const auto& group : j.at("answers"))
      q.answer_set.answers.push_back(group.get<DistinctAnswer>());
  return q;
}

inline std::vector<Question> read_questions_jsonl(const std::string& path) {
  std::vector<Question> out;
  detail::for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(question_from_json(j)); });
  return out;
}

inline void write_questions_jsonl(const std::string& path, const std::vector<Question>& questions) {
  auto out = detail::open_out(path);
  for (const auto& q : questions) out << to_json(q).dump() << "\n";
}

// ---- candidates: {"qid","passage_ids":[...],"seed":int} ----

struct CandidateRecord {
  std::string qid;
  std::vector<std::string> passage_ids;
  std::uint64_t seed = 0;

  friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

inline json to_json(const CandidateRecord& r) {
  return json{{"qid", r.qid}, {"passage_ids", r.passage_ids}, {"seed", r.seed}};
}

inline CandidateRecord candidate_record_from_json(const json& j) {
  return CandidateRecord{j.at("qid").get<std::string>(),
                         j.at("passage_ids").get<std::vector<std::string>>(),
                         j.at("seed").get<std::uint64_t>()};
}

inline CandidateRecord to_record(const CandidateSet& c) {
  CandidateRecord r{c.question_id, {}, c.seed};
  r.passage_ids.reserve(c.passages.size());
  for (const auto& p : c.passages) r.passage_ids.push_back(p.id);
  return r;
}

inline std::vector<CandidateRecord> read_candidates_jsonl(const std::string& path) {
  std::vector<CandidateRecord> out;
  detail::for_each_jsonl(path,
                         [&](const json& j, std::size_t) { out.push_back(candidate_record_from_json(j)); });
  return out;
}

inline void write_candidates_jsonl(const std::string& path, const std::vector<CandidateRecord>& records) {
  auto out = detail::open_out(path);
  for (const auto& r : records) out << to_json(r).dump() << "\n";
}

// Map from passage id to passage; first occurrence wins (duplicate ids are a
// validation error reported elsewhere).
inline std::unordered_map<std::string, const Passage*> corpus_by_id(const std::vector<Passage>& corpus) {
  std::unordered_map<std::string, const Passage*> out;
  out.reserve(corpus.size());
  for (const auto& p : corpus) out.emplace(p.id, &p);
  return out;
}

inline CandidateSet resolve_candidates(const CandidateRecord& record,
                                       const std::unordered_map<std::string, const Passage*>& corpus) {
  CandidateSet c;
  c.question_id = record.qid;
  c.seed = record.seed;
  c.passages.reserve(record.passage_ids.size());
  for (const auto& id : record.passage_ids) {
    auto it = corpus.find(id);
    if (it == corpus.end())
      throw std::runtime_error("candidate passage id not in corpus: " + id);
    c.passages.push_back(*it->second);
  }
  return c;
}

// ---- predictions: {"qid","tree":[[idx,...],...],"set":[idx,...]} ----

struct PredictionRecord {
  std::string qid;
  Tree tree;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

inline json to_json(const PredictionRecord& r) {
  json seqs = json::array();
  for (const auto& s : r.tree.sequences) seqs.push_back(s);
  return json{{"qid", r.qid}, {"tree", std::move(seqs)}, {"set", r.tree.selected}};
}

// Validates the tree shape: first sequence empty, every later sequence
// extends an earlier one by a single index, and the stored set equals the
// flattened appended indexes in insertion order.
inline PredictionRecord prediction_from_json(const json& j) {
  PredictionRecord r;
  r.qid = j.at("qid").get<std::string>();
  for (const auto& s : j.at("tree")) r.tree.sequences.push_back(s.get<std::vector<int>>());
  r.tree.selected = j.at("set").get<std::vector<int>>();

  const auto& seqs = r.tree.sequences;
  if (seqs.empty() || !seqs.front().empty())
    throw std::runtime_error("prediction tree must start with the empty root");
  std::vector<int> flattened;
  for (std::size_t i = 1; i < seqs.size(); ++i) {
    if (seqs[i].empty()) throw std::runtime_error("non-root tree sequence is empty");
    const std::vector<int> parent(seqs[i].begin(), seqs[i].end() - 1);
    bool found = false;
    for (std::size_t k = 0; k < i; ++k)
      if (seqs[k] == parent) {
        found = true;
        break;
      }
    if (!found) throw std::runtime_error("tree sequence does not extend an earlier one");
    const int appended = seqs[i].back();
    bool dup = false;
    for (int x : flattened)
      if (x == appended) dup = true;
    if (!dup) flattened.push_back(appended);
  }
  if (flattened != r.tree.selected)
    throw std::runtime_error("prediction set does not match flattened tree");
  return r;
}

inline std::vector<PredictionRecord> read_predictions_jsonl(const std::string& path) {
  std::vector<PredictionRecord> out;
  detail::for_each_jsonl(path,
                         [&](const json& j, std::size_t) { out.push_back(prediction_from_json(j)); });
  return out;
}

inline void write_predictions_jsonl(const std::string& path,
                                    const std::vector<PredictionRecord>& records) {
  auto out = detail::open_out(path);
  for (const auto& r : records) out << to_json(r).dump() << "\n";
}

// ---- supervision: {"qid","positives":[...],"prefix":[...]} (+"pool") ----

inline json to_json(const SupervisionExample& e) {
  json j{{"qid", e.question_id}, {"positives", e.positives}, {"prefix", e.prefix}};
  if (!e.pool.empty()) j["pool"] = e.pool;
  return j;
}

inline SupervisionExample supervision_from_json(const json& j) {
  SupervisionExample e;
  e.question_id = j.at("qid").get<std::string>();
  e.positives = j.at("positives").get<std::vector<int>>();
  e.prefix = j.at("prefix").get<std::vector<int>>();
  if (j.contains("pool")) e.pool = j.at("pool").get<std::vector<int>>();
  return e;
}

inline std::vector<SupervisionExample> read_supervision_jsonl(const std::string& path) {
  std::vector<SupervisionExample> out;
  detail::for_each_jsonl(path,
                         [&](const json& j, std::size_t) { out.push_back(supervision_from_json(j)); });
  return out;
}

inline void write_supervision_jsonl(const std::string& path,
                                    const std::vector<SupervisionExample>& examples) {
  auto out = detail::open_out(path);
  for (const auto& e : examples) out << to_json(e).dump() << "\n";
}

// ---- raw TREC questions: {"id","question","answer_regex"} ----

struct TrecQuestion {
  std::string id;
  std::string question;
  std::string answer_regex;

  friend bool operator==(const TrecQuestion&, const TrecQuestion&) = default;
};

inline json to_json(const TrecQuestion& q) {
  return json{{"id", q.id}, {"question", q.question}, {"answer_regex", q.answer_regex}};
}

inline TrecQuestion trec_question_from_json(const json& j) {
  return TrecQuestion{j.at("id").get<std::string>(), j.at("question").get<std::string>(),
                      j.at("answer_regex").get<std::string>()};
}

inline std::vector<TrecQuestion> read_trec_jsonl(const std::string& path) {
  std::vector<TrecQuestion> out;
  detail::for_each_jsonl(path,
                         [&](const json& j, std::size_t) { out.push_back(trec_question_from_json(j)); });
  return out;
}

struct DiscardRecord {
  std::string id;
  std::string reason;
  std::size_t match_count = 0;
};

inline json to_json(const DiscardRecord& d) {
  return json{{"id", d.id}, {"reason", d.reason}, {"match_count", d.match_count}};
}

inline void write_discards_jsonl(const std::string& path, const std::vector<DiscardRecord>& discards) {
  auto out = detail::open_out(path);
  for (const auto& d : discards) out << to_json(d).dump() << "\n";
}

// ---- scorer weights: {feature_name: weight}, a single JSON object ----

inline void write_weights_json(const std::string& path,
                               const std::vector<std::pair<std::string, double>>& weights) {
  auto out = detail::open_out(path);
  json j = json::object();
  for (const auto& [name, w] : weights) j[name] = w;
  out << j.dump(2) << "\n";
}

}  // namespace marr
