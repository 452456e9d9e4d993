#pragma once
// Dataset validation: reports every invariant violation instead of stopping
// at the first, so a whole file can be fixed in one pass. An empty report
// means the dataset is well-formed.

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "marr/io.hpp"
#include "marr/text.hpp"
#include "marr/types.hpp"

namespace marr {

struct Violation {
  std::string where;    // "passage <id>", "question <id>", "candidates <qid>"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  std::string to_string() const {
    std::string out;
    for (const auto& v : violations) out += v.where + ": " + v.message + "\n";
    return out;
  }
};

inline ValidationReport validate_dataset(const std::vector<Passage>& corpus,
                                         const std::vector<Question>& questions,
                                         const std::vector<CandidateRecord>& candidates = {}) {
  ValidationReport report;
  auto flag = [&](std::string where, std::string message) {
    report.violations.push_back({std::move(where), std::move(message)});
  };

  std::unordered_set<std::string> passage_ids;
  for (const auto& p : corpus) {
    const std::string where = "passage " + (p.id.empty() ? std::string("<empty>") : p.id);
    if (p.id.empty()) flag(where, "empty passage id");
    if (p.text.empty()) flag(where, "empty passage text");
    if (!p.id.empty() && !passage_ids.insert(p.id).second)
      flag(where, "duplicate passage id");
  }

  std::unordered_set<std::string> question_ids;
  for (const auto& q : questions) {
    const std::string where = "question " + q.id;
    if (q.id.empty()) flag(where, "empty question id");
    if (!q.id.empty() && !question_ids.insert(q.id).second)
      flag(where, "duplicate question id");
    if (q.answer_set.empty()) {
      flag(where, "empty answer set");
      continue;
    }
    std::unordered_map<std::string, std::size_t> alias_owner;
    for (std::size_t gi = 0; gi < q.answer_set.answers.size(); ++gi) {
      const auto& group = q.answer_set.answers[gi];
      if (group.empty()) flag(where, "answer group " + std::to_string(gi) + " has no aliases");
      for (const auto& alias : group) {
        const std::string norm = normalize(alias);
        if (norm.empty()) {
          flag(where, "empty alias in answer group " + std::to_string(gi));
          continue;
        }
        auto [it, inserted] = alias_owner.emplace(norm, gi);
        if (!inserted && it->second != gi)
          flag(where, "alias \"" + norm + "\" appears in answer groups " +
                          std::to_string(it->second) + " and " + std::to_string(gi));
      }
    }
  }

  for (const auto& c : candidates) {
    const std::string where = "candidates " + c.qid;
    std::unordered_set<std::string> seen;
    for (const auto& id : c.passage_ids) {
      if (!seen.insert(id).second)
        flag(where, "duplicate passage \"" + id + "\" (two indexes for one passage)");
      if (!passage_ids.count(id)) flag(where, "passage \"" + id + "\" not in corpus");
    }
  }
  return report;
}

}  // namespace marr
