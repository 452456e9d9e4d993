#pragma once
// Text normalization and tokenization shared by answer matching, indexing
// and evaluation.
//
// normalize() lowercases ASCII letters, folds every whitespace run
// (including the common Unicode space code points, encoded as UTF-8) into a
// single ' ', strips ASCII punctuation, and trims. The function is total and
// idempotent: normalize(normalize(x)) == normalize(x).

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace marr {

// Length in bytes of the whitespace sequence starting at `text[i]`,
// or 0 if `text[i]` does not start one. Covers ASCII whitespace plus the
// UTF-8 encodings of NBSP, NEL, Ogham space, U+2000..U+200A, line/paragraph
// separators, narrow NBSP, math space and ideographic space.
inline std::size_t whitespace_prefix_len(std::string_view text, std::size_t i) {
  const unsigned char c0 = static_cast<unsigned char>(text[i]);
  if (c0 == ' ' || c0 == '\t' || c0 == '\n' || c0 == '\v' || c0 == '\f' || c0 == '\r')
    return 1;
  const std::size_t left = text.size() - i;
  auto b = [&](std::size_t off) { return static_cast<unsigned char>(text[i + off]); };
  if (left >= 2 && c0 == 0xC2 && (b(1) == 0xA0 || b(1) == 0x85)) return 2;
  if (left >= 3) {
    if (c0 == 0xE1 && b(1) == 0x9A && b(2) == 0x80) return 3;
    if (c0 == 0xE2 && b(1) == 0x80 &&
        ((b(2) >= 0x80 && b(2) <= 0x8A) || b(2) == 0xA8 || b(2) == 0xA9 || b(2) == 0xAF))
      return 3;
    if (c0 == 0xE2 && b(1) == 0x81 && b(2) == 0x9F) return 3;
    if (c0 == 0xE3 && b(1) == 0x80 && b(2) == 0x80) return 3;
  }
  return 0;
}

inline std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t ws = whitespace_prefix_len(text, i);
    if (ws > 0) {
      pending_space = true;
      i += ws;
      continue;
    }
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c < 0x80 && std::ispunct(c)) {
      // Punctuation acts as a token separator, not glue: "Conner-Healy"
      // normalizes to "conner healy".
      pending_space = true;
      ++i;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    ++i;
  }
  return out;
}

// Key used to group answer surface forms: normalized text with all spaces
// removed, so "new york", "new york" and "newyork" collide.
inline std::string group_key(std::string_view text) {
  std::string norm = normalize(text);
  std::string out;
  out.reserve(norm.size());
  for (char c : norm)
    if (c != ' ') out.push_back(c);
  return out;
}

inline std::vector<std::string> tokens(std::string_view text) {
  const std::string norm = normalize(text);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    out.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

inline std::size_t token_count(std::string_view text) { return tokens(text).size(); }

inline std::unordered_set<std::string> unique_tokens(std::string_view text) {
  std::unordered_set<std::string> out;
  for (auto& t : tokens(text)) out.insert(std::move(t));
  return out;
}

}  // namespace marr
