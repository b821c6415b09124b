#pragma once

// Token-sequence helpers shared by the generator, the evaluator and the miner.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace syntrans {

using Tokens = std::vector<std::string>;

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline Tokens split_whitespace(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string join(const Tokens& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

/// Lowercases ASCII and the German capitals Ä Ö Ü (UTF-8). Other bytes pass
/// through untouched.
inline std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c == 0xC3 && i + 1 < text.size()) {
      unsigned char d = static_cast<unsigned char>(text[i + 1]);
      if (d == 0x84 || d == 0x96 || d == 0x9C) d = static_cast<unsigned char>(d + 0x20);
      out.push_back(static_cast<char>(c));
      out.push_back(static_cast<char>(d));
      ++i;
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

inline bool is_punctuation(char c) {
  switch (c) {
    case '.': case '?': case '!': case ',': case ';': case ':':
    case '"': case '(': case ')': case '[': case ']':
      return true;
    default:
      return false;
  }
}

/// Normalizes free text the way generated sentences are written: lowercase,
/// whitespace-separated, sentence punctuation and commas as their own tokens.
/// Word-internal apostrophes and hyphens are kept ("hasn't", "orang-utan").
inline Tokens normalize_tokens(std::string_view text) {
  Tokens out;
  for (const std::string& raw : split_whitespace(to_lower(text))) {
    std::size_t b = 0, e = raw.size();
    std::vector<std::string> trailing;
    while (b < e && is_punctuation(raw[b])) out.emplace_back(1, raw[b++]);
    while (e > b && is_punctuation(raw[e - 1])) trailing.emplace_back(1, raw[--e]);
    if (e > b) out.push_back(raw.substr(b, e - b));
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
  }
  return out;
}

/// FNV-1a, used to fingerprint config files in run metadata.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace syntrans
