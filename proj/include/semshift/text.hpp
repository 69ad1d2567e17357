#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace semshift {

inline constexpr std::string_view kNumberToken = "<num>";

namespace text_detail {

struct CodePoint {
  char32_t value;
  std::size_t length;  // bytes consumed
};

// Invalid sequences decode as U+FFFD consuming a single byte.
inline CodePoint decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (pos + len > s.size()) return {0xFFFD, 1};
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

inline bool is_unicode_space(char32_t c) {
  if (c == U' ' || (c >= U'\t' && c <= U'\r')) return true;
  switch (c) {
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

inline bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

inline bool starts_with_number_token(std::string_view s) {
  if (s.size() < kNumberToken.size()) return false;
  for (std::size_t i = 0; i < kNumberToken.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != kNumberToken[i]) return false;
  }
  return true;
}

inline bool ends_with_number_token(std::string_view s) {
  return s.size() >= kNumberToken.size() &&
         starts_with_number_token(s.substr(s.size() - kNumberToken.size()));
}

// "3", "1,000", "3.14" collapse whole; digit runs inside words collapse
// in place ("covid19" -> "covid<num>").
inline std::string collapse_digits(std::string_view core) {
  const bool numeric =
      !core.empty() && is_ascii_digit(core.front()) && is_ascii_digit(core.back()) &&
      std::all_of(core.begin(), core.end(),
                  [](char c) { return is_ascii_digit(c) || c == '.' || c == ','; });
  if (numeric) return std::string(kNumberToken);
  std::string out;
  out.reserve(core.size());
  for (std::size_t i = 0; i < core.size();) {
    if (is_ascii_digit(core[i])) {
      while (i < core.size() && is_ascii_digit(core[i])) ++i;
      out += kNumberToken;
    } else {
      out += core[i++];
    }
  }
  return out;
}

inline void split_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = chunk.size();
  while (begin < end && is_ascii_punct(chunk[begin]) &&
         !starts_with_number_token(chunk.substr(begin, end - begin))) {
    out.emplace_back(1, chunk[begin]);
    ++begin;
  }
  std::vector<std::string> trailing;
  while (end > begin && is_ascii_punct(chunk[end - 1]) &&
         !ends_with_number_token(chunk.substr(begin, end - begin))) {
    trailing.emplace_back(1, chunk[end - 1]);
    --end;
  }
  if (end > begin) out.push_back(collapse_digits(chunk.substr(begin, end - begin)));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

}  // namespace text_detail

// Splits on Unicode whitespace without altering case.
inline std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> chunks;
  std::size_t start = std::string_view::npos;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto cp = text_detail::decode_utf8(text, pos);
    if (text_detail::is_unicode_space(cp.value)) {
      if (start != std::string_view::npos) {
        chunks.push_back(text.substr(start, pos - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = pos;
    }
    pos += cp.length;
  }
  if (start != std::string_view::npos) chunks.push_back(text.substr(start));
  return chunks;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Same segmentation as tokenize() but with the original casing kept;
// tokenize(t)[i] == ascii_lower(tokenize_cased(t)[i]) for every i.
inline std::vector<std::string> tokenize_cased(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto chunk : split_whitespace(text)) text_detail::split_chunk(chunk, tokens);
  return tokens;
}

// Moses-like tokenization: lowercase, whitespace split, leading/trailing
// punctuation detached, intra-word hyphens and apostrophes kept, digit runs
// collapsed to "<num>".
inline std::vector<std::string> tokenize(std::string_view text) {
  auto tokens = tokenize_cased(text);
  for (auto& t : tokens) t = ascii_lower(t);
  return tokens;
}

inline bool is_punctuation_token(std::string_view token) {
  return !token.empty() &&
         std::all_of(token.begin(), token.end(), text_detail::is_ascii_punct);
}

inline bool is_sentence_terminal(std::string_view token) {
  return token == "." || token == "!" || token == "?";
}

inline constexpr std::array<std::string_view, 50> kEnglishStopwords = {
    "the",  "of",    "and",   "to",   "a",     "in",   "is",    "it",   "that",
    "was",  "for",   "on",    "are",  "with",  "as",   "be",    "at",   "by",
    "this", "have",  "from",  "or",   "an",    "but",  "not",   "they", "his",
    "her",  "she",   "he",    "we",   "you",   "i",    "which", "their", "were",
    "been", "has",   "had",   "will", "would", "there", "can",  "all",  "its",
    "our",  "more",  "than",  "so",   "if"};

// Function words plus pronouns, particles and mood words; used to drop
// candidates that carry no lexical meaning.
inline const std::unordered_set<std::string>& keyword_stoplist() {
  static const std::unordered_set<std::string> list = [] {
    std::unordered_set<std::string> s;
    for (auto w : kEnglishStopwords) s.emplace(w);
    for (std::string_view w :
         {"me", "my", "mine", "him", "them", "us", "your", "yours", "hers", "theirs",
          "ours", "itself", "himself", "herself", "themselves", "myself", "yourself",
          "ourselves", "what", "who", "whom", "whose", "these", "those", "one", "up",
          "out", "off", "over", "about", "into", "just", "also", "oh", "ah", "uh",
          "yes", "no", "yeah", "well", "very", "do", "does", "did", "done", "may",
          "might", "must", "should", "could", "shall", "such", "then", "when", "where",
          "how", "why", "any", "some", "each", "both", "other", "only", "own", "same",
          "too", "am", "being", "here", "s", "t", "'s", "n't", "'re", "'ve", "'ll",
          "'d", "'m", "nor", "upon", "via", "per", "yet", "however", "thus"}) {
      s.emplace(w);
    }
    return s;
  }();
  return list;
}

}  // namespace semshift
