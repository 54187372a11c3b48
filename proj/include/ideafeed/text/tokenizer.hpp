#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ideafeed/text/stopwords.hpp"

namespace ideafeed::text {

/// Half-open byte range [begin, end) into the source text.
struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

// Token grammar: a token is a maximal run of word bytes, where a word byte is
// an ASCII letter, an ASCII digit, or any byte >= 0x80 (so UTF-8 letters stay
// inside their word). Every other byte separates tokens and is dropped. ASCII
// letters are lowercased; non-ASCII bytes are kept verbatim.
struct TokenList {
  std::vector<std::string> tokens;
  std::vector<bool> content_mask;
  std::vector<TextSpan> spans;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }

  std::size_t content_count() const {
    std::size_t n = 0;
    for (bool c : content_mask) n += c ? 1 : 0;
    return n;
  }

  std::vector<std::string> content_tokens() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (content_mask[i]) out.push_back(tokens[i]);
    return out;
  }
};

constexpr bool is_word_byte(unsigned char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

inline TokenList tokenize(std::string_view text) {
  TokenList out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    std::string token;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) {
      char c = text[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      token.push_back(c);
      ++i;
    }
    out.content_mask.push_back(!is_stop_word(token));
    out.tokens.push_back(std::move(token));
    out.spans.push_back({begin, i});
  }
  return out;
}

/// Copy of `text` with the given spans replaced by `replacement`. Spans must
/// be sorted and non-overlapping.
inline std::string replace_spans(std::string_view text, const std::vector<TextSpan>& spans,
                                 std::string_view replacement = {}) {
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const auto& span : spans) {
    out.append(text.substr(cursor, span.begin - cursor));
    out.append(replacement);
    cursor = span.end;
  }
  out.append(text.substr(cursor));
  return out;
}

/// Spans of every occurrence of `token` in a tokenized text.
inline std::vector<TextSpan> occurrences(const TokenList& tokens, std::string_view token) {
  std::vector<TextSpan> spans;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (tokens.tokens[i] == token) spans.push_back(tokens.spans[i]);
  return spans;
}

}  // namespace ideafeed::text
