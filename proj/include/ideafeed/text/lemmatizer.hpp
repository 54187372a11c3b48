#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <utility>

namespace ideafeed::text {

namespace detail {

inline constexpr auto kLemmaExceptions = std::to_array<std::pair<std::string_view, std::string_view>>({
    {"ate", "eat"},         {"best", "good"},     {"better", "good"},     {"bodies", "body"},
    {"children", "child"},  {"did", "do"},        {"does", "do"},         {"feet", "foot"},
    {"felt", "feel"},       {"fitness", "fitness"}, {"goes", "go"},      {"going", "go"},
    {"gone", "go"},         {"kept", "keep"},     {"lives", "life"},      {"made", "make"},
    {"men", "man"},         {"news", "news"},     {"people", "person"},    {"ran", "run"},
    {"rode", "ride"},       {"sitting", "sit"},   {"slept", "sleep"},     {"stress", "stress"},
    {"swam", "swim"},       {"taken", "take"},    {"teeth", "tooth"},     {"took", "take"},
    {"went", "go"},         {"women", "woman"},   {"yoga", "yoga"},
});

static_assert(std::is_sorted(kLemmaExceptions.begin(), kLemmaExceptions.end()));

constexpr bool is_vowel(char c) noexcept {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

constexpr bool ends_with(std::string_view s, std::string_view suffix) noexcept {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Repairs a stem left behind by stripping "-ing"/"-ed".
inline std::string restore_stem(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();  // running -> run
    return stem;
  }
  const char last = stem.empty() ? '\0' : stem.back();
  if (last == 'c' || last == 'v' || last == 'z') return stem + "e";  // dancing -> dance
  if (n <= 2) return stem + "e";                                     // using -> use
  if (n == 3 && !is_vowel(stem[0]) && is_vowel(stem[1]) && !is_vowel(stem[2]) &&
      stem[2] != 'w' && stem[2] != 'x' && stem[2] != 'y')
    return stem + "e";  // hiking -> hike
  return stem;
}

}  // namespace detail

/// Maps an inflected lowercase token to a dictionary-style root using a small
/// exception table and suffix rules for plural nouns and -ing/-ed verb forms.
inline std::string lemmatize(std::string_view token) {
  using detail::ends_with;
  const auto& table = detail::kLemmaExceptions;
  const auto it = std::lower_bound(table.begin(), table.end(), token,
                                   [](const auto& entry, std::string_view key) { return entry.first < key; });
  if (it != table.end() && it->first == token) return std::string(it->second);

  const std::string word(token);
  const std::size_t n = word.size();
  if (n > 4 && ends_with(word, "ies")) return word.substr(0, n - 3) + "y";
  if (n > 4 && ends_with(word, "ied")) return word.substr(0, n - 3) + "y";
  if (n > 4 && ends_with(word, "sses")) return word.substr(0, n - 2);
  if (n > 4 && ends_with(word, "ing")) return detail::restore_stem(word.substr(0, n - 3));
  if (n > 3 && ends_with(word, "ed") && !ends_with(word, "eed"))
    return detail::restore_stem(word.substr(0, n - 2));
  if (n > 3 && ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "us") &&
      !ends_with(word, "is"))
    return word.substr(0, n - 1);
  return word;
}

}  // namespace ideafeed::text
