#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ideafeed/corpus/corpus_store.hpp"
#include "ideafeed/error.hpp"
#include "ideafeed/random.hpp"

namespace ideafeed::corpus {

struct PromptSet {
  std::vector<std::string> phrases;

  static PromptSet load(const std::filesystem::path& path) { return {read_lines(path)}; }

  std::size_t size() const noexcept { return phrases.size(); }
};

/// Draws prompt indices without replacement in a seeded order.
class PromptSampler {
 public:
  PromptSampler(std::size_t count, std::uint64_t seed) : order_(count) {
    for (std::size_t i = 0; i < count; ++i) order_[i] = i;
    Rng rng(seed);
    rng.shuffle(order_);
  }

  std::size_t next() {
    if (cursor_ == order_.size())
      throw Error(Errc::prompts_exhausted, "all " + std::to_string(order_.size()) + " prompts have been shown");
    return order_[cursor_++];
  }

  std::size_t drawn() const noexcept { return cursor_; }
  std::size_t remaining() const noexcept { return order_.size() - cursor_; }

  bool was_drawn(std::size_t prompt_id) const {
    for (std::size_t i = 0; i < cursor_; ++i)
      if (order_[i] == prompt_id) return true;
    return false;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

}  // namespace ideafeed::corpus
