#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace jdist {

namespace detail {
inline constexpr std::size_t kPairwiseBlock = 32;
}

/// Pairwise (tree) summation with a fixed association order: blocks of
/// `kPairwiseBlock` terms are summed left to right, then halves are combined
/// recursively. Error grows as O(log N) ulp and the result depends only on
/// the input sequence.
template <class T>
T pairwise_sum(std::span<const T> terms) {
  if (terms.size() <= detail::kPairwiseBlock) {
    T acc{};
    for (const T& t : terms) acc += t;
    return acc;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

/// Streaming counterpart of `pairwise_sum` for terms that are generated on
/// the fly. Terms are grouped into blocks; completed block sums are merged
/// like a binary counter, so memory stays O(log N) and the association order
/// is a deterministic function of the term count.
template <class T>
class PairwiseAccumulator {
 public:
  void add(const T& term) {
    block_ += term;
    if (++in_block_ == detail::kPairwiseBlock) flush_block();
  }

  [[nodiscard]] T total() const {
    T acc = block_;
    for (std::size_t level = 0; level < kLevels; ++level) {
      if (occupied_[level]) acc = levels_[level] + acc;
    }
    return acc;
  }

  [[nodiscard]] std::size_t count() const { return count_ * detail::kPairwiseBlock + in_block_; }

 private:
  static constexpr std::size_t kLevels = 64;

  void flush_block() {
    T carry = block_;
    std::size_t level = 0;
    while (occupied_[level]) {
      carry = levels_[level] + carry;
      occupied_[level] = false;
      ++level;
    }
    levels_[level] = carry;
    occupied_[level] = true;
    block_ = T{};
    in_block_ = 0;
    ++count_;
  }

  std::array<T, kLevels> levels_{};
  std::array<bool, kLevels> occupied_{};
  T block_{};
  std::size_t in_block_ = 0;
  std::size_t count_ = 0;
};

}  // namespace jdist
