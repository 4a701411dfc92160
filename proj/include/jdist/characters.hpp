#pragma once

#include <jdist/dft.hpp>
#include <jdist/error.hpp>
#include <jdist/field.hpp>
#include <jdist/rng.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace jdist {

/// The multiplicative character chi_j with chi_j(g^t) = e^{2 pi i j t/(q-1)}.
/// j = 0 is the trivial character.
struct MulCharIndex {
  std::uint32_t value = 0;

  constexpr MulCharIndex() = default;
  constexpr explicit MulCharIndex(std::uint32_t v) : value(v) {}

  [[nodiscard]] constexpr bool is_trivial() const { return value == 0; }
  friend constexpr auto operator<=>(MulCharIndex, MulCharIndex) = default;
};

/// Index arithmetic on the character group Z/(q-1). Products, inverses and
/// conjugates of characters are exact integer operations.
class CharGroup {
 public:
  constexpr explicit CharGroup(std::uint32_t q) : order_(q - 1) {}

  [[nodiscard]] constexpr std::uint32_t order() const { return order_; }
  [[nodiscard]] constexpr std::uint32_t reduce(std::int64_t j) const {
    const auto n = static_cast<std::int64_t>(order_);
    std::int64_t r = j % n;
    if (r < 0) r += n;
    return static_cast<std::uint32_t>(r);
  }
  [[nodiscard]] constexpr std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
    return reduce(static_cast<std::int64_t>(a) + b);
  }
  [[nodiscard]] constexpr std::uint32_t conj(std::uint32_t a) const { return a == 0 ? 0 : order_ - a; }

 private:
  std::uint32_t order_;
};

/// A tuple (chi_1, ..., chi_m) of character indices, m >= 2.
class CharTuple {
 public:
  CharTuple(std::uint32_t q, std::vector<std::uint32_t> indices) : group_(q), indices_(std::move(indices)) {
    if (q < 3) throw Error(ErrorKind::InvalidArgument, "character tuples need q >= 3");
    if (indices_.size() < 2) throw Error(ErrorKind::InvalidArgument, "character tuples need m >= 2");
    for (auto& j : indices_) j = group_.reduce(j);
  }

  [[nodiscard]] std::size_t size() const { return indices_.size(); }
  [[nodiscard]] std::span<const std::uint32_t> indices() const { return indices_; }
  [[nodiscard]] const CharGroup& group() const { return group_; }

  [[nodiscard]] MulCharIndex product_index() const {
    std::uint64_t s = 0;
    for (auto j : indices_) s += j;
    return MulCharIndex(static_cast<std::uint32_t>(s % group_.order()));
  }

  /// Membership in A-circle: the product of the characters is nontrivial.
  [[nodiscard]] bool is_in_a_circle() const { return !product_index().is_trivial(); }

  [[nodiscard]] bool has_trivial_entry() const {
    return std::any_of(indices_.begin(), indices_.end(), [](std::uint32_t j) { return j == 0; });
  }

 private:
  CharGroup group_;
  std::vector<std::uint32_t> indices_;
};

/// Evaluation tables for the characters of a field: one table of (q-1)-th
/// roots of unity for chi and one of p-th roots for psi. psi is the trace
/// character x -> e^{2 pi i Tr(cx)/p}, with scale c = 1 unless chosen
/// otherwise.
class Characters {
 public:
  explicit Characters(const Field& field, FieldElement psi_scale = FieldElement(1))
      : field_(&field), psi_scale_(psi_scale) {
    if (psi_scale.is_zero()) throw Error(ErrorKind::InvalidArgument, "additive character scale must be nonzero");
    const std::uint32_t n = field.group_order();
    chi_roots_.resize(n);
    for (std::uint32_t r = 0; r < n; ++r) chi_roots_[r] = unit_root(r, n);
    psi_roots_.resize(field.p());
    for (std::uint32_t r = 0; r < field.p(); ++r) psi_roots_[r] = unit_root(r, field.p());
  }

  [[nodiscard]] const Field& field() const { return *field_; }
  [[nodiscard]] std::uint32_t q() const { return field_->q(); }
  [[nodiscard]] FieldElement psi_scale() const { return psi_scale_; }

  /// chi_j(x) for x != 0.
  [[nodiscard]] cplx chi(MulCharIndex j, FieldElement x) const {
    if (x.is_zero()) throw Error(ErrorKind::ZeroArgument, "multiplicative characters are undefined at 0");
    return chi_at_log(j.value, field_->dlog(x));
  }

  /// chi_j(g^t).
  [[nodiscard]] cplx chi_at_log(std::uint32_t j, std::uint32_t t) const {
    const std::uint64_t n = chi_roots_.size();
    return chi_roots_[static_cast<std::size_t>((static_cast<std::uint64_t>(j % n) * t) % n)];
  }

  [[nodiscard]] cplx psi(FieldElement x) const {
    const FieldElement y = psi_scale_.value == 1 ? x : field_->mul(psi_scale_, x);
    return psi_roots_[field_->trace(y)];
  }

  /// psi(g^t) for t = 0..q-2.
  [[nodiscard]] std::vector<cplx> psi_on_powers() const {
    std::vector<cplx> out(field_->group_order());
    const auto& exp = field_->exp_table();
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = psi(FieldElement(exp[t]));
    return out;
  }

 private:
  const Field* field_;
  FieldElement psi_scale_;
  std::vector<cplx> chi_roots_;
  std::vector<cplx> psi_roots_;
};

/// A subset of the nontrivial characters X_q: strictly increasing indices in
/// [1, q-2], together with how it was produced.
class CharSubset {
 public:
  enum class Kind { Full, RandomSample, IndexInterval, Explicit };

  struct Provenance {
    Kind kind = Kind::Explicit;
    std::uint64_t seed = 0;
    std::uint32_t size = 0;
    std::uint32_t lo = 0;
    std::uint32_t hi = 0;
  };

  static CharSubset full(std::uint32_t q) {
    check_q(q);
    std::vector<std::uint32_t> idx(q - 2);
    std::iota(idx.begin(), idx.end(), 1u);
    return CharSubset(q, std::move(idx), {Kind::Full, 0, q - 2, 0, 0});
  }

  /// `size` distinct characters drawn uniformly by partial Fisher-Yates over
  /// 1..q-2, then sorted.
  static CharSubset random(std::uint32_t q, std::uint32_t size, std::uint64_t seed) {
    check_q(q);
    if (size < 1 || size > q - 2) {
      throw Error(ErrorKind::InvalidArgument,
                  "random subset size " + std::to_string(size) + " outside [1, q-2 = " + std::to_string(q - 2) + "]");
    }
    Rng rng(seed);
    auto idx = rng.sample_without_replacement(1, q - 2, size);
    std::sort(idx.begin(), idx.end());
    return CharSubset(q, std::move(idx), {Kind::RandomSample, seed, size, 0, 0});
  }

  /// Indices lo..hi inclusive.
  static CharSubset interval(std::uint32_t q, std::uint32_t lo, std::uint32_t hi) {
    check_q(q);
    if (lo < 1 || hi > q - 2 || lo > hi) {
      throw Error(ErrorKind::InvalidArgument, "interval must satisfy 1 <= lo <= hi <= q-2");
    }
    std::vector<std::uint32_t> idx(hi - lo + 1);
    std::iota(idx.begin(), idx.end(), lo);
    return CharSubset(q, std::move(idx), {Kind::IndexInterval, 0, hi - lo + 1, lo, hi});
  }

  static CharSubset explicit_indices(std::uint32_t q, std::vector<std::uint32_t> idx) {
    check_q(q);
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
      throw Error(ErrorKind::InvalidArgument, "explicit subset has duplicate indices");
    }
    if (idx.empty()) throw Error(ErrorKind::InvalidArgument, "character subsets must be nonempty");
    if (idx.front() < 1 || idx.back() > q - 2) {
      throw Error(ErrorKind::InvalidArgument, "subset indices must lie in [1, q-2] (nontrivial characters)");
    }
    const auto n = static_cast<std::uint32_t>(idx.size());
    return CharSubset(q, std::move(idx), {Kind::Explicit, 0, n, 0, 0});
  }

  [[nodiscard]] std::uint32_t q() const { return q_; }
  [[nodiscard]] std::size_t size() const { return indices_.size(); }
  [[nodiscard]] std::span<const std::uint32_t> indices() const { return indices_; }
  [[nodiscard]] const Provenance& provenance() const { return provenance_; }

  [[nodiscard]] bool contains(std::uint32_t j) const {
    return std::binary_search(indices_.begin(), indices_.end(), j);
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json prov;
    switch (provenance_.kind) {
      case Kind::Full: prov = {{"kind", "full"}}; break;
      case Kind::RandomSample: prov = {{"kind", "random"}, {"seed", provenance_.seed}, {"size", provenance_.size}}; break;
      case Kind::IndexInterval: prov = {{"kind", "interval"}, {"lo", provenance_.lo}, {"hi", provenance_.hi}}; break;
      case Kind::Explicit: prov = {{"kind", "explicit"}}; break;
    }
    return {{"q", q_}, {"provenance", prov}, {"indices", indices_}};
  }

  /// Restores a subset from its serialized form. The index list is
  /// authoritative; provenance is carried along (random draws are checked
  /// against their seed).
  static CharSubset from_json(const nlohmann::json& j) {
    try {
      const auto q = j.at("q").get<std::uint32_t>();
      auto idx = j.at("indices").get<std::vector<std::uint32_t>>();
      const auto& prov = j.at("provenance");
      const auto kind = prov.at("kind").get<std::string>();
      CharSubset s = explicit_indices(q, std::move(idx));
      if (kind == "full") {
        if (s.size() != q - 2) throw Error(ErrorKind::ConfigError, "full subset with missing indices");
        s.provenance_.kind = Kind::Full;
      } else if (kind == "random") {
        s.provenance_ = {Kind::RandomSample, prov.at("seed").get<std::uint64_t>(), prov.at("size").get<std::uint32_t>(),
                         0, 0};
        if (random(q, s.provenance_.size, s.provenance_.seed).indices_ != s.indices_) {
          throw Error(ErrorKind::ConfigError, "random subset does not match its recorded seed");
        }
      } else if (kind == "interval") {
        s.provenance_ = {Kind::IndexInterval, 0, static_cast<std::uint32_t>(s.size()), prov.at("lo").get<std::uint32_t>(),
                         prov.at("hi").get<std::uint32_t>()};
      } else if (kind != "explicit") {
        throw Error(ErrorKind::ConfigError, "unknown subset provenance '" + kind + "'");
      }
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ConfigError, std::string("malformed subset record: ") + e.what());
    }
  }

 private:
  CharSubset(std::uint32_t q, std::vector<std::uint32_t> idx, Provenance prov)
      : q_(q), indices_(std::move(idx)), provenance_(prov) {}

  static void check_q(std::uint32_t q) {
    if (q < 3) throw Error(ErrorKind::InvalidArgument, "X_q is empty for q < 3");
  }

  std::uint32_t q_;
  std::vector<std::uint32_t> indices_;
  Provenance provenance_;
};

/// The set B of tail tuples (chi_3, ..., chi_m), each of width m - 2. For
/// m = 2 it is the singleton holding the empty tuple.
class TailSet {
 public:
  static TailSet empty_tail(std::uint32_t q) { return TailSet(q, 0, {}, 1); }

  static TailSet explicit_tuples(std::uint32_t q, unsigned width, const std::vector<std::vector<std::uint32_t>>& rows) {
    if (width == 0) {
      if (rows.size() > 1 || (rows.size() == 1 && !rows[0].empty())) {
        throw Error(ErrorKind::InvalidArgument, "m = 2 admits only the empty tail");
      }
      return empty_tail(q);
    }
    if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "tail set must be nonempty");
    std::set<std::vector<std::uint32_t>> seen;
    std::vector<std::uint32_t> flat;
    for (const auto& r : rows) {
      if (r.size() != width) throw Error(ErrorKind::InvalidArgument, "tail tuple has wrong width");
      for (auto j : r) {
        if (j < 1 || j > q - 2) throw Error(ErrorKind::InvalidArgument, "tail indices must lie in [1, q-2]");
      }
      if (!seen.insert(r).second) throw Error(ErrorKind::InvalidArgument, "duplicate tail tuple");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return TailSet(q, width, std::move(flat), rows.size());
  }

  /// `count` distinct tuples with coordinates uniform on 1..q-2, drawn in
  /// order and rejecting repeats.
  static TailSet random(std::uint32_t q, unsigned width, std::uint32_t count, std::uint64_t seed) {
    if (width == 0) return empty_tail(q);
    const double total = std::pow(static_cast<double>(q - 2), static_cast<double>(width));
    if (count < 1 || static_cast<double>(count) > total) {
      throw Error(ErrorKind::InvalidArgument, "random tail count outside [1, (q-2)^(m-2)]");
    }
    Rng rng(seed);
    std::set<std::vector<std::uint32_t>> seen;
    std::vector<std::vector<std::uint32_t>> rows;
    while (rows.size() < count) {
      std::vector<std::uint32_t> r(width);
      for (auto& j : r) j = 1 + static_cast<std::uint32_t>(rng.below(q - 2));
      if (seen.insert(r).second) rows.push_back(std::move(r));
    }
    return explicit_tuples(q, width, rows);
  }

  /// All of X_q^{m-2}; refused above `limit` tuples.
  static TailSet full(std::uint32_t q, unsigned width, std::uint64_t limit) {
    if (width == 0) return empty_tail(q);
    const double total = std::pow(static_cast<double>(q - 2), static_cast<double>(width));
    if (total > static_cast<double>(limit)) {
      throw Error(ErrorKind::InvalidArgument, "full tail set has " + std::to_string(total) + " tuples, above limit");
    }
    const auto count = static_cast<std::size_t>(total);
    std::vector<std::uint32_t> flat;
    flat.reserve(count * width);
    std::vector<std::uint32_t> r(width, 1);
    for (std::size_t i = 0; i < count; ++i) {
      flat.insert(flat.end(), r.begin(), r.end());
      for (unsigned d = width; d-- > 0;) {
        if (++r[d] <= q - 2) break;
        r[d] = 1;
      }
    }
    return TailSet(q, width, std::move(flat), count);
  }

  [[nodiscard]] std::uint32_t q() const { return q_; }
  [[nodiscard]] unsigned width() const { return width_; }
  [[nodiscard]] std::size_t size() const { return count_; }
  [[nodiscard]] std::span<const std::uint32_t> tuple(std::size_t i) const {
    return std::span<const std::uint32_t>(flat_).subspan(i * width_, width_);
  }
  /// Index of the product chi_3 ... chi_m of tail i (lambda in the moment
  /// computation).
  [[nodiscard]] std::uint32_t product(std::size_t i) const {
    std::uint64_t s = 0;
    for (auto j : tuple(i)) s += j;
    return static_cast<std::uint32_t>(s % (q_ - 1));
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < count_; ++i) {
      const auto t = tuple(i);
      rows.push_back(std::vector<std::uint32_t>(t.begin(), t.end()));
    }
    return {{"q", q_}, {"width", width_}, {"tuples", rows}};
  }

 private:
  TailSet(std::uint32_t q, unsigned width, std::vector<std::uint32_t> flat, std::size_t count)
      : q_(q), width_(width), flat_(std::move(flat)), count_(count) {}

  std::uint32_t q_;
  unsigned width_;
  std::vector<std::uint32_t> flat_;
  std::size_t count_;
};

/// Visits A-circle = { (chi_1, chi_2, b) in A1 x A2 x B : product nontrivial }
/// in lexicographic order of (B position, j1, j2). `fn` receives (b, j1, j2).
template <class Fn>
void for_each_a_circle(const CharSubset& a1, const CharSubset& a2, const TailSet& tails, Fn&& fn) {
  const CharGroup group(a1.q());
  for (std::size_t b = 0; b < tails.size(); ++b) {
    const std::uint32_t lambda = tails.product(b);
    for (auto j1 : a1.indices()) {
      for (auto j2 : a2.indices()) {
        if (group.mul(group.mul(j1, j2), lambda) != 0) fn(b, j1, j2);
      }
    }
  }
}

inline std::vector<CharTuple> enumerate_a_circle(const CharSubset& a1, const CharSubset& a2, const TailSet& tails) {
  std::vector<CharTuple> out;
  for_each_a_circle(a1, a2, tails, [&](std::size_t b, std::uint32_t j1, std::uint32_t j2) {
    std::vector<std::uint32_t> idx{j1, j2};
    const auto t = tails.tuple(b);
    idx.insert(idx.end(), t.begin(), t.end());
    out.emplace_back(a1.q(), std::move(idx));
  });
  return out;
}

/// #A-circle by counting, per tail product lambda, the pairs with
/// j1 + j2 + lambda = 0 mod (q-1).
inline std::uint64_t a_circle_count(const CharSubset& a1, const CharSubset& a2, const TailSet& tails) {
  const CharGroup group(a1.q());
  std::vector<bool> in_a2(group.order(), false);
  for (auto j : a2.indices()) in_a2[j] = true;
  std::vector<std::int64_t> excluded_by_lambda(group.order(), -1);
  std::uint64_t total = 0;
  const std::uint64_t pairs = static_cast<std::uint64_t>(a1.size()) * a2.size();
  for (std::size_t b = 0; b < tails.size(); ++b) {
    const std::uint32_t lambda = tails.product(b);
    auto& excluded = excluded_by_lambda[lambda];
    if (excluded < 0) {
      excluded = 0;
      for (auto j1 : a1.indices()) {
        if (in_a2[group.conj(group.mul(j1, lambda))]) ++excluded;
      }
    }
    total += pairs - static_cast<std::uint64_t>(excluded);
  }
  return total;
}

}  // namespace jdist
