#include <jdist/characters.hpp>

#include <gtest/gtest.h>

#include <limits>

namespace jdist {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

TEST(Characters, MultiplicativeExamples) {
  const auto f = Field::build(7, 1);
  const Characters chars(f);
  EXPECT_EQ(chars.chi(MulCharIndex(0), FieldElement(5)), cplx(1.0, 0.0));
  // j = 3 is the quadratic character; 2 = 3^2 is a square mod 7.
  EXPECT_NEAR(std::abs(chars.chi(MulCharIndex(3), FieldElement(2)) - 1.0), 0.0, 4 * kEps);
  EXPECT_NEAR(std::abs(chars.chi(MulCharIndex(3), FieldElement(3)) + 1.0), 0.0, 4 * kEps);
  for (std::uint32_t j = 0; j < 6; ++j) EXPECT_EQ(chars.chi(MulCharIndex(j), FieldElement(1)), cplx(1.0, 0.0));
  try {
    (void)chars.chi(MulCharIndex(1), FieldElement(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroArgument);
  }
}

TEST(Characters, AdditiveExamples) {
  const auto f7 = Field::build(7, 1);
  const Characters c7(f7);
  EXPECT_EQ(c7.psi(FieldElement(0)), cplx(1.0, 0.0));
  EXPECT_LT(std::abs(c7.psi(FieldElement(1)) - std::polar(1.0, 2 * std::numbers::pi / 7)), 4 * kEps);
  const auto f9 = Field::build(3, 2, std::vector<std::uint32_t>{1, 0, 1});
  const Characters c9(f9);
  EXPECT_EQ(c9.psi(FieldElement(3)), cplx(1.0, 0.0));  // trace(t) = 0
}

TEST(Characters, HomomorphismProperties) {
  const auto f = Field::build(3, 5, std::nullopt, 11);
  const Characters chars(f);
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const FieldElement x(1 + static_cast<std::uint32_t>(rng.below(f.q() - 1)));
    const FieldElement y(1 + static_cast<std::uint32_t>(rng.below(f.q() - 1)));
    const MulCharIndex j(static_cast<std::uint32_t>(rng.below(f.group_order())));
    const auto lhs = chars.chi(j, f.mul(x, y));
    const auto rhs = chars.chi(j, x) * chars.chi(j, y);
    EXPECT_LT(std::abs(lhs - rhs), 8 * kEps);
    EXPECT_LT(std::abs(chars.psi(f.add(x, y)) - chars.psi(x) * chars.psi(y)), 8 * kEps);
    // depends only on j mod (q - 1)
    EXPECT_EQ(chars.chi_at_log(j.value, 7), chars.chi_at_log(j.value + f.group_order(), 7));
  }
}

TEST(Characters, OrthogonalityUpToQ1024) {
  for (auto [p, k] : {std::pair{5u, 1u}, std::pair{2u, 10u}, std::pair{1021u, 1u}, std::pair{3u, 6u}}) {
    const auto f = Field::build(p, k, std::nullopt, 1);
    const Characters chars(f);
    const double tol = f.q() * 0x1.0p-46;
    for (std::uint32_t j = 1; j < f.group_order(); ++j) {
      std::vector<cplx> terms(f.group_order());
      for (std::uint32_t t = 0; t < f.group_order(); ++t) terms[t] = chars.chi_at_log(j, t);
      EXPECT_LT(std::abs(pairwise_sum<cplx>(terms)), tol) << "q=" << f.q() << " j=" << j;
    }
  }
}

TEST(CharTuple, ProductIndex) {
  EXPECT_FALSE(CharTuple(7, {2, 4}).is_in_a_circle());
  EXPECT_EQ(CharTuple(7, {2, 3}).product_index().value, 5u);
  EXPECT_TRUE(CharTuple(7, {2, 3}).is_in_a_circle());
  EXPECT_FALSE(CharTuple(5, {1, 1, 2}).is_in_a_circle());
  EXPECT_THROW(CharTuple(7, {1}), Error);
}

TEST(CharSubset, Constructors) {
  const auto full = CharSubset::full(7);
  EXPECT_EQ(full.size(), 5u);
  EXPECT_EQ(full.indices().front(), 1u);
  EXPECT_EQ(full.indices().back(), 5u);
  const auto iv = CharSubset::interval(11, 3, 6);
  EXPECT_EQ(iv.size(), 4u);
  const auto ex = CharSubset::explicit_indices(11, {7, 2, 4});
  EXPECT_EQ(std::vector<std::uint32_t>(ex.indices().begin(), ex.indices().end()), (std::vector<std::uint32_t>{2, 4, 7}));
  EXPECT_THROW(CharSubset::explicit_indices(11, {0, 2}), Error);
  EXPECT_THROW(CharSubset::explicit_indices(11, {10}), Error);
  EXPECT_THROW(CharSubset::explicit_indices(11, {2, 2}), Error);
  EXPECT_THROW(CharSubset::random(11, 10, 1), Error);
  EXPECT_THROW(CharSubset::full(2), Error);
}

TEST(CharSubset, RandomDrawsAreReproducibleAndValid) {
  const auto a = CharSubset::random(1009, 100, 1234);
  const auto b = CharSubset::random(1009, 100, 1234);
  const auto c = CharSubset::random(1009, 100, 1235);
  EXPECT_TRUE(std::equal(a.indices().begin(), a.indices().end(), b.indices().begin()));
  EXPECT_FALSE(std::equal(a.indices().begin(), a.indices().end(), c.indices().begin()));
  EXPECT_TRUE(std::is_sorted(a.indices().begin(), a.indices().end()));
  EXPECT_EQ(std::adjacent_find(a.indices().begin(), a.indices().end()), a.indices().end());
  EXPECT_GE(a.indices().front(), 1u);
  EXPECT_LE(a.indices().back(), 1007u);
}

TEST(CharSubset, JsonRoundTrip) {
  for (const auto& s : {CharSubset::random(101, 20, 9), CharSubset::full(13), CharSubset::interval(101, 4, 9),
                        CharSubset::explicit_indices(101, {3, 5})}) {
    const auto back = CharSubset::from_json(s.to_json());
    EXPECT_EQ(back.to_json(), s.to_json());
  }
  auto tampered = CharSubset::random(101, 20, 9).to_json();
  tampered["provenance"]["seed"] = 10;
  EXPECT_THROW(CharSubset::from_json(tampered), Error);
}

TEST(ACircle, SmallExample) {
  const auto a = CharSubset::explicit_indices(5, {1, 2, 3});
  const auto tails = TailSet::empty_tail(5);
  EXPECT_EQ(tails.size(), 1u);
  const auto tuples = enumerate_a_circle(a, a, tails);
  EXPECT_EQ(tuples.size(), 6u);  // excludes (1,3), (2,2), (3,1)
  EXPECT_EQ(a_circle_count(a, a, tails), 6u);
  for (const auto& t : tuples) EXPECT_TRUE(t.is_in_a_circle());
}

TEST(ACircle, SinglePairWithTrivialProductIsEmpty) {
  const std::uint32_t q = 11;
  const auto a1 = CharSubset::explicit_indices(q, {3});
  const auto a2 = CharSubset::explicit_indices(q, {q - 1 - 3});
  EXPECT_EQ(a_circle_count(a1, a2, TailSet::empty_tail(q)), 0u);
}

TEST(ACircle, CountMatchesFilterAndBounds) {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint32_t q = std::vector<std::uint32_t>{5, 7, 13, 32, 101, 256}[trial % 6];
    const unsigned width = trial % 3;
    const auto a1 = CharSubset::random(q, 1 + static_cast<std::uint32_t>(rng.below(q - 2)), rng.next());
    const auto a2 = CharSubset::random(q, 1 + static_cast<std::uint32_t>(rng.below(q - 2)), rng.next());
    const auto tails = width == 0 ? TailSet::empty_tail(q) : TailSet::random(q, width, 1 + trial % 3, rng.next());
    std::uint64_t filtered = 0;
    for (std::size_t b = 0; b < tails.size(); ++b) {
      for (auto j1 : a1.indices()) {
        for (auto j2 : a2.indices()) {
          std::vector<std::uint32_t> idx{j1, j2};
          for (auto j : tails.tuple(b)) idx.push_back(j);
          if (CharTuple(q, idx).is_in_a_circle()) ++filtered;
        }
      }
    }
    const auto count = a_circle_count(a1, a2, tails);
    EXPECT_EQ(count, filtered);
    EXPECT_EQ(enumerate_a_circle(a1, a2, tails).size(), filtered);
    EXPECT_GE(static_cast<double>(count), (a1.size() - 1.0) * a2.size() * tails.size());
    EXPECT_LE(count, a1.size() * a2.size() * tails.size());
  }
}

TEST(TailSet, FullAndLimits) {
  const auto full = TailSet::full(7, 2, 1000);
  EXPECT_EQ(full.size(), 25u);
  EXPECT_EQ(full.tuple(0)[0], 1u);
  EXPECT_EQ(full.tuple(24)[1], 5u);
  EXPECT_THROW(TailSet::full(101, 3, 1000), Error);
  EXPECT_THROW(TailSet::explicit_tuples(7, 1, {{1}, {1}}), Error);
  EXPECT_THROW(TailSet::explicit_tuples(7, 1, {{0}}), Error);
}

}  // namespace
}  // namespace jdist
