#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "xmv/embedding.hpp"
#include "xmv/error.hpp"

using namespace xmv;

namespace {

Embedding unit(std::vector<double> v) { return l2_normalize(v); }

std::vector<Embedding> random_embeddings(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::vector<Embedding> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(l2_normalize(test::random_feature(g, dim)));
  return out;
}

}  // namespace

TEST(Normalize, ThreeFourFive) {
  const Embedding e = unit({3, 4});
  EXPECT_DOUBLE_EQ(e[0], 0.6);
  EXPECT_DOUBLE_EQ(e[1], 0.8);
}

TEST(Normalize, AlreadyUnit) {
  const Embedding e = unit({1, 0});
  EXPECT_EQ(e[0], 1.0);
  EXPECT_EQ(e[1], 0.0);
}

TEST(Normalize, ZeroAndNonFiniteRejected) {
  EXPECT_THROW(unit({0, 0}), NormalizationError);
  EXPECT_THROW(unit({std::nan(""), 1.0}), NormalizationError);
  EXPECT_THROW(unit({}), NormalizationError);
}

TEST(Normalize, FromUnitChecksNorm) {
  EXPECT_NO_THROW(Embedding::from_unit({0.6, 0.8}));
  EXPECT_THROW(Embedding::from_unit({0.6, 0.9}), NormalizationError);
}

TEST(Normalize, OutputHasUnitNorm) {
  for (const auto& e : random_embeddings(50, 37, 1)) {
    EXPECT_NEAR(dot(e.values(), e.values()), 1.0, 1e-12);
  }
}

TEST(Cosine, Examples) {
  const Embedding a = unit({1, 2, 3});
  const Embedding neg = unit({-1, -2, -3});
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(unit({1, 0}), unit({0, 1})), 0.0);
  EXPECT_NEAR(cosine_similarity(a, neg), -1.0, 1e-15);
}

TEST(Cosine, SymmetricAndBounded) {
  const auto es = random_embeddings(20, 16, 2);
  for (const auto& a : es) {
    for (const auto& b : es) {
      const double c = cosine_similarity(a, b);
      EXPECT_EQ(c, cosine_similarity(b, a));
      EXPECT_LE(std::abs(c), 1.0);
    }
  }
}

TEST(Cosine, DimensionMismatch) {
  EXPECT_THROW(cosine_similarity(unit({1, 0}), unit({1, 0, 0})), DimensionError);
}

TEST(SquaredDistance, Examples) {
  const Embedding a = unit({1, 0});
  EXPECT_EQ(squared_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(squared_distance(a, unit({0, 1})), 2.0);
  EXPECT_NEAR(squared_distance(a, unit({0.5, std::sqrt(0.75)})), 1.0, 1e-12);
}

TEST(SquaredDistance, EqualsTwoMinusTwoCosine) {
  const auto es = random_embeddings(10, 8, 3);
  for (const auto& a : es) {
    for (const auto& b : es) {
      EXPECT_NEAR(squared_distance(a, b), 2.0 - 2.0 * cosine_similarity(a, b), 1e-12);
    }
  }
}

TEST(CrossModal, SinglePair) {
  const std::vector<Embedding> d = {unit({0.3, 0.4})};
  const ScoreMatrix m = cross_modal_scores(d, d);
  EXPECT_EQ(m.rows(), 1u);
  EXPECT_NEAR(m(0, 0), 1.0, 1e-15);
}

TEST(CrossModal, OrthonormalPair) {
  const std::vector<Embedding> docs = {unit({1, 0}), unit({0, 1})};
  const std::vector<Embedding> selfies = {unit({0, 1}), unit({1, 0})};
  const ScoreMatrix m = cross_modal_scores(docs, selfies);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 1), 1.0);
  EXPECT_EQ(m(1, 0), 1.0);
  EXPECT_EQ(m(1, 1), 0.0);
}

TEST(CrossModal, MatchesPerPairCosine) {
  const auto docs = random_embeddings(70, 33, 4);
  const auto selfies = random_embeddings(130, 33, 5);
  const ScoreMatrix m = cross_modal_scores(docs, selfies, 1);
  ASSERT_EQ(m.rows(), selfies.size());
  ASSERT_EQ(m.cols(), docs.size());
  for (std::size_t r = 0; r < selfies.size(); ++r) {
    for (std::size_t c = 0; c < docs.size(); ++c) {
      EXPECT_NEAR(m(r, c), cosine_similarity(selfies[r], docs[c]), 1e-14);
    }
  }
}

TEST(CrossModal, ThreadCountDoesNotChangeOutput) {
  const auto docs = random_embeddings(150, 64, 6);
  const auto selfies = random_embeddings(150, 64, 7);
  const ScoreMatrix one = cross_modal_scores(docs, selfies, 1);
  for (unsigned t : {2u, 3u, 8u}) EXPECT_EQ(cross_modal_scores(docs, selfies, t), one);
}

TEST(CrossModal, Errors) {
  const std::vector<Embedding> a = {unit({1, 0})};
  const std::vector<Embedding> b = {unit({1, 0, 0})};
  EXPECT_THROW(cross_modal_scores(a, b), DimensionError);
  EXPECT_THROW(cross_modal_scores({}, a), EmptyInputError);
}
