#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "support.hpp"
#include "xmv/error.hpp"
#include "xmv/mining.hpp"

using namespace xmv;

namespace {

std::vector<Embedding> embed_batch(const MiningBatch& b, const PairedDataset& ds) {
  std::vector<Embedding> out;
  for (auto f : b.features(ds)) out.push_back(l2_normalize(f));
  return out;
}

// Checks one anchor's outcome against every candidate negative.
void check_anchor(const MiningBatch& b, const std::vector<Embedding>& e, double margin,
                  std::size_t anchor, const Triplet* t) {
  const std::size_t pos = b.partner(anchor);
  const double d_ap = squared_distance(e[anchor], e[pos]);
  std::vector<double> window, beyond;
  for (std::size_t n = 0; n < b.size(); ++n) {
    if (b.modality(n) != b.modality(pos) || b.subject_slot(n) == b.subject_slot(anchor)) continue;
    const double d = squared_distance(e[anchor], e[n]);
    if (d > d_ap && d < d_ap + margin) window.push_back(d);
    if (d > d_ap) beyond.push_back(d);
  }
  if (!t) {
    ASSERT_TRUE(beyond.empty()) << "anchor " << anchor << " skipped with a valid negative";
    return;
  }
  ASSERT_EQ(t->positive, pos);
  ASSERT_NE(b.modality(t->anchor), b.modality(t->positive));
  ASSERT_EQ(b.modality(t->negative), b.modality(t->positive));
  ASSERT_NE(b.subject_slot(t->negative), b.subject_slot(t->anchor));
  ASSERT_EQ(t->d_ap, d_ap);
  ASSERT_EQ(t->d_an, squared_distance(e[anchor], e[t->negative]));
  if (!window.empty()) {
    ASSERT_TRUE(t->semi_hard);
    ASSERT_GT(t->d_an, d_ap);
    ASSERT_LT(t->d_an, d_ap + margin);
  } else {
    ASSERT_FALSE(t->semi_hard);
    ASSERT_EQ(t->d_an, *std::min_element(beyond.begin(), beyond.end()));
  }
}

}  // namespace

TEST(SampleBatch, WholeDataset) {
  const PairedDataset ds = test::random_dataset(2, 3, 1);
  Rng rng(1);
  const MiningBatch b = sample_batch(ds, 4, rng);
  ASSERT_EQ(b.size(), 4u);
  std::set<std::size_t> seen{b.dataset_index(0), b.dataset_index(1)};
  EXPECT_EQ(seen, (std::set<std::size_t>{0, 1}));
  EXPECT_EQ(b.modality(0), Modality::selfie);
  EXPECT_EQ(b.modality(2), Modality::document);
  EXPECT_EQ(b.partner(1), 3u);
  EXPECT_EQ(b.partner(3), 1u);
}

TEST(SampleBatch, Errors) {
  const PairedDataset ds = test::random_dataset(4, 3, 1);
  Rng rng(1);
  EXPECT_THROW(sample_batch(ds, 5, rng), ConfigError);
  EXPECT_THROW(sample_batch(ds, 0, rng), ConfigError);
  EXPECT_THROW(sample_batch(ds, 10, rng), ConfigError);
}

TEST(SampleBatch, DeterministicDistinctAndCovering) {
  const PairedDataset ds = test::random_dataset(30, 3, 2);
  Rng a(5), b(5);
  std::vector<int> hits(30, 0);
  for (int i = 0; i < 400; ++i) {
    const MiningBatch x = sample_batch(ds, 12, a);
    const MiningBatch y = sample_batch(ds, 12, b);
    std::set<std::size_t> slots;
    for (std::size_t k = 0; k < x.num_subjects(); ++k) {
      ASSERT_EQ(x.dataset_index(k), y.dataset_index(k));
      ASSERT_EQ(x.subject_id(k), ds[x.dataset_index(k)].id);
      slots.insert(x.dataset_index(k));
      ++hits[x.dataset_index(k)];
    }
    ASSERT_EQ(slots.size(), 6u);
  }
  // 400 draws of 6 from 30: each subject expected 80 times.
  for (int h : hits) {
    EXPECT_GT(h, 40);
    EXPECT_LT(h, 130);
  }
}

TEST(MineSemiHard, ToyFallback) {
  const MiningBatch b({0, 1}, {"s1", "s2"});
  // Batch order: s1 selfie, s2 selfie, s1 doc, s2 doc.
  const std::vector<Embedding> e = {Embedding::from_unit({0.8, 0.6}),
                                    Embedding::from_unit({-0.6, 0.8}),
                                    Embedding::from_unit({1.0, 0.0}),
                                    Embedding::from_unit({0.0, 1.0})};
  Rng rng(1);
  const auto ts = mine_semi_hard(b, e, 0.3, rng);
  const auto it = std::find_if(ts.begin(), ts.end(), [](const Triplet& t) { return t.anchor == 0; });
  ASSERT_NE(it, ts.end());
  EXPECT_EQ(it->positive, 2u);
  EXPECT_EQ(it->negative, 3u);
  EXPECT_NEAR(it->d_ap, 0.4, 1e-12);
  EXPECT_NEAR(it->d_an, 0.8, 1e-12);
  EXPECT_FALSE(it->semi_hard);
}

TEST(MineSemiHard, SingleSubjectHasNoNegatives) {
  const MiningBatch b({0}, {"s1"});
  const std::vector<Embedding> e = {Embedding::from_unit({1.0, 0.0}),
                                    Embedding::from_unit({0.0, 1.0})};
  Rng rng(1);
  EXPECT_TRUE(mine_semi_hard(b, e, 0.3, rng).empty());
}

TEST(MineSemiHard, TinyMarginUsesFallbackOnly) {
  const PairedDataset ds = test::random_dataset(40, 8, 3, 1.0f);
  Rng rng(2);
  const MiningBatch b = sample_batch(ds, 40, rng);
  const auto e = embed_batch(b, ds);
  for (const auto& t : mine_semi_hard(b, e, 1e-300, rng)) EXPECT_FALSE(t.semi_hard);
}

TEST(MineSemiHard, SelfieOnlyAnchors) {
  const PairedDataset ds = test::random_dataset(40, 8, 4, 1.0f);
  Rng rng(3);
  const MiningBatch b = sample_batch(ds, 40, rng);
  const auto e = embed_batch(b, ds);
  const auto ts = mine_semi_hard(b, e, 0.3, rng, AnchorModality::selfie_only);
  EXPECT_FALSE(ts.empty());
  for (const auto& t : ts) EXPECT_EQ(b.modality(t.anchor), Modality::selfie);
}

TEST(MineSemiHard, Deterministic) {
  const PairedDataset ds = test::random_dataset(60, 8, 5, 1.0f);
  Rng r1(4), r2(4);
  const MiningBatch b = sample_batch(ds, 60, r1);
  sample_batch(ds, 60, r2);
  const auto e = embed_batch(b, ds);
  const auto x = mine_semi_hard(b, e, 0.3, r1);
  const auto y = mine_semi_hard(b, e, 0.3, r2);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i].negative, y[i].negative);
}

TEST(MineSemiHard, EveryTripletMatchesTheRule) {
  const PairedDataset ds = test::random_dataset(200, 6, 6, 0.8f);
  Rng rng(7);
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> margin_pick(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const MiningBatch b = sample_batch(ds, 2 * (2 + trial % 30), rng);
    const auto e = embed_batch(b, ds);
    const double margin = margin_pick(g);
    const auto ts = mine_semi_hard(b, e, margin, rng);
    std::vector<const Triplet*> by_anchor(b.size(), nullptr);
    for (const auto& t : ts) {
      ASSERT_EQ(by_anchor[t.anchor], nullptr) << "anchor used twice";
      by_anchor[t.anchor] = &t;
      EXPECT_EQ(t.margin_used, margin);
    }
    for (std::size_t a = 0; a < b.size(); ++a) check_anchor(b, e, margin, a, by_anchor[a]);
  }
}

TEST(TripletLoss, Hinge) {
  const Embedding a = Embedding::from_unit({1, 0});
  const Embedding p = Embedding::from_unit({0, 1});
  EXPECT_DOUBLE_EQ(triplet_loss(a, p, p, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(triplet_loss(a, a, p, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(triplet_loss(a, p, Embedding::from_unit({-1, 0}), 0.3), 0.0);
}

TEST(TripletDump, Header) {
  std::ostringstream os;
  write_triplets_csv({}, os);
  EXPECT_EQ(os.str(), "anchor,positive,negative,d_ap,d_an,loss\n");
}
