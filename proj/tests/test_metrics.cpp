#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <vector>

#include "dgssa/metrics.hpp"
#include "dgssa/raster.hpp"
#include "dgssa/stats.hpp"
#include "dgssa/vessel_width.hpp"
#include "oracles.hpp"

using namespace dgssa;
using namespace dgssa::metrics;

namespace {

BinaryMask line_and_bar() {
  // 1-px horizontal line at y=2, 5-px bar in rows 8..12, separated by background.
  BinaryMask m(40, 16);
  for (int x = 4; x < 36; ++x) m(x, 2) = 1;
  for (int y = 8; y < 13; ++y) {
    for (int x = 4; x < 36; ++x) m(x, y) = 1;
  }
  return m;
}

}  // namespace

TEST(Confusion, FourPixelCase) {
  BinaryMask pred(2, 2), gt(2, 2);
  pred(0, 0) = pred(0, 1) = 1;
  gt(0, 0) = gt(1, 0) = 1;
  const auto c = confusion(pred, gt);
  EXPECT_EQ(c, (ConfusionCounts{1, 1, 1, 1}));
  BinaryMask roi(2, 2);
  EXPECT_EQ(confusion(pred, gt, &roi).total(), 0u);
  EXPECT_EQ(confusion(gt, gt).fp, 0u);
  EXPECT_THROW(confusion(pred, BinaryMask(3, 2)), Error);
}

TEST(BasicMetrics, FormulaArithmetic) {
  const auto m = basic_metrics({3, 3, 1, 93});
  EXPECT_DOUBLE_EQ(*m.dsc, 0.6);
  EXPECT_DOUBLE_EQ(*m.precision, 0.5);
  EXPECT_DOUBLE_EQ(*m.recall, 0.75);
  EXPECT_DOUBLE_EQ(*m.acc, 0.96);
  EXPECT_DOUBLE_EQ(*m.sp, 93.0 / 96.0);
  const auto perfect = basic_metrics({10, 0, 0, 90});
  for (auto v : {perfect.dsc, perfect.acc, perfect.sp, perfect.recall, perfect.precision}) EXPECT_EQ(*v, 1.0);
}

TEST(BasicMetrics, ZeroDenominatorsAreEmpty) {
  const auto m = basic_metrics({0, 0, 0, 50});
  EXPECT_EQ(*m.dsc, 1.0);
  EXPECT_FALSE(m.recall.has_value());
  EXPECT_FALSE(m.precision.has_value());
  EXPECT_EQ(*m.sp, 1.0);
  EXPECT_FALSE(basic_metrics({}).acc.has_value());
}

TEST(BasicMetrics, DiceIsHarmonicMeanOfPrecisionAndRecall) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const ConfusionCounts c{1 + rng.below(500), 1 + rng.below(500), 1 + rng.below(500), rng.below(500)};
    const auto m = basic_metrics(c);
    EXPECT_NEAR(*m.dsc, 2 * *m.precision * *m.recall / (*m.precision + *m.recall), 1e-12);
  }
}

TEST(Auc, HandExamples) {
  EXPECT_EQ(auc_from_scores({{0.9, true}, {0.8, true}, {0.2, false}, {0.1, false}}), 1.0);
  EXPECT_EQ(auc_from_scores({{0.5, true}, {0.5, false}, {0.5, true}}), 0.5);
  EXPECT_EQ(auc_from_scores({{0.8, true}, {0.4, true}, {0.6, false}, {0.2, false}}), 0.75);
  try {
    auc_from_scores({{0.1, true}, {0.2, true}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingleClass);
  }
}

TEST(Auc, MatchesPairwiseOracleWithTies) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<double, bool>> s;
    std::vector<double> pos, neg;
    const int n = 2 + static_cast<int>(rng.below(60));
    for (int i = 0; i < n; ++i) {
      const double v = rng.coin() ? static_cast<double>(rng.below(5)) / 4 : rng.uniform();
      const bool label = i == 0 ? true : i == 1 ? false : rng.coin();
      s.emplace_back(v, label);
      (label ? pos : neg).push_back(v);
    }
    EXPECT_NEAR(auc_from_scores(s), oracle::pairwise_auc(pos, neg), 1e-12);
  }
}

TEST(Auc, RoiRestrictsSamples) {
  GrayImage prob(3, 1, std::vector<double>{0.9, 0.1, 0.95});
  BinaryMask gt(3, 1, std::vector<std::uint8_t>{1, 0, 0});
  BinaryMask roi(3, 1, std::vector<std::uint8_t>{1, 1, 0});
  EXPECT_EQ(auc_roc(prob, gt, &roi), 1.0);
  EXPECT_EQ(auc_roc(prob, gt), 0.5);
}

TEST(ErrorOverlay, Colors) {
  BinaryMask empty(3, 3);
  const auto white = error_overlay(empty, empty);
  for (auto b : white.bytes) EXPECT_EQ(b, 255);
  BinaryMask pred(2, 1, std::vector<std::uint8_t>{1, 1});
  BinaryMask gt(2, 1, std::vector<std::uint8_t>{1, 0});
  const auto o = error_overlay(pred, gt);
  EXPECT_EQ(o.channels, 3);
  EXPECT_EQ(o.bytes[0], 144);
  EXPECT_EQ(o.bytes[1], 238);
  EXPECT_EQ(o.bytes[3], 240);
  const auto fn = error_overlay(gt, pred);
  EXPECT_EQ(fn.bytes[3], 173);
  EXPECT_EQ(fn.bytes[5], 230);
}

TEST(Skeleton, BarThinsToCenterRow) {
  BinaryMask bar(26, 7);
  for (int y = 2; y < 5; ++y) {
    for (int x = 3; x < 23; ++x) bar(x, y) = 1;
  }
  const auto sk = skeletonize(bar);
  for (int x = 5; x < 21; ++x) {
    EXPECT_EQ(sk(x, 3), 1) << x;
    EXPECT_EQ(sk(x, 2) + sk(x, 4), 0) << x;
  }
  EXPECT_TRUE(is_subset(sk, bar));
  EXPECT_FALSE(has_removable_pixel(sk));
}

TEST(Skeleton, TrivialMasks) {
  BinaryMask one(5, 5);
  one(2, 2) = 1;
  EXPECT_EQ(skeletonize(one), one);
  BinaryMask empty(5, 5);
  EXPECT_EQ(skeletonize(empty), empty);
  BinaryMask block(4, 4);
  block(1, 1) = block(2, 1) = block(1, 2) = block(2, 2) = 1;
  EXPECT_GT(count_foreground(skeletonize(block)), 0u);
}

TEST(Skeleton, PreservesComponentsOnRandomShapes) {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = raster::largest_component(oracle::random_blobs(rng, 28, 28));
    const auto sk = skeletonize(m);
    EXPECT_TRUE(is_subset(sk, m));
    EXPECT_FALSE(has_removable_pixel(sk));
    if (count_foreground(m) > 0) {
      EXPECT_EQ(oracle::component_count(sk, true), 1u);
    }
  }
}

TEST(RadiusMap, HandValuesAndOracle) {
  BinaryMask line(9, 3);
  for (int x = 0; x < 9; ++x) line(x, 1) = 1;
  EXPECT_EQ(radius_map(line)(4, 1), 1.0);
  BinaryMask bar(12, 7);
  for (int y = 2; y < 5; ++y) {
    for (int x = 0; x < 12; ++x) bar(x, y) = 1;
  }
  EXPECT_EQ(radius_map(bar)(6, 3), 2.0);
  const auto empty_radius = radius_map(BinaryMask(4, 4));
  for (double v : empty_radius.data()) EXPECT_EQ(v, 0.0);

  Rng rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(24)), h = 1 + static_cast<int>(rng.below(24));
    const auto m = trial % 2 ? oracle::random_mask(rng, w, h, rng.uniform(0.3, 0.95)) : oracle::random_blobs(rng, w, h);
    EXPECT_EQ(radius_map(m), oracle::radius_map(m));
  }
}

TEST(Partition, LineAndBarToyScene) {
  const auto m = line_and_bar();
  const auto p = partition_thin_thick(m, 1.2);
  for (int x = 4; x < 36; ++x) {
    EXPECT_EQ(p.thin(x, 2), 1) << x;
    for (int y = 8; y < 13; ++y) EXPECT_EQ(p.thick(x, y), 1) << x << "," << y;
  }
  EXPECT_EQ(count_foreground(p.thin), 32u);
  EXPECT_EQ(count_foreground(p.thick), 160u);
}

TEST(Partition, SkeletonOnlyMaskIsAllThin) {
  BinaryMask m(20, 20);
  for (int i = 2; i < 18; ++i) m(i, i) = 1;
  const auto p = partition_thin_thick(m);
  EXPECT_EQ(p.thin, m);
  EXPECT_EQ(count_foreground(p.thick), 0u);
}

TEST(Partition, ClassesCoverMaskExactly) {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = oracle::random_blobs(rng, 32, 32);
    const auto p = partition_thin_thick(m);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(p.thin[i] + p.thick[i], m[i]);
  }
}

TEST(PartitionedDice, IdentityDisjointAndArithmetic) {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = oracle::random_blobs(rng, 30, 30);
    const auto d = dsc_partitioned(m, m, 1.2);
    EXPECT_EQ(d.thin, 1.0);
    EXPECT_EQ(d.thick, 1.0);
  }
  BinaryMask a(10, 10), b(10, 10);
  for (int x = 0; x < 10; ++x) {
    a(x, 1) = 1;
    b(x, 7) = 1;
  }
  EXPECT_EQ(dsc_partitioned(a, b).thin, 0.0);

  BinaryMask p(10, 1), t(10, 1);
  for (int x = 0; x < 6; ++x) p(x, 0) = 1;
  for (int x = 3; x < 7; ++x) t(x, 0) = 1;
  EXPECT_DOUBLE_EQ(dice(p, t), 0.6);
}

TEST(InterDistance, HandExamples) {
  FeatureTable t;
  t.add("a", {0, 0});
  t.add("b", {3, 4});
  const auto d = domain_inter_distance(t);
  EXPECT_EQ(d.mean_distance, 5.0);
  EXPECT_EQ(d.pair_count, 1u);

  FeatureTable same;
  same.add("a", {1, 2});
  same.add("b", {1, 2});
  EXPECT_EQ(domain_inter_distance(same).mean_distance, 0.0);

  FeatureTable tri;
  tri.add("a", {0, 0});
  tri.add("b", {2, 0});
  tri.add("c", {1, std::sqrt(3.0)});
  EXPECT_NEAR(domain_inter_distance(tri).mean_distance, 2.0, 1e-12);

  FeatureTable averaged;
  averaged.add("a", {-1, 0});
  averaged.add("a", {1, 0});
  averaged.add("b", {3, 4});
  EXPECT_EQ(domain_inter_distance(averaged).mean_distance, 5.0);

  FeatureTable one;
  one.add("a", {1});
  try {
    domain_inter_distance(one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooFewDomains);
  }
}

TEST(PairedTTest, HandExample) {
  const std::vector<double> a{1, 0, -1, 2}, b{0, 0, 0, 0};
  const auto r = stats::paired_t_test(a, b);
  EXPECT_EQ(r.dof, 3u);
  EXPECT_DOUBLE_EQ(r.mean_difference, 0.5);
  EXPECT_NEAR(r.sd_difference, 1.2909944487358056, 1e-14);
  EXPECT_NEAR(r.t, 0.7745966692414834, 1e-14);
  EXPECT_NEAR(r.p_two_sided, 0.495025346059711, 1e-12);
}

TEST(PairedTTest, DegenerateInputs) {
  const std::vector<double> a{1, 2, 3}, b{1, 2};
  try {
    stats::paired_t_test(a, a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroVariance);
  }
  try {
    stats::paired_t_test(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
}

TEST(StudentT, FrozenReferenceValues) {
  EXPECT_NEAR(stats::student_t_two_sided(2.5, 7), 0.040992218585752874, 1e-13);
  EXPECT_NEAR(stats::student_t_cdf(-1.3, 2), 0.1616235159080202, 1e-13);
  EXPECT_NEAR(stats::student_t_two_sided(10, 30) / 4.5752514082296097e-11, 1.0, 1e-9);
  EXPECT_NEAR(stats::student_t_two_sided(0.1, 1), 0.9365489651388929, 1e-13);
}

TEST(StudentT, AgreesWithBoostAcrossGrid) {
  for (double dof : {1.0, 2.0, 3.0, 5.0, 10.0, 29.0, 120.0}) {
    const boost::math::students_t dist(dof);
    for (double t = -8.0; t <= 8.0; t += 0.37) {
      EXPECT_NEAR(stats::student_t_cdf(t, dof), boost::math::cdf(dist, t), 1e-12) << dof << " " << t;
      const double ref = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
      EXPECT_NEAR(stats::student_t_two_sided(t, dof), ref, 1e-12 * std::max(1.0, ref));
    }
  }
}
