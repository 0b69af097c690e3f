#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "hist4lt/error.hpp"
#include "hist4lt/estimators.hpp"

using namespace hist4lt;

namespace {

Bucket summary_bucket(std::size_t b, std::size_t t, Count c) {
  Bucket bucket;
  bucket.inf = 1;
  bucket.sup = b;
  bucket.t = t;
  bucket.c = c;
  return bucket;
}

std::vector<Count> random_bucket(std::mt19937_64& rng, std::size_t b) {
  std::vector<Count> freq(b);
  const int style = static_cast<int>(rng() % 3);
  for (auto& f : freq) {
    if (style == 0) f = rng() % 100;
    if (style == 1) f = rng() % 4 == 0 ? rng() % 1000 : 0;
    if (style == 2) f = 1 + rng() % 3;
  }
  return freq;
}

// Reference 4LT/3LT estimate: cumulative sum of the decoded leaves before the segment, plus
// linear interpolation of the segment's own leaf.
double leaf_interpolation(const DecodedTree& tree, std::size_t b, std::size_t d) {
  const auto leaves = tree.leaves();
  const std::size_t n = leaves.size();
  double before = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = (((i - 1) * b) + n - 1) / n;
    const std::size_t hi = ((i * b) + n - 1) / n;
    if (lo <= d && d < hi) return before + double(d - lo) / double(hi - lo) * leaves[i - 1];
    before += leaves[i - 1];
  }
  return before;
}

}  // namespace

TEST(Quantize, RoundsHalfAwayFromZero) {
  EXPECT_EQ(quantize(1, 2, 255), 128u);  // 127.5
  EXPECT_EQ(quantize(1, 4, 255), 64u);   // 63.75
  EXPECT_EQ(quantize(1, 2, 63), 32u);    // 31.5
  EXPECT_EQ(quantize(1, 3, 15), 5u);
  EXPECT_EQ(quantize(0, 7, 15), 0u);
  EXPECT_EQ(quantize(7, 7, 15), 15u);
  EXPECT_EQ(quantize(3, 0, 15), 0u);
  EXPECT_EQ(quantize(5594, 8678, 2047), 1320u);  // 1319.53
}

TEST(Encode, Split2) {
  EXPECT_EQ(encode_split2(std::vector<Count>{1, 1, 1, 1}), 2u);
  EXPECT_EQ(encode_split2(std::vector<Count>{10, 10, 10, 10, 0, 0, 0, 0}), 40u);
  EXPECT_EQ(encode_split2(std::vector<Count>{0, 0, 0, 0}), 0u);
  EXPECT_EQ(encode_split2(std::vector<Count>{4, 1, 9}), 5u);  // first half is [1, 2]
}

TEST(Encode, Split4) {
  EXPECT_EQ(encode_split4(std::vector<Count>(12, 3)), (std::array<std::uint8_t, 4>{64, 64, 64, 64}));
  EXPECT_EQ(encode_split4(std::vector<Count>(8, 0)), (std::array<std::uint8_t, 4>{0, 0, 0, 0}));
  EXPECT_EQ(encode_split4(std::vector<Count>{10, 10, 10, 10, 0, 0, 0, 0}),
            (std::array<std::uint8_t, 4>{128, 128, 0, 0}));
}

TEST(Encode, Split8) {
  EXPECT_EQ(encode_split8(std::vector<Count>(16, 5)), (std::array<std::uint8_t, 8>{2, 2, 2, 2, 2, 2, 2, 2}));
  EXPECT_EQ(encode_split8(std::vector<Count>(8, 0)), (std::array<std::uint8_t, 8>{}));
  EXPECT_EQ(encode_split8(std::vector<Count>{10, 10, 10, 10, 0, 0, 0, 0}),
            (std::array<std::uint8_t, 8>{4, 4, 4, 4, 0, 0, 0, 0}));
}

TEST(Encode, ThreeLevelExampleBucket) {
  // c = 8678, first half 5594, first quarter 2834, third quarter 2818.
  const std::vector<Count> bucket{1400, 1434, 1380, 1380, 1409, 1409, 133, 133};
  EXPECT_EQ(encode_3lt(bucket).fields_3lt(), (Tree3Fields{1320, 518, 935}));
}

TEST(Encode, ThreeLevelUniformAndEmpty) {
  EXPECT_EQ(encode_3lt(std::vector<Count>(8, 7)).fields_3lt(), (Tree3Fields{1024, 512, 512}));
  EXPECT_EQ(encode_3lt(std::vector<Count>(8, 0)).word(), 0u);
}

TEST(Encode, FourLevelUniformAndEmpty) {
  EXPECT_EQ(encode_4lt(std::vector<Count>(16, 3)).fields_4lt(), (Tree4Fields{32, 16, 16, 8, 8, 8, 8}));
  EXPECT_EQ(encode_4lt(std::vector<Count>(8, 0)).word(), 0u);
}

TEST(Encode, FourLevelUsesTrueParentSums) {
  // Left quarter ratio must be taken against the true half sum, not a decoded one.
  const std::vector<Count> bucket{5, 0, 1, 0, 0, 0, 0, 100};
  const auto L = encode_4lt(bucket).fields_4lt();
  EXPECT_EQ(L[0], quantize(6, 106, 63));
  EXPECT_EQ(L[1], quantize(5, 6, 31));
  EXPECT_EQ(L[2], quantize(0, 100, 31));
  EXPECT_EQ(L[3], quantize(5, 5, 15));
  EXPECT_EQ(L[4], quantize(1, 1, 15));
  EXPECT_EQ(L[5], 0u);  // 0/0
  EXPECT_EQ(L[6], quantize(0, 100, 15));
}

TEST(Decode, FourLevelUniform) {
  const auto tree = decode_4lt(8, PackedTreeIndex::pack_4lt({32, 16, 16, 8, 8, 8, 8}));
  EXPECT_NEAR(tree.halves[0], 8.0 * 32 / 63, 1e-12);
  EXPECT_NEAR(tree.halves[0], 4.06349, 1e-5);
  EXPECT_NEAR(tree.halves[1], 3.93651, 1e-5);
}

TEST(Decode, ThreeLevelExample) {
  const auto tree = decode_3lt(8678, PackedTreeIndex::pack_3lt({1320, 518, 935}));
  EXPECT_NEAR(tree.halves[0], 8678.0 * 1320 / 2047, 1e-9);
  EXPECT_NEAR(tree.halves[0], 5595.9746, 1e-4);
  EXPECT_NEAR(tree.quarters[0], 518.0 / 1023 * tree.halves[0], 1e-9);
  EXPECT_NEAR(tree.quarters[2], 935.0 / 1023 * tree.halves[1], 1e-9);
}

TEST(Decode, AllZeroWordPushesMassRight) {
  const auto tree = decode_4lt(40, PackedTreeIndex{0});
  EXPECT_EQ(tree.halves[0], 0.0);
  EXPECT_EQ(tree.halves[1], 40.0);
  EXPECT_EQ(tree.quarters[0], 0.0);
  EXPECT_EQ(tree.quarters[3], 40.0);
  EXPECT_EQ(tree.eighths[7], 40.0);
}

TEST(Decode, FourLevelFieldsFromPublishedTree) {
  const Count c = 1000;
  const auto tree = decode_4lt(c, PackedTreeIndex::pack_4lt({33, 18, 13, 6, 11, 5, 7}));
  const double h1 = 33.0 / 63 * c;
  const double q1 = 18.0 / 31 * h1;
  const double q3 = 13.0 / 31 * (c - h1);
  EXPECT_NEAR(tree.halves[0], h1, 1e-9);
  EXPECT_NEAR(tree.quarters[0], q1, 1e-9);
  EXPECT_NEAR(tree.quarters[2], q3, 1e-9);
  EXPECT_NEAR(tree.eighths[0], 6.0 / 15 * q1, 1e-9);
  EXPECT_NEAR(tree.eighths[2], 11.0 / 15 * (h1 - q1), 1e-9);
  EXPECT_NEAR(tree.eighths[4], 5.0 / 15 * q3, 1e-9);
  EXPECT_NEAR(tree.eighths[6], 7.0 / 15 * (c - h1 - q3), 1e-9);
}

TEST(Decode, SiblingsAddUpToParents) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20000; ++trial) {
    const Count c = rng() % 100000;
    const auto tree = decode_4lt(c, PackedTreeIndex{static_cast<std::uint32_t>(rng())});
    EXPECT_DOUBLE_EQ(tree.halves[0] + tree.halves[1], tree.root);
    for (std::size_t q = 0; q < 4; ++q) {
      EXPECT_DOUBLE_EQ(tree.quarters[q] + (q % 2 ? tree.quarters[q - 1] : tree.quarters[q + 1]), tree.halves[q / 2]);
      EXPECT_DOUBLE_EQ(tree.eighths[2 * q] + tree.eighths[2 * q + 1], tree.quarters[q]);
      EXPECT_GE(tree.eighths[2 * q], 0.0);
      EXPECT_GE(tree.eighths[2 * q + 1], 0.0);
    }
  }
}

TEST(EstimatePrefix, ContinuousValue) {
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::CVA, summary_bucket(500, 100, 20000), 125), 5000.0);
  const auto bucket = encode_bucket(EstimatorKind::CVA, std::vector<Count>{10, 10, 10, 10, 0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::CVA, bucket, 4), 20.0);
  EXPECT_DOUBLE_EQ(40.0 - estimate_prefix(EstimatorKind::CVA, bucket, 4), 20.0);
}

TEST(EstimatePrefix, UniformSpread) {
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::USA, summary_bucket(5, 1, 100), 3), 100.0);
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::USA, summary_bucket(5, 5, 100), 3), 60.0);
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::USA, summary_bucket(5, 0, 0), 3), 0.0);
  EXPECT_THROW(estimate_prefix(EstimatorKind::USA, summary_bucket(5, 0, 7), 3), InvariantError);
  // Dense buckets agree with CVA at integer d.
  for (std::size_t d = 1; d <= 5; ++d) {
    EXPECT_NEAR(estimate_prefix(EstimatorKind::USA, summary_bucket(5, 5, 100), d),
                estimate_prefix(EstimatorKind::CVA, summary_bucket(5, 5, 100), d), 1e-9);
  }
}

TEST(EstimatePrefix, OneBiased) {
  EXPECT_NEAR(estimate_prefix(EstimatorKind::OneBiased, summary_bucket(10, 2, 100), 5), 250.0 / 9, 1e-12);
  EXPECT_NEAR(estimate_prefix(EstimatorKind::OneBiased, summary_bucket(10, 2, 100), 5), 27.78, 5e-3);
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::OneBiased, summary_bucket(1, 1, 9), 1), 9.0);
}

TEST(EstimatePrefix, SplitTwoIsPiecewiseContinuousValue) {
  const std::vector<Count> freq{4, 4, 4, 0, 2, 2, 2};  // halves [1,4] and [5,7]
  const auto bucket = encode_bucket(EstimatorKind::Split2, freq);
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::Split2, bucket, 2), 6.0);
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::Split2, bucket, 4), 12.0);
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::Split2, bucket, 5), 14.0);
  EXPECT_DOUBLE_EQ(estimate_prefix(EstimatorKind::Split2, bucket, 7), 18.0);
}

TEST(EstimatePrefix, FlatSplitsUseTheComplementPastTheMiddle) {
  const std::vector<Count> freq{10, 10, 10, 10, 0, 0, 0, 0};
  const auto b8 = encode_bucket(EstimatorKind::Split8, freq);
  const double part = 4.0 / 15 * 40;
  EXPECT_NEAR(estimate_prefix(EstimatorKind::Split8, b8, 3), 3 * part, 1e-12);
  EXPECT_NEAR(estimate_prefix(EstimatorKind::Split8, b8, 4), 4 * part, 1e-12);  // d = b/2 still from the left
  EXPECT_NEAR(estimate_prefix(EstimatorKind::Split8, b8, 5), 40.0, 1e-12);      // suffix parts are 0
  EXPECT_NEAR(estimate_prefix(EstimatorKind::Split8, b8, 8), 40.0, 1e-12);

  const auto b4 = encode_bucket(EstimatorKind::Split4, freq);
  EXPECT_NEAR(estimate_prefix(EstimatorKind::Split4, b4, 2), 128.0 / 255 * 40, 1e-12);
  EXPECT_NEAR(estimate_prefix(EstimatorKind::Split4, b4, 6), 40.0, 1e-12);
}

TEST(EstimatePrefix, FourLevelUniformMidpoint) {
  const auto bucket = encode_bucket(EstimatorKind::Tree4LT, std::vector<Count>(8, 1));
  EXPECT_NEAR(estimate_prefix(EstimatorKind::Tree4LT, bucket, 4), 8.0 * 32 / 63, 1e-12);
}

TEST(EstimatePrefix, EndpointsAndErrors) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto freq = random_bucket(rng, 1 + rng() % 40);
    for (auto kind : kAllEstimators) {
      const auto bucket = encode_bucket(kind, freq);
      EXPECT_EQ(estimate_prefix(kind, bucket, 0), 0.0);
      if (kind != EstimatorKind::USA && kind != EstimatorKind::OneBiased) {
        EXPECT_NEAR(estimate_prefix(kind, bucket, freq.size()), double(bucket.c), 1e-9 * (1.0 + bucket.c));
      }
      EXPECT_THROW(estimate_prefix(kind, bucket, freq.size() + 1), RangeError);
    }
  }
  const auto plain = encode_bucket(EstimatorKind::CVA, std::vector<Count>{1, 2});
  EXPECT_THROW(estimate_prefix(EstimatorKind::Tree4LT, plain, 1), ConfigError);
  const auto tree = encode_bucket(EstimatorKind::Tree4LT, std::vector<Count>{1, 2});
  EXPECT_THROW(estimate_prefix(EstimatorKind::CVA, tree, 1), ConfigError);
}

TEST(EstimatePrefix, TreesMatchLeafInterpolation) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto freq = random_bucket(rng, 1 + rng() % 200);
    const std::size_t b = freq.size();
    for (auto kind : {EstimatorKind::Tree3LT, EstimatorKind::Tree4LT}) {
      const auto bucket = encode_bucket(kind, freq);
      const auto tree = kind == EstimatorKind::Tree4LT ? decode_4lt(bucket.c, encode_4lt(freq))
                                                       : decode_3lt(bucket.c, encode_3lt(freq));
      for (std::size_t d = 1; d < b; ++d) {
        EXPECT_NEAR(estimate_prefix(kind, bucket, d), leaf_interpolation(tree, b, d), 1e-9 * (1.0 + bucket.c))
            << to_string(kind) << " b=" << b << " d=" << d;
      }
    }
  }
}

TEST(EstimatePrefix, FourLevelIsMonotone) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto freq = random_bucket(rng, 1 + rng() % 300);
    const auto bucket = encode_bucket(EstimatorKind::Tree4LT, freq);
    double last = 0.0;
    for (std::size_t d = 1; d <= freq.size(); ++d) {
      const double est = estimate_prefix(EstimatorKind::Tree4LT, bucket, d);
      EXPECT_GE(est, last - 1e-9);
      last = est;
    }
  }
}

TEST(EstimatePrefix, FourLevelBreakpointsCarryOnlyScalingError) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t b = 8 * (1 + rng() % 64);
    const auto freq = random_bucket(rng, b);
    const Count F = *std::max_element(freq.begin(), freq.end());
    const auto bucket = encode_bucket(EstimatorKind::Tree4LT, freq);
    const auto tree = decode_4lt(bucket.c, encode_4lt(freq));
    double leaves = 0.0;
    Count truth = 0;
    for (std::size_t i = 1; i < 8; ++i) {
      leaves += tree.eighths[i - 1];
      const std::size_t d = i * b / 8;
      truth = std::accumulate(freq.begin(), freq.begin() + d, Count{0});
      EXPECT_NEAR(estimate_prefix(EstimatorKind::Tree4LT, bucket, d), leaves, 1e-9 * (1.0 + bucket.c));
      // Node codes carry at most half a quantization step each; three levels contribute.
      const double step = double(F) * double(b) * (0.5 / 63 + 0.5 / 31 + 0.5 / 15);
      EXPECT_LE(std::abs(leaves - double(truth)), step + 1e-9);
    }
  }
}

TEST(EstimatePrefix, PiecewiseConstantIsExactForTheHalfSplit) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t half = 1 + rng() % 50;
    const Count a = rng() % 20;
    const Count z = rng() % 20;
    std::vector<Count> freq(half, a);
    freq.insert(freq.end(), half, z);
    const auto bucket = encode_bucket(EstimatorKind::Split2, freq);
    Count truth = 0;
    for (std::size_t d = 1; d <= freq.size(); ++d) {
      truth += freq[d - 1];
      EXPECT_NEAR(estimate_prefix(EstimatorKind::Split2, bucket, d), double(truth), 1e-9);
    }
  }
}

TEST(EstimateRange, ComposesBuckets) {
  const FrequencySet fs({3, 0, 5, 1, 1, 8, 0, 2});
  for (auto kind : kAllEstimators) {
    Histogram hist;
    hist.estimator = kind;
    for (auto [lo, hi] : {std::pair<std::size_t, std::size_t>{1, 3}, {4, 6}, {7, 8}}) {
      Bucket b = make_bucket(fs, lo, hi);
      b.payload = encode_payload(kind, fs.slice(lo, hi));
      hist.buckets.push_back(b);
    }
    EXPECT_DOUBLE_EQ(estimate_range(hist, fs, {4, 6}), 10.0);
    EXPECT_DOUBLE_EQ(estimate_range(hist, fs, {1, 6}), 18.0);
    if (kind != EstimatorKind::USA && kind != EstimatorKind::OneBiased) {
      EXPECT_NEAR(estimate_range(hist, fs, {1, 8}), 20.0, 1e-9);
    }
    EXPECT_GE(estimate_range(hist, fs, {2, 2}), 0.0);
    EXPECT_THROW(estimate_range(hist, fs, {0, 3}), RangeError);
    EXPECT_THROW(estimate_range(hist, fs, {5, 9}), RangeError);
  }
}

TEST(EstimateRange, PartialBucketContinuousValue) {
  const FrequencySet fs({4, 0, 0, 6, 10});
  Histogram hist;
  hist.buckets = {make_bucket(fs, 1, 5)};
  EXPECT_DOUBLE_EQ(estimate_range(hist, fs, {2, 4}), (4.0 / 5 - 1.0 / 5) * 20);
}

TEST(EstimateRange, ClampsNegativeContributions) {
  // 1-biased estimate dips below the previous one across the last step.
  Histogram hist;
  hist.estimator = EstimatorKind::OneBiased;
  hist.buckets = {summary_bucket(4, 2, 40)};
  EXPECT_GE(estimate_range(hist, {4, 4}, 4), 0.0);
}

TEST(EstimateRange, UncoveredNullPositionsContributeNothing) {
  const FrequencySet fs({0, 0, 5, 5, 0, 0});
  Histogram hist;
  hist.buckets = {make_bucket(fs, 3, 4)};
  EXPECT_DOUBLE_EQ(estimate_range(hist, fs, {1, 2}), 0.0);
  EXPECT_DOUBLE_EQ(estimate_range(hist, fs, {1, 6}), 10.0);
}
