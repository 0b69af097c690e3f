#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <variant>

#include "hist4lt/core.hpp"
#include "hist4lt/packed_tree.hpp"

namespace hist4lt {

// <num / den * levels> with round-half-away-from-zero, computed exactly in integers.
// A zero denominator encodes as 0.
inline std::uint32_t quantize(Count num, Count den, std::uint32_t levels) {
  if (den == 0) return 0;
  using Wide = unsigned __int128;
  const Wide scaled = Wide{num} * levels * 2 + den;
  return static_cast<std::uint32_t>(scaled / (Wide{den} * 2));
}

// ---------------------------------------------------------------------------
// Encoding (bucket build time)
// ---------------------------------------------------------------------------

inline Count encode_split2(std::span<const Count> bucket) { return delta(bucket, 2, 1); }

inline std::array<std::uint8_t, 4> encode_split4(std::span<const Count> bucket) {
  const Count c = delta(bucket, 1, 1);
  std::array<std::uint8_t, 4> codes{};
  for (std::size_t i = 0; i < 4; ++i) codes[i] = static_cast<std::uint8_t>(quantize(delta(bucket, 4, i + 1), c, 255));
  return codes;
}

inline std::array<std::uint8_t, 8> encode_split8(std::span<const Count> bucket) {
  const Count c = delta(bucket, 1, 1);
  std::array<std::uint8_t, 8> codes{};
  for (std::size_t i = 0; i < 8; ++i) codes[i] = static_cast<std::uint8_t>(quantize(delta(bucket, 8, i + 1), c, 15));
  return codes;
}

// Every node is coded relative to the true sum of its parent.
inline PackedTreeIndex encode_3lt(std::span<const Count> bucket) {
  const Count c = delta(bucket, 1, 1);
  const Count half1 = delta(bucket, 2, 1);
  const Count half2 = c - half1;
  return PackedTreeIndex::pack_3lt({quantize(half1, c, field_max(11)),
                                    quantize(delta(bucket, 4, 1), half1, field_max(10)),
                                    quantize(delta(bucket, 4, 3), half2, field_max(10))});
}

inline PackedTreeIndex encode_4lt(std::span<const Count> bucket) {
  std::array<Count, 4> quarter{};
  for (std::size_t i = 0; i < 4; ++i) quarter[i] = delta(bucket, 4, i + 1);
  const Count half1 = quarter[0] + quarter[1];
  const Count half2 = quarter[2] + quarter[3];
  const Count c = half1 + half2;
  return PackedTreeIndex::pack_4lt({
      quantize(half1, c, field_max(6)),
      quantize(quarter[0], half1, field_max(5)),
      quantize(quarter[2], half2, field_max(5)),
      quantize(delta(bucket, 8, 1), quarter[0], field_max(4)),
      quantize(delta(bucket, 8, 3), quarter[1], field_max(4)),
      quantize(delta(bucket, 8, 5), quarter[2], field_max(4)),
      quantize(delta(bucket, 8, 7), quarter[3], field_max(4)),
  });
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

// Approximate partial sums of every tree node. Left children come from the stored ratio,
// right children are the parent's complement, so siblings always add up to their parent.
struct DecodedTree {
  int depth = 4;  // 3 for 3LT (no eighths)
  double root = 0.0;
  std::array<double, 2> halves{};
  std::array<double, 4> quarters{};
  std::array<double, 8> eighths{};

  std::span<const double> leaves() const {
    return depth == 3 ? std::span<const double>(quarters) : std::span<const double>(eighths);
  }
};

inline DecodedTree decode_4lt(Count c, PackedTreeIndex index) {
  const auto L = index.fields_4lt();
  DecodedTree tree;
  tree.depth = 4;
  tree.root = static_cast<double>(c);
  tree.halves[0] = L[0] / double(field_max(6)) * tree.root;
  tree.halves[1] = tree.root - tree.halves[0];
  tree.quarters[0] = L[1] / double(field_max(5)) * tree.halves[0];
  tree.quarters[1] = tree.halves[0] - tree.quarters[0];
  tree.quarters[2] = L[2] / double(field_max(5)) * tree.halves[1];
  tree.quarters[3] = tree.halves[1] - tree.quarters[2];
  for (std::size_t q = 0; q < 4; ++q) {
    tree.eighths[2 * q] = L[3 + q] / double(field_max(4)) * tree.quarters[q];
    tree.eighths[2 * q + 1] = tree.quarters[q] - tree.eighths[2 * q];
  }
  return tree;
}

inline DecodedTree decode_3lt(Count c, PackedTreeIndex index) {
  const auto L = index.fields_3lt();
  DecodedTree tree;
  tree.depth = 3;
  tree.root = static_cast<double>(c);
  tree.halves[0] = L[0] / double(field_max(11)) * tree.root;
  tree.halves[1] = tree.root - tree.halves[0];
  tree.quarters[0] = L[1] / double(field_max(10)) * tree.halves[0];
  tree.quarters[1] = tree.halves[0] - tree.quarters[0];
  tree.quarters[2] = L[2] / double(field_max(10)) * tree.halves[1];
  tree.quarters[3] = tree.halves[1] - tree.quarters[2];
  return tree;
}

inline DecodedTree decode_tree(Count c, const Tree4Payload& payload) { return decode_4lt(c, payload.index); }
inline DecodedTree decode_tree(Count c, const Tree3Payload& payload) { return decode_3lt(c, payload.index); }

// ---------------------------------------------------------------------------
// Estimation of S[d] inside a bucket
// ---------------------------------------------------------------------------

namespace detail {

// Segment i (1-based) of n holding prefix length d: ceil((i-1) b / n) <= d < ceil(i b / n).
struct Segment {
  std::size_t i = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  double fraction(std::size_t d) const { return double(d - start) / double(end - start); }
};

inline Segment locate(std::size_t b, std::size_t n, std::size_t d) {
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t end = ceil_div(i * b, n);
    if (d < end) return {i, ceil_div((i - 1) * b, n), end};
  }
  throw RangeError("prefix length " + std::to_string(d) + " is not inside a bucket of size " + std::to_string(b));
}

// Piecewise-linear interpolation through the part sums, accumulating from the left.
inline double prefix_from_parts(std::size_t b, std::span<const double> parts, std::size_t d) {
  const auto seg = locate(b, parts.size(), d);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < seg.i; ++k) sum += parts[k];
  return sum + seg.fraction(d) * parts[seg.i - 1];
}

// Estimated sum of the values after position d, accumulating from the right.
inline double suffix_from_parts(std::size_t b, std::span<const double> parts, std::size_t d) {
  const auto seg = locate(b, parts.size(), d);
  double sum = 0.0;
  for (std::size_t k = seg.i; k < parts.size(); ++k) sum += parts[k];
  return sum + (1.0 - seg.fraction(d)) * parts[seg.i - 1];
}

template <std::size_t N>
double flat_split_prefix(const Bucket& bucket, const std::array<std::uint8_t, N>& codes, std::uint32_t levels,
                         std::size_t d) {
  const double c = static_cast<double>(bucket.c);
  std::array<double, N> parts{};
  for (std::size_t k = 0; k < N; ++k) parts[k] = codes[k] / double(levels) * c;
  const std::size_t b = bucket.size();
  if (2 * d > b) return c - suffix_from_parts(b, parts, d);
  return prefix_from_parts(b, parts, d);
}

// The segment-start sum is read off the tree nodes that cover [1, start] exactly:
// the left half when i > n/2, the covering quarter, and for 4LT the left sibling eighth.
inline double tree_prefix(const DecodedTree& tree, std::size_t b, std::size_t d) {
  const std::size_t n = tree.depth == 3 ? 4 : 8;
  const auto seg = locate(b, n, d);
  const std::size_t i = seg.i;
  double covered = 0.0;
  if (n == 4) {
    if (i > 2) covered += tree.halves[0];
    if (i == 2) covered += tree.quarters[0];
    if (i == 4) covered += tree.quarters[2];
    return covered + seg.fraction(d) * tree.quarters[i - 1];
  }
  if (i > 4) covered += tree.halves[0];
  if (i == 3 || i == 4) covered += tree.quarters[0];
  if (i == 7 || i == 8) covered += tree.quarters[2];
  if (i % 2 == 0) covered += tree.eighths[i - 2];
  return covered + seg.fraction(d) * tree.eighths[i - 1];
}

template <typename P>
const P& expect_payload(const Bucket& bucket, EstimatorKind kind) {
  const P* payload = std::get_if<P>(&bucket.payload);
  if (payload == nullptr) {
    throw ConfigError("estimator " + std::string(to_string(kind)) + " needs a matching bucket payload");
  }
  return *payload;
}

}  // namespace detail

// Estimate of S[d], the sum of the first d frequencies of the bucket, 0 <= d <= b.
inline double estimate_prefix(EstimatorKind kind, const Bucket& bucket, std::size_t d) {
  const std::size_t b = bucket.size();
  if (d > b) {
    throw RangeError("prefix length " + std::to_string(d) + " exceeds bucket size " + std::to_string(b));
  }
  if (bucket.payload.index() != payload_index(kind)) {
    throw ConfigError("bucket payload does not match estimator " + std::string(to_string(kind)));
  }
  if (d == 0) return 0.0;
  const double c = static_cast<double>(bucket.c);

  switch (kind) {
    case EstimatorKind::CVA:
      return double(d) / double(b) * c;

    case EstimatorKind::USA: {
      if (bucket.t == 0) {
        if (bucket.c == 0) return 0.0;
        throw InvariantError("USA estimation on a bucket with t = 0 but c > 0");
      }
      const double t = static_cast<double>(bucket.t);
      const double spacing = b > 1 ? (t - 1.0) * double(d - 1) / double(b - 1) : 0.0;
      return (1.0 + spacing) * c / t;
    }

    case EstimatorKind::OneBiased: {
      if (bucket.t == 0) return 0.0;
      if (b == 1) return c;
      const double t = static_cast<double>(bucket.t);
      return double(d) / double(b - 1) * (t - 1.0) / t * c;
    }

    case EstimatorKind::Split2: {
      if (d == b) return c;
      const auto& payload = detail::expect_payload<Split2Payload>(bucket, kind);
      const std::array<double, 2> halves{double(payload.first_half), c - double(payload.first_half)};
      return detail::prefix_from_parts(b, halves, d);
    }

    case EstimatorKind::Split4:
      if (d == b) return c;
      return detail::flat_split_prefix(bucket, detail::expect_payload<Split4Payload>(bucket, kind).codes, 255, d);

    case EstimatorKind::Split8:
      if (d == b) return c;
      return detail::flat_split_prefix(bucket, detail::expect_payload<Split8Payload>(bucket, kind).codes, 15, d);

    case EstimatorKind::Tree3LT:
      if (d == b) return c;
      return detail::tree_prefix(decode_tree(bucket.c, detail::expect_payload<Tree3Payload>(bucket, kind)), b, d);

    case EstimatorKind::Tree4LT:
      if (d == b) return c;
      return detail::tree_prefix(decode_tree(bucket.c, detail::expect_payload<Tree4Payload>(bucket, kind)), b, d);
  }
  throw ConfigError("unknown estimator kind");
}

// Payload for kind built from the true frequencies of a bucket.
inline Payload encode_payload(EstimatorKind kind, std::span<const Count> bucket) {
  switch (kind) {
    case EstimatorKind::CVA:
    case EstimatorKind::USA:
    case EstimatorKind::OneBiased:
      return std::monostate{};
    case EstimatorKind::Split2: return Split2Payload{encode_split2(bucket)};
    case EstimatorKind::Split4: return Split4Payload{encode_split4(bucket)};
    case EstimatorKind::Split8: return Split8Payload{encode_split8(bucket)};
    case EstimatorKind::Tree3LT: return Tree3Payload{encode_3lt(bucket)};
    case EstimatorKind::Tree4LT: return Tree4Payload{encode_4lt(bucket)};
  }
  throw ConfigError("unknown estimator kind");
}

// Stand-alone bucket [1, b] with the payload for kind.
inline Bucket encode_bucket(EstimatorKind kind, std::span<const Count> freqs) {
  Bucket bucket = make_bucket(freqs);
  bucket.payload = encode_payload(kind, freqs);
  return bucket;
}

// Fully covered buckets contribute c exactly, partially covered ones the difference of two
// prefix estimates (clamped at 0), disjoint ones nothing.
inline double estimate_range(const Histogram& hist, RangeQuery q, std::size_t domain_size) {
  if (q.lo < 1 || q.lo > q.hi || q.hi > domain_size) {
    throw RangeError("query [" + std::to_string(q.lo) + ", " + std::to_string(q.hi) + "] invalid for domain size " +
                     std::to_string(domain_size));
  }
  const auto& buckets = hist.buckets;
  auto it = std::partition_point(buckets.begin(), buckets.end(), [&](const Bucket& b) { return b.sup < q.lo; });
  double total = 0.0;
  for (; it != buckets.end() && it->inf <= q.hi; ++it) {
    const Bucket& b = *it;
    if (q.lo <= b.inf && b.sup <= q.hi) {
      total += static_cast<double>(b.c);
      continue;
    }
    const std::size_t from = std::max(q.lo, b.inf) - b.inf;  // d_lo - 1
    const std::size_t to = std::min(q.hi, b.sup) - b.inf + 1;
    const double part = estimate_prefix(hist.estimator, b, to) - estimate_prefix(hist.estimator, b, from);
    total += std::max(part, 0.0);
  }
  return total;
}

inline double estimate_range(const Histogram& hist, const FrequencySet& fs, RangeQuery q) {
  return estimate_range(hist, q, fs.size());
}

}  // namespace hist4lt
