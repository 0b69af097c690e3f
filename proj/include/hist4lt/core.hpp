#pragma once

#include <algorithm>
#include <cctype>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hist4lt/error.hpp"
#include "hist4lt/packed_tree.hpp"

namespace hist4lt {

using Count = std::uint64_t;

// Frequencies over the ordered domain u_1..u_m, addressed by index 1..m, plus prefix sums.
// Attribute values themselves are not kept here; only their rank in the domain matters.
class FrequencySet {
 public:
  FrequencySet() = default;

  explicit FrequencySet(std::vector<Count> freq) : freq_(std::move(freq)) {
    cum_.resize(freq_.size() + 1, 0);
    non_null_.resize(freq_.size() + 1, 0);
    for (std::size_t i = 0; i < freq_.size(); ++i) {
      cum_[i + 1] = cum_[i] + freq_[i];
      non_null_[i + 1] = non_null_[i] + (freq_[i] > 0 ? 1 : 0);
    }
  }

  std::size_t size() const { return freq_.size(); }
  Count total() const { return cum_.back(); }

  // 1-based.
  Count freq(std::size_t i) const {
    check_index(i, 1, "frequency index");
    return freq_[i - 1];
  }

  // S[d] = f(u_1) + ... + f(u_d); S[0] = 0.
  Count cum(std::size_t d) const {
    check_index(d, 0, "prefix length");
    return cum_[d];
  }

  // Sum of frequencies over the inclusive range [lo, hi].
  Count range_sum(std::size_t lo, std::size_t hi) const {
    check_range(lo, hi);
    return cum_[hi] - cum_[lo - 1];
  }

  std::size_t non_null_count(std::size_t lo, std::size_t hi) const {
    check_range(lo, hi);
    return non_null_[hi] - non_null_[lo - 1];
  }

  // Frequencies of [lo, hi] as a contiguous view.
  std::span<const Count> slice(std::size_t lo, std::size_t hi) const {
    check_range(lo, hi);
    return std::span<const Count>(freq_).subspan(lo - 1, hi - lo + 1);
  }

  std::span<const Count> frequencies() const { return freq_; }
  std::span<const Count> cumulative() const { return cum_; }

  // Indices of the non-null values, ascending.
  std::vector<std::size_t> value_set() const {
    std::vector<std::size_t> values;
    for (std::size_t i = 0; i < freq_.size(); ++i) {
      if (freq_[i] > 0) values.push_back(i + 1);
    }
    return values;
  }

  friend bool operator==(const FrequencySet& a, const FrequencySet& b) { return a.freq_ == b.freq_; }

 private:
  void check_index(std::size_t i, std::size_t lowest, const char* what) const {
    if (i < lowest || i > freq_.size()) {
      throw RangeError(std::string(what) + " " + std::to_string(i) + " outside [" + std::to_string(lowest) + ", " +
                       std::to_string(freq_.size()) + "]");
    }
  }

  void check_range(std::size_t lo, std::size_t hi) const {
    if (lo < 1 || lo > hi || hi > freq_.size()) {
      throw RangeError("range [" + std::to_string(lo) + ", " + std::to_string(hi) + "] invalid for domain size " +
                       std::to_string(freq_.size()));
    }
  }

  std::vector<Count> freq_;
  std::vector<Count> cum_{0};
  std::vector<std::size_t> non_null_{0};
};

inline Count exact_prefix(const FrequencySet& fs, std::size_t d) { return fs.cum(d); }

// Spread of a non-null value: distance to the next non-null value, 1 for the last one.
struct Spread {
  std::size_t index = 0;
  std::size_t spread = 0;
  friend bool operator==(const Spread&, const Spread&) = default;
};

inline std::vector<Spread> spreads(const FrequencySet& fs) {
  const auto values = fs.value_set();
  std::vector<Spread> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.push_back({values[k], k + 1 < values.size() ? values[k + 1] - values[k] : 1});
  }
  return out;
}

// Inclusive 1-based sub-range [first, last] of one part; empty when first > last.
struct PartBounds {
  std::size_t first = 0;
  std::size_t last = 0;

  bool empty() const { return first > last; }
  std::size_t size() const { return empty() ? 0 : last - first + 1; }
  friend bool operator==(const PartBounds&, const PartBounds&) = default;
};

constexpr std::size_t ceil_div(std::size_t num, std::size_t den) { return (num + den - 1) / den; }

// i-th of j equal-size parts of a bucket of size b:
//   first = 1 + ceil(b (i-1) / j),  last = ceil(b i / j).
inline PartBounds partition_bounds(std::size_t b, std::size_t j, std::size_t i) {
  if (b < 1 || j < 1 || i < 1 || i > j) {
    throw RangeError("partition_bounds needs b >= 1 and 1 <= i <= j (b=" + std::to_string(b) +
                     ", j=" + std::to_string(j) + ", i=" + std::to_string(i) + ")");
  }
  return {1 + ceil_div(b * (i - 1), j), ceil_div(b * i, j)};
}

// Frequency sum of the i-th of j equal-size parts of the bucket frequencies; 0 for an empty part.
inline Count delta(std::span<const Count> bucket, std::size_t j, std::size_t i) {
  const auto part = partition_bounds(bucket.size(), j, i);
  Count sum = 0;
  for (std::size_t k = part.first; k <= part.last; ++k) sum += bucket[k - 1];
  return sum;
}

// ---------------------------------------------------------------------------
// Estimators and payloads
// ---------------------------------------------------------------------------

enum class EstimatorKind { CVA, USA, OneBiased, Split2, Split4, Split8, Tree3LT, Tree4LT };

inline constexpr std::array<EstimatorKind, 8> kAllEstimators{
    EstimatorKind::CVA,    EstimatorKind::USA,    EstimatorKind::OneBiased, EstimatorKind::Split2,
    EstimatorKind::Split4, EstimatorKind::Split8, EstimatorKind::Tree3LT,   EstimatorKind::Tree4LT};

// Short names used on the command line and in files.
inline std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::CVA: return "cva";
    case EstimatorKind::USA: return "usa";
    case EstimatorKind::OneBiased: return "1b";
    case EstimatorKind::Split2: return "2s";
    case EstimatorKind::Split4: return "4s";
    case EstimatorKind::Split8: return "8s";
    case EstimatorKind::Tree3LT: return "3lt";
    case EstimatorKind::Tree4LT: return "4lt";
  }
  return "?";
}

inline EstimatorKind parse_estimator(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (auto kind : kAllEstimators) {
    if (to_string(kind) == lower) return kind;
  }
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

struct Split2Payload {
  Count first_half = 0;
  friend bool operator==(const Split2Payload&, const Split2Payload&) = default;
};
struct Split4Payload {
  std::array<std::uint8_t, 4> codes{};
  friend bool operator==(const Split4Payload&, const Split4Payload&) = default;
};
struct Split8Payload {
  std::array<std::uint8_t, 8> codes{};  // 4-bit values
  friend bool operator==(const Split8Payload&, const Split8Payload&) = default;
};
struct Tree3Payload {
  PackedTreeIndex index;
  friend bool operator==(const Tree3Payload&, const Tree3Payload&) = default;
};
struct Tree4Payload {
  PackedTreeIndex index;
  friend bool operator==(const Tree4Payload&, const Tree4Payload&) = default;
};

using Payload = std::variant<std::monostate, Split2Payload, Split4Payload, Split8Payload, Tree3Payload, Tree4Payload>;

// Index into Payload that a kind requires.
constexpr std::size_t payload_index(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Split2: return 1;
    case EstimatorKind::Split4: return 2;
    case EstimatorKind::Split8: return 3;
    case EstimatorKind::Tree3LT: return 4;
    case EstimatorKind::Tree4LT: return 5;
    default: return 0;
  }
}

// <inf, sup, t, c> plus the estimator payload. Bounds are inclusive, 1-based domain indices.
struct Bucket {
  std::size_t inf = 1;
  std::size_t sup = 1;
  std::size_t t = 0;
  Count c = 0;
  Payload payload;

  std::size_t size() const { return sup - inf + 1; }
  bool contains(std::size_t i) const { return inf <= i && i <= sup; }
  friend bool operator==(const Bucket&, const Bucket&) = default;
};

// Summary of [inf, sup] over fs with no payload.
inline Bucket make_bucket(const FrequencySet& fs, std::size_t inf, std::size_t sup) {
  return Bucket{inf, sup, fs.non_null_count(inf, sup), fs.range_sum(inf, sup), {}};
}

// Stand-alone bucket [1, b] over a frequency vector.
inline Bucket make_bucket(std::span<const Count> freqs) {
  if (freqs.empty()) throw RangeError("a bucket needs at least one domain value");
  Bucket bucket{1, freqs.size(), 0, 0, {}};
  for (Count f : freqs) {
    bucket.c += f;
    bucket.t += f > 0 ? 1 : 0;
  }
  return bucket;
}

enum class BuildMethod { EquiSplit, MaxDiff, VOptimal };

inline std::string_view to_string(BuildMethod method) {
  switch (method) {
    case BuildMethod::EquiSplit: return "es";
    case BuildMethod::MaxDiff: return "md";
    case BuildMethod::VOptimal: return "vo";
  }
  return "?";
}

inline BuildMethod parse_method(std::string_view name) {
  if (name == "es") return BuildMethod::EquiSplit;
  if (name == "md") return BuildMethod::MaxDiff;
  if (name == "vo") return BuildMethod::VOptimal;
  throw ConfigError("unknown build method '" + std::string(name) + "'");
}

struct Histogram {
  std::vector<Bucket> buckets;
  EstimatorKind estimator = EstimatorKind::CVA;
  BuildMethod method = BuildMethod::EquiSplit;
  std::uint64_t storage_bits = 0;

  std::size_t bucket_count() const { return buckets.size(); }
};

// Empty when valid; otherwise a description of the first violated condition.
inline std::optional<std::string> validate(const Histogram& hist, const FrequencySet& fs) {
  const std::size_t m = fs.size();
  std::size_t covered_until = 0;  // highest index inspected so far
  for (std::size_t k = 0; k < hist.buckets.size(); ++k) {
    const Bucket& b = hist.buckets[k];
    const std::string where = "bucket " + std::to_string(k);
    if (b.inf < 1 || b.inf > b.sup || b.sup > m) return where + ": bounds outside the domain";
    if (k > 0 && hist.buckets[k - 1].sup >= b.inf) return where + ": overlaps its predecessor";
    if (b.c != fs.range_sum(b.inf, b.sup)) return where + ": c differs from the frequency sum";
    if (b.t != fs.non_null_count(b.inf, b.sup)) return where + ": t differs from the non-null count";
    if (b.payload.index() != payload_index(hist.estimator)) return where + ": payload does not match the estimator";
    if (b.inf > covered_until + 1 && fs.non_null_count(covered_until + 1, b.inf - 1) > 0) {
      return where + ": non-null value before it is not covered";
    }
    covered_until = b.sup;
  }
  if (covered_until < m && fs.non_null_count(covered_until + 1, m) > 0) {
    return std::string("non-null value after the last bucket is not covered");
  }
  return std::nullopt;
}

struct RangeQuery {
  std::size_t lo = 1;
  std::size_t hi = 1;
};

inline Count exact_range(const FrequencySet& fs, RangeQuery q) { return fs.range_sum(q.lo, q.hi); }

}  // namespace hist4lt
