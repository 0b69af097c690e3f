#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "hist4lt/core.hpp"
#include "hist4lt/estimators.hpp"

namespace hist4lt {

// Storage charged per bucket, with 32-bit integers:
//   MaxDiff / V-Optimal store one boundary and the sum, EquiSplit only the sum
//   (boundaries follow from b). Every estimator except CVA adds one word: the packed
//   payload, the stored half sum, or t for USA / 1b.
constexpr std::uint64_t bits_per_bucket(BuildMethod method, EstimatorKind kind) {
  const std::uint64_t base = method == BuildMethod::EquiSplit ? 32 : 64;
  return base + (kind == EstimatorKind::CVA ? 0 : 32);
}

inline std::size_t budget_to_buckets(std::uint64_t budget_bits, BuildMethod method, EstimatorKind kind) {
  const std::uint64_t per_bucket = bits_per_bucket(method, kind);
  if (budget_bits < per_bucket) {
    throw ConfigError("budget of " + std::to_string(budget_bits) + " bits cannot hold one " +
                      std::string(to_string(method)) + "+" + std::string(to_string(kind)) + " bucket (" +
                      std::to_string(per_bucket) + " bits)");
  }
  return static_cast<std::size_t>(budget_bits / per_bucket);
}

// Encodes the payload for kind into every bucket and updates the storage cost.
inline Histogram attach_payloads(Histogram hist, const FrequencySet& fs, EstimatorKind kind) {
  hist.estimator = kind;
  for (Bucket& b : hist.buckets) b.payload = encode_payload(kind, fs.slice(b.inf, b.sup));
  hist.storage_bits = hist.buckets.size() * bits_per_bucket(hist.method, kind);
  return hist;
}

namespace detail {

inline Histogram plain_histogram(const FrequencySet& fs, BuildMethod method,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
  Histogram hist;
  hist.method = method;
  hist.estimator = EstimatorKind::CVA;
  hist.buckets.reserve(ranges.size());
  for (auto [inf, sup] : ranges) hist.buckets.push_back(make_bucket(fs, inf, sup));
  hist.storage_bits = hist.buckets.size() * bits_per_bucket(method, EstimatorKind::CVA);
  return hist;
}

}  // namespace detail

// Equal-size buckets of b = ceil(m / k); the last one may be shorter, and fewer than k
// buckets result when ceil(m / k) * (k - 1) >= m.
inline Histogram build_equisplit(const FrequencySet& fs, std::size_t k) {
  const std::size_t m = fs.size();
  if (k < 1 || k > m) {
    throw ConfigError("EquiSplit needs 1 <= k <= m (k=" + std::to_string(k) + ", m=" + std::to_string(m) + ")");
  }
  const std::size_t b = ceil_div(m, k);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t inf = 1; inf <= m; inf += b) ranges.emplace_back(inf, std::min(inf + b - 1, m));
  return detail::plain_histogram(fs, BuildMethod::EquiSplit, ranges);
}

// Positions k (0-based into the value set) after which MaxDiff places a boundary: the h-1
// largest |area(v_{k+1}) - area(v_k)|, ties going to the leftmost pair. Result is ascending.
inline std::vector<std::size_t> maxdiff_boundaries(const FrequencySet& fs, std::size_t h) {
  const auto sp = spreads(fs);
  if (sp.size() < 2 || h < 2) return {};
  std::vector<Count> area(sp.size());
  for (std::size_t k = 0; k < sp.size(); ++k) area[k] = fs.freq(sp[k].index) * sp[k].spread;

  std::vector<std::size_t> order(sp.size() - 1);
  std::iota(order.begin(), order.end(), 0);
  auto diff = [&](std::size_t k) { return area[k + 1] > area[k] ? area[k + 1] - area[k] : area[k] - area[k + 1]; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return diff(a) > diff(b); });
  order.resize(std::min(order.size(), h - 1));
  std::sort(order.begin(), order.end());
  return order;
}

// Each bucket starts at its first non-null value and extends to just before the next
// bucket's first non-null value; the last bucket extends to m.
inline Histogram build_maxdiff(const FrequencySet& fs, std::size_t h) {
  if (h < 1) throw ConfigError("MaxDiff needs at least one bucket");
  const auto values = fs.value_set();
  if (values.empty()) throw InvariantError("MaxDiff over an empty value set");
  std::vector<std::size_t> starts{values.front()};
  for (std::size_t k : maxdiff_boundaries(fs, h)) starts.push_back(values[k + 1]);

  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t n = 0; n < starts.size(); ++n) {
    ranges.emplace_back(starts[n], n + 1 < starts.size() ? starts[n + 1] - 1 : fs.size());
  }
  return detail::plain_histogram(fs, BuildMethod::MaxDiff, ranges);
}

// Sum over the buckets of sum_j (f(j) - avg)^2, nulls included.
inline double total_sse(const FrequencySet& fs, const Histogram& hist) {
  double total = 0.0;
  for (const Bucket& b : hist.buckets) {
    const double avg = double(b.c) / double(b.size());
    for (Count f : fs.slice(b.inf, b.sup)) total += (double(f) - avg) * (double(f) - avg);
  }
  return total;
}

// Minimum-SSE partition of [1, m] into exactly min(h, m) contiguous buckets by dynamic
// programming over prefix sums of f and f^2, O(m^2 h). Among equal costs the smallest
// split point wins, giving the leftmost-boundary optimum.
inline Histogram build_voptimal(const FrequencySet& fs, std::size_t h) {
  const std::size_t m = fs.size();
  if (h < 1 || h > m) {
    throw ConfigError("V-Optimal needs 1 <= h <= m (h=" + std::to_string(h) + ", m=" + std::to_string(m) + ")");
  }
  using Wide = unsigned __int128;
  std::vector<Count> sum(m + 1, 0);
  std::vector<Wide> sum_sq(m + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    const Count f = fs.freq(i);
    sum[i] = sum[i - 1] + f;
    sum_sq[i] = sum_sq[i - 1] + Wide{f} * f;
  }
  // SSE of [a, b] (1-based) = (len * sum f^2 - (sum f)^2) / len, numerator exact.
  auto sse = [&](std::size_t a, std::size_t b) {
    const Count len = b - a + 1;
    const Wide s = sum[b] - sum[a - 1];
    const Wide num = Wide{len} * (sum_sq[b] - sum_sq[a - 1]) - s * s;
    return static_cast<double>(num) / double(len);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(h + 1, std::vector<double>(m + 1, kInf));
  std::vector<std::vector<std::size_t>> split(h + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t j = 1; j <= m; ++j) cost[1][j] = sse(1, j);
  for (std::size_t k = 2; k <= h; ++k) {
    for (std::size_t j = k; j <= m; ++j) {
      double best = kInf;
      std::size_t best_i = k - 1;
      for (std::size_t i = k - 1; i < j; ++i) {
        const double candidate = cost[k - 1][i] + sse(i + 1, j);
        if (candidate < best) {
          best = candidate;
          best_i = i;
        }
      }
      cost[k][j] = best;
      split[k][j] = best_i;
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> ranges(h);
  std::size_t sup = m;
  for (std::size_t k = h; k >= 1; --k) {
    const std::size_t inf = k == 1 ? 1 : split[k][sup] + 1;
    ranges[k - 1] = {inf, sup};
    sup = inf - 1;
  }
  return detail::plain_histogram(fs, BuildMethod::VOptimal, ranges);
}

inline Histogram build_histogram(const FrequencySet& fs, BuildMethod method, EstimatorKind kind,
                                 std::size_t buckets) {
  Histogram hist;
  switch (method) {
    case BuildMethod::EquiSplit: hist = build_equisplit(fs, std::min(buckets, fs.size())); break;
    case BuildMethod::MaxDiff: hist = build_maxdiff(fs, buckets); break;
    case BuildMethod::VOptimal: hist = build_voptimal(fs, std::min(buckets, fs.size())); break;
  }
  return attach_payloads(std::move(hist), fs, kind);
}

inline Histogram build_with_budget(const FrequencySet& fs, BuildMethod method, EstimatorKind kind,
                                   std::uint64_t budget_bits) {
  return build_histogram(fs, method, kind, budget_to_buckets(budget_bits, method, kind));
}

}  // namespace hist4lt
