#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hist4lt/core.hpp"
#include "hist4lt/estimators.hpp"

namespace hist4lt {

// Error statistics of one method over one query set.
//   avg_rel   mean of |S - S~| / S over the queries with S > 0 (a fraction, not percent)
//   norm_abs  sum |S - S~| / (c * b); absent when c = 0
struct ErrorReport {
  double avg_rel = 0.0;
  std::optional<double> norm_abs;
  double max_abs = 0.0;
  std::size_t queries = 0;
  std::size_t skipped_zero = 0;  // queries with S = 0, left out of avg_rel
};

inline ErrorReport error_metrics(std::span<const double> truth, std::span<const double> estimate, double total,
                                 std::size_t size) {
  if (truth.size() != estimate.size()) throw ConfigError("truth and estimate lengths differ");
  if (truth.empty()) throw ConfigError("empty query set");
  ErrorReport report;
  report.queries = truth.size();
  double rel_sum = 0.0;
  double abs_sum = 0.0;
  for (std::size_t q = 0; q < truth.size(); ++q) {
    const double err = std::abs(truth[q] - estimate[q]);
    abs_sum += err;
    report.max_abs = std::max(report.max_abs, err);
    if (truth[q] > 0) {
      rel_sum += err / truth[q];
    } else {
      ++report.skipped_zero;
    }
  }
  const std::size_t counted = report.queries - report.skipped_zero;
  report.avg_rel = counted > 0 ? rel_sum / double(counted) : 0.0;
  if (total > 0) report.norm_abs = abs_sum / (total * double(size));
  return report;
}

// All queries S[d], 1 <= d < b, against an arbitrary prefix estimator.
inline ErrorReport run_bucket_queryset(std::span<const Count> freqs,
                                       const std::function<double(std::size_t)>& estimate) {
  const std::size_t b = freqs.size();
  if (b < 2) throw ConfigError("bucket query set needs b >= 2");
  std::vector<double> truth(b - 1);
  std::vector<double> est(b - 1);
  Count running = 0;
  for (std::size_t d = 1; d < b; ++d) {
    running += freqs[d - 1];
    truth[d - 1] = static_cast<double>(running);
    est[d - 1] = estimate(d);
  }
  return error_metrics(truth, est, double(running + freqs[b - 1]), b);
}

inline ErrorReport run_bucket_queryset(std::span<const Count> freqs, EstimatorKind kind) {
  const Bucket bucket = encode_bucket(kind, freqs);
  return run_bucket_queryset(freqs, [&](std::size_t d) { return estimate_prefix(kind, bucket, d); });
}

// Largest |S[d] - S~[d]| over 0 <= d <= b.
inline double max_prefix_error(std::span<const Count> freqs, EstimatorKind kind) {
  const Bucket bucket = encode_bucket(kind, freqs);
  double worst = 0.0;
  Count running = 0;
  for (std::size_t d = 1; d <= freqs.size(); ++d) {
    running += freqs[d - 1];
    worst = std::max(worst, std::abs(double(running) - estimate_prefix(kind, bucket, d)));
  }
  return worst;
}

// Queries X <= d for every d in the domain.
inline ErrorReport run_histogram_queryset(const FrequencySet& fs, const Histogram& hist) {
  const std::size_t m = fs.size();
  std::vector<double> truth(m);
  std::vector<double> est(m);
  for (std::size_t d = 1; d <= m; ++d) {
    truth[d - 1] = static_cast<double>(fs.cum(d));
    est[d - 1] = estimate_range(hist, RangeQuery{1, d}, m);
  }
  return error_metrics(truth, est, double(fs.total()), m);
}

// ---------------------------------------------------------------------------
// Worst-case analysis
// ---------------------------------------------------------------------------

struct WorstCaseBounds {
  double interpolation = 0.0;
  double scaling = 0.0;
  double total() const { return interpolation + scaling; }
};

// Size of the smallest equal-size sub-bucket the method interpolates over.
inline std::size_t smallest_subbucket(EstimatorKind kind, std::size_t b) {
  switch (kind) {
    case EstimatorKind::CVA:
    case EstimatorKind::USA:
    case EstimatorKind::OneBiased: return b;
    case EstimatorKind::Split2: return b / 2;
    case EstimatorKind::Split4:
    case EstimatorKind::Tree3LT: return b / 4;
    case EstimatorKind::Split8:
    case EstimatorKind::Tree4LT: return b / 8;
  }
  return b;
}

// Worst-case interpolation and scaling errors for a bucket of size b (b mod 8 = 0) whose
// largest frequency is F.
inline WorstCaseBounds worst_case_bounds(EstimatorKind kind, double max_freq, std::size_t b) {
  if (b == 0 || b % 8 != 0) {
    throw ConfigError("worst-case bounds hold for b mod 8 = 0 only (b=" + std::to_string(b) + ")");
  }
  const double fb = max_freq * double(b);
  WorstCaseBounds bounds;
  bounds.interpolation = fb / (4.0 * double(b / smallest_subbucket(kind, b)));
  switch (kind) {
    case EstimatorKind::Split4: bounds.scaling = fb / 512.0; break;
    case EstimatorKind::Split8: bounds.scaling = fb / 32.0; break;
    case EstimatorKind::Tree3LT: bounds.scaling = fb / 4096.0; break;
    case EstimatorKind::Tree4LT: bounds.scaling = fb / 128.0; break;
    default: break;
  }
  return bounds;
}

struct AdversarialBucket {
  std::vector<Count> freqs;
  std::size_t worst_d = 0;  // query that hits the interpolation bound
};

// Half of the first smallest sub-bucket filled with F, everything else 0; the worst query
// covers exactly that filled half. Needs an even smallest sub-bucket.
inline AdversarialBucket adversarial_bucket(EstimatorKind kind, Count max_freq, std::size_t b) {
  if (b == 0 || b % 8 != 0) {
    throw ConfigError("adversarial construction needs b mod 8 = 0 (b=" + std::to_string(b) + ")");
  }
  const std::size_t sub = smallest_subbucket(kind, b);
  if (sub % 2 != 0) {
    throw ConfigError("adversarial construction needs an even smallest sub-bucket; " +
                      std::string(to_string(kind)) + " at b=" + std::to_string(b) + " has size " +
                      std::to_string(sub));
  }
  AdversarialBucket out;
  out.freqs.assign(b, 0);
  std::fill_n(out.freqs.begin(), sub / 2, max_freq);
  out.worst_d = sub / 2;
  return out;
}

}  // namespace hist4lt
