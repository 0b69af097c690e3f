#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <regex>
#include <string>
#include <vector>

#include "hist4lt/core.hpp"
#include "hist4lt/random.hpp"

namespace hist4lt {

// Integer apportionment of `total` proportional to `weights` by the largest-remainder rule
// (ties to the lower index). Parts that round to 0 are raised to 1 by taking units from the
// currently largest part, so every part is >= 1 and the sum is exactly `total`.
inline std::vector<Count> apportion(const std::vector<double>& weights, Count total) {
  const std::size_t n = weights.size();
  if (n == 0) return {};
  if (total < n) {
    throw ConfigError("cannot give " + std::to_string(n) + " parts at least 1 out of " + std::to_string(total));
  }
  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<Count> parts(n);
  std::vector<double> remainder(n);
  Count assigned = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double quota = double(total) * weights[k] / weight_sum;
    parts[k] = static_cast<Count>(std::floor(quota));
    remainder[k] = quota - std::floor(quota);
    assigned += parts[k];
  }
  // Floating error can overshoot by a unit or two; trim from the largest parts.
  while (assigned > total) {
    auto largest = std::max_element(parts.begin(), parts.end());
    --*largest;
    --assigned;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % n, ++assigned) ++parts[order[k]];

  for (std::size_t k = 0; k < n; ++k) {
    if (parts[k] > 0) continue;
    auto largest = std::max_element(parts.begin(), parts.end());
    --*largest;
    parts[k] = 1;
  }
  return parts;
}

inline std::vector<double> zipf_weights(std::size_t count, double z) {
  std::vector<double> w(count);
  for (std::size_t r = 1; r <= count; ++r) w[r - 1] = std::pow(double(r), -z);
  return w;
}

// t counts proportional to rank^-z (rank 1 first), summing exactly to total, each >= 1.
inline std::vector<Count> gen_zipf_frequencies(std::size_t t, Count total, double z) {
  if (t < 1) throw ConfigError("need at least one frequency");
  if (z < 0) throw ConfigError("Zipf parameter must be non-negative");
  return apportion(zipf_weights(t, z), total);
}

// t counts with weights |N(0,1)| + 1e-6, summing exactly to total, each >= 1.
inline std::vector<Count> gen_gauss_frequencies(std::size_t t, Count total, std::uint64_t seed) {
  if (t < 1) throw ConfigError("need at least one frequency");
  Rng rng(seed);
  std::vector<double> w(t);
  for (double& x : w) x = std::abs(standard_normal(rng)) + 1e-6;
  return apportion(w, total);
}

// t spreads summing to `span`: Zipf(z) values ascending over the first ceil(t/2) elements,
// then Zipf(z) values descending over the remaining floor(t/2).
inline std::vector<Count> gen_spreads_cuspmax(std::size_t t, double z, Count span) {
  if (t < 1) throw ConfigError("need at least one spread");
  const std::size_t rising = (t + 1) / 2;
  auto up = zipf_weights(rising, z);
  std::reverse(up.begin(), up.end());
  const auto down = zipf_weights(t - rising, z);
  up.insert(up.end(), down.begin(), down.end());
  return apportion(up, span);
}

// Same multiset as gen_spreads_cuspmax, randomly permuted.
inline std::vector<Count> gen_spreads_zrand(std::size_t t, double z, Count span, std::uint64_t seed) {
  auto spreads = gen_spreads_cuspmax(t, z, span);
  Rng rng(seed);
  shuffle(std::span<Count>(spreads), rng);
  return spreads;
}

// Spreads of t uniformly random positions: the first at 1, the other t-1 distinct in
// [2, span]; the last spread closes the span so the total is `span`.
inline std::vector<Count> gen_spreads_random(std::size_t t, Count span, std::uint64_t seed) {
  if (t < 1) throw ConfigError("need at least one spread");
  if (span < t) throw ConfigError("span shorter than the number of values");
  Rng rng(seed);
  // Partial Fisher-Yates over the candidate positions 2..span.
  std::vector<Count> candidates(span - 1);
  std::iota(candidates.begin(), candidates.end(), Count{2});
  for (std::size_t k = 0; k + 1 < t; ++k) {
    std::swap(candidates[k], candidates[k + uniform_below(rng, candidates.size() - k)]);
  }
  std::vector<Count> positions{1};
  positions.insert(positions.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(t - 1));
  std::sort(positions.begin(), positions.end());
  std::vector<Count> spreads(t);
  for (std::size_t k = 0; k + 1 < t; ++k) spreads[k] = positions[k + 1] - positions[k];
  spreads[t - 1] = span + 1 - positions[t - 1];
  return spreads;
}

// Places value k at 1 + s_1 + ... + s_{k-1} and assigns the frequencies to the positions in
// a random order. When the positions overflow [1, domain] the spreads are scaled by a common
// factor (floored, at least 1) and trimmed from the largest until they fit.
inline FrequencySet assemble(std::vector<Count> freqs, std::vector<Count> spreads, std::size_t domain,
                             std::uint64_t seed) {
  const std::size_t t = freqs.size();
  if (t == 0 || spreads.size() != t) throw ConfigError("need one spread per frequency");
  if (t > domain) {
    throw ConfigError(std::to_string(t) + " values do not fit a domain of " + std::to_string(domain));
  }
  const Count limit = domain - 1;  // room for s_1 + ... + s_{t-1}
  Count used = std::accumulate(spreads.begin(), spreads.end() - 1, Count{0});
  if (used > limit) {
    const double factor = double(limit) / double(used);
    used = 0;
    for (std::size_t k = 0; k + 1 < t; ++k) {
      spreads[k] = std::max<Count>(1, static_cast<Count>(std::floor(double(spreads[k]) * factor)));
      used += spreads[k];
    }
    while (used > limit) {
      auto largest = std::max_element(spreads.begin(), spreads.end() - 1);
      if (*largest <= 1) throw ConfigError("spreads cannot be fitted into the domain");
      --*largest;
      --used;
    }
  }
  Rng rng(seed);
  shuffle(std::span<Count>(freqs), rng);
  std::vector<Count> dense(domain, 0);
  std::size_t pos = 1;
  for (std::size_t k = 0; k < t; ++k) {
    dense[pos - 1] = freqs[k];
    if (k + 1 < t) pos += spreads[k];
  }
  return FrequencySet(std::move(dense));
}

// ---------------------------------------------------------------------------
// Named distributions and populations
// ---------------------------------------------------------------------------

enum class FrequencyShape { Zipf, Gauss };
enum class SpreadShape { CuspMax, ZRand, Random };

// Distribution for frequencies plus distribution for spreads.
struct DataDistribution {
  FrequencyShape frequencies = FrequencyShape::Zipf;
  double frequency_z = 0.5;
  SpreadShape spreads = SpreadShape::CuspMax;
  double spread_z = 1.0;

  std::string name() const {
    auto fmt = [](double x) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", x);
      return std::string(buf);
    };
    if (frequencies == FrequencyShape::Gauss) return "gauss-rand";
    switch (spreads) {
      case SpreadShape::CuspMax: return "zipf-cuspmax(" + fmt(frequency_z) + "," + fmt(spread_z) + ")";
      case SpreadShape::ZRand: return "zipf-zrand(" + fmt(frequency_z) + "," + fmt(spread_z) + ")";
      case SpreadShape::Random: return "zipf-rand(" + fmt(frequency_z) + ")";
    }
    return "?";
  }
};

inline DataDistribution zipf_cuspmax(double fz, double sz = 1.0) { return {FrequencyShape::Zipf, fz, SpreadShape::CuspMax, sz}; }
inline DataDistribution zipf_zrand(double fz, double sz = 1.0) { return {FrequencyShape::Zipf, fz, SpreadShape::ZRand, sz}; }
inline DataDistribution gauss_rand() { return {FrequencyShape::Gauss, 0.0, SpreadShape::Random, 0.0}; }

// D1..D5 of the histogram experiments.
inline DataDistribution histogram_distribution(int n) {
  switch (n) {
    case 1: return zipf_cuspmax(0.5);
    case 2: return zipf_zrand(0.5);
    case 3: return gauss_rand();
    case 4: return zipf_cuspmax(1.5);
    case 5: return zipf_cuspmax(3.0);
  }
  throw ConfigError("histogram distributions are D1..D5");
}

// Accepts D1..D5, gauss-rand, zipf-cuspmax(fz,sz), zipf-zrand(fz,sz), zipf-rand(fz).
inline DataDistribution parse_distribution(const std::string& name) {
  static const std::regex d_re(R"([dD]([1-5]))");
  static const std::regex zipf_re(R"(zipf-(cuspmax|zrand)\(([0-9.]+),([0-9.]+)\))");
  static const std::regex zipf_rand_re(R"(zipf-rand\(([0-9.]+)\))");
  std::smatch m;
  if (std::regex_match(name, m, d_re)) return histogram_distribution(std::stoi(m[1]));
  if (name == "gauss-rand") return gauss_rand();
  if (std::regex_match(name, m, zipf_re)) {
    const SpreadShape shape = m[1] == "cuspmax" ? SpreadShape::CuspMax : SpreadShape::ZRand;
    return {FrequencyShape::Zipf, std::stod(m[2]), shape, std::stod(m[3])};
  }
  if (std::regex_match(name, m, zipf_rand_re)) return {FrequencyShape::Zipf, std::stod(m[1]), SpreadShape::Random, 0.0};
  throw ConfigError("unknown distribution '" + name + "'");
}

// Total count, domain (bucket) size and number of non-null values. Serves both bucket
// populations (c, b, t) and histogram populations (T, D, t).
struct PopulationSpec {
  Count total = 0;
  std::size_t domain = 0;
  std::size_t t = 0;

  void check() const {
    if (total == 0 || domain == 0 || t == 0) throw ConfigError("population parameters must be positive");
    if (t > domain) throw ConfigError("population has more non-null values than domain positions");
    if (total < t) throw ConfigError("population total smaller than its number of non-null values");
  }
  std::string name() const {
    return "p(" + std::to_string(total) + "," + std::to_string(domain) + "," + std::to_string(t) + ")";
  }
};

inline PopulationSpec histogram_population(int n) {
  switch (n) {
    case 1: return {100000, 4100, 500};
    case 2: return {500000, 4100, 500};
    case 3: return {500000, 4100, 1000};
  }
  throw ConfigError("histogram populations are P1..P3");
}

inline PopulationSpec t_var(std::size_t t) { return {20000, 500, t}; }
inline PopulationSpec b_var(std::size_t b) { return {20000, b, b / 5}; }

// Accepts P1..P3 and p(total,domain,t).
inline PopulationSpec parse_population(const std::string& name) {
  static const std::regex p_re(R"([pP]([1-3]))");
  static const std::regex generic_re(R"(p\((\d+),(\d+),(\d+)\))");
  std::smatch m;
  if (std::regex_match(name, m, p_re)) return histogram_population(std::stoi(m[1]));
  if (std::regex_match(name, m, generic_re)) {
    return {std::stoull(m[1]), std::stoull(m[2]), std::stoull(m[3])};
  }
  throw ConfigError("unknown population '" + name + "'");
}

// Sample number `sample` of (distribution, population): every random component is drawn
// from streams derived from (seed, sample).
inline FrequencySet generate_sample(const DataDistribution& dist, const PopulationSpec& pop, std::uint64_t seed,
                                    std::uint64_t sample) {
  pop.check();
  const std::uint64_t sample_seed = derive_seed(seed, sample);
  std::vector<Count> freqs = dist.frequencies == FrequencyShape::Zipf
                                 ? gen_zipf_frequencies(pop.t, pop.total, dist.frequency_z)
                                 : gen_gauss_frequencies(pop.t, pop.total, derive_seed(sample_seed, 1));
  std::vector<Count> spreads;
  switch (dist.spreads) {
    case SpreadShape::CuspMax: spreads = gen_spreads_cuspmax(pop.t, dist.spread_z, pop.domain); break;
    case SpreadShape::ZRand: spreads = gen_spreads_zrand(pop.t, dist.spread_z, pop.domain, derive_seed(sample_seed, 2)); break;
    case SpreadShape::Random: spreads = gen_spreads_random(pop.t, pop.domain, derive_seed(sample_seed, 2)); break;
  }
  return assemble(std::move(freqs), std::move(spreads), pop.domain, derive_seed(sample_seed, 3));
}

}  // namespace hist4lt
