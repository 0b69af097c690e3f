#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "hist4lt/builders.hpp"
#include "hist4lt/datagen.hpp"
#include "hist4lt/eval.hpp"

namespace hist4lt {

// Runs fn(0..n-1) on up to `threads` workers. fn must only write to its own slot.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads = std::thread::hardware_concurrency()) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t k = w; k < n; k += threads) fn(k);
    });
  }
}

// ---------------------------------------------------------------------------
// Inside-bucket experiment
// ---------------------------------------------------------------------------

struct BucketDataSet {
  std::string group;  // e.g. "zipf-t"
  std::string label;  // e.g. "t=100"
  DataDistribution distribution;
  PopulationSpec population;
};

// Data set groups zipf-t, zipf-b, gauss-t, gauss-b, zipf-z.
inline std::vector<BucketDataSet> bucket_datasets(const std::string& group) {
  std::vector<BucketDataSet> out;
  const std::vector<std::size_t> ts{10, 100, 200, 300, 400, 500};
  const std::vector<std::size_t> bs{100, 200, 500, 1000};
  if (group == "zipf-t" || group == "gauss-t") {
    const auto dist = group == "zipf-t" ? zipf_cuspmax(0.5, 1.0) : gauss_rand();
    for (auto t : ts) out.push_back({group, "t=" + std::to_string(t), dist, t_var(t)});
  } else if (group == "zipf-b" || group == "gauss-b") {
    const auto dist = group == "zipf-b" ? zipf_cuspmax(0.5, 1.0) : gauss_rand();
    for (auto b : bs) out.push_back({group, "b=" + std::to_string(b), dist, b_var(b)});
  } else if (group == "zipf-z") {
    for (double z : {0.5, 1.0, 1.5}) {
      out.push_back({group, "z=" + std::to_string(z).substr(0, 3), zipf_cuspmax(z, 1.0), {20000, 400, 200}});
    }
  } else {
    throw ConfigError("unknown bucket data set group '" + group + "'");
  }
  return out;
}

inline const std::vector<std::string>& bucket_dataset_groups() {
  static const std::vector<std::string> groups{"zipf-t", "zipf-b", "gauss-t", "gauss-b", "zipf-z"};
  return groups;
}

inline const std::vector<EstimatorKind>& bucket_experiment_methods() {
  static const std::vector<EstimatorKind> methods{EstimatorKind::USA,    EstimatorKind::OneBiased,
                                                  EstimatorKind::Split2, EstimatorKind::Split4,
                                                  EstimatorKind::Split8, EstimatorKind::Tree3LT,
                                                  EstimatorKind::Tree4LT};
  return methods;
}

struct InsideBucketConfig {
  std::uint64_t seed = 1;
  std::size_t samples = 100;
  std::vector<EstimatorKind> methods = bucket_experiment_methods();
  std::vector<BucketDataSet> datasets;
  unsigned threads = std::thread::hardware_concurrency();
};

struct InsideBucketRow {
  std::string group;
  std::string label;
  std::string distribution;
  PopulationSpec population;
  EstimatorKind method = EstimatorKind::CVA;
  double avg_rel = 0.0;   // mean over samples
  double norm_abs = 0.0;  // mean over samples
  std::size_t samples = 0;
};

// Data set k draws its samples from derive_seed(seed, k); sample s is generate_sample(.., s).
inline std::vector<InsideBucketRow> experiment_inside_bucket(const InsideBucketConfig& config) {
  std::vector<InsideBucketRow> rows;
  if (config.methods.empty() || config.samples == 0) return rows;
  for (std::size_t k = 0; k < config.datasets.size(); ++k) {
    const BucketDataSet& ds = config.datasets[k];
    const std::uint64_t ds_seed = derive_seed(config.seed, k);
    const std::size_t n_methods = config.methods.size();
    std::vector<ErrorReport> reports(config.samples * n_methods);
    parallel_for(
        config.samples,
        [&](std::size_t s) {
          const FrequencySet sample = generate_sample(ds.distribution, ds.population, ds_seed, s);
          for (std::size_t m = 0; m < n_methods; ++m) {
            reports[s * n_methods + m] = run_bucket_queryset(sample.frequencies(), config.methods[m]);
          }
        },
        config.threads);
    for (std::size_t m = 0; m < n_methods; ++m) {
      InsideBucketRow row{ds.group, ds.label, ds.distribution.name(), ds.population, config.methods[m], 0, 0,
                          config.samples};
      for (std::size_t s = 0; s < config.samples; ++s) {
        row.avg_rel += reports[s * n_methods + m].avg_rel;
        row.norm_abs += reports[s * n_methods + m].norm_abs.value_or(0.0);
      }
      row.avg_rel /= double(config.samples);
      row.norm_abs /= double(config.samples);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Whole-histogram experiment
// ---------------------------------------------------------------------------

struct HistogramMethod {
  BuildMethod builder = BuildMethod::MaxDiff;
  EstimatorKind estimator = EstimatorKind::CVA;

  // ES, MD_4LT, ...
  std::string label() const {
    std::string name(to_string(builder));
    if (estimator != EstimatorKind::CVA) name += "_" + std::string(to_string(estimator));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::toupper(ch); });
    return name;
  }
};

inline HistogramMethod parse_histogram_method(std::string label) {
  std::transform(label.begin(), label.end(), label.begin(), [](unsigned char ch) { return std::tolower(ch); });
  const auto underscore = label.find('_');
  HistogramMethod method;
  method.builder = parse_method(label.substr(0, underscore));
  method.estimator = underscore == std::string::npos ? EstimatorKind::CVA : parse_estimator(label.substr(underscore + 1));
  return method;
}

inline const std::vector<HistogramMethod>& table_methods() {
  static const std::vector<HistogramMethod> methods{
      {BuildMethod::EquiSplit, EstimatorKind::CVA}, {BuildMethod::EquiSplit, EstimatorKind::Tree4LT},
      {BuildMethod::MaxDiff, EstimatorKind::CVA},   {BuildMethod::MaxDiff, EstimatorKind::Tree4LT},
      {BuildMethod::VOptimal, EstimatorKind::CVA},  {BuildMethod::VOptimal, EstimatorKind::Tree4LT}};
  return methods;
}

// Mean avg_rel of each method over the frequency sets, all built under the same budget.
// A method whose budget cannot hold one bucket gets NaN.
inline std::vector<double> evaluate_histogram_methods(const std::vector<FrequencySet>& sets,
                                                      const std::vector<HistogramMethod>& methods,
                                                      std::uint64_t budget_bits,
                                                      unsigned threads = std::thread::hardware_concurrency()) {
  std::vector<double> errors(sets.size() * methods.size(), 0.0);
  parallel_for(
      sets.size() * methods.size(),
      [&](std::size_t job) {
        const FrequencySet& fs = sets[job / methods.size()];
        const HistogramMethod& method = methods[job % methods.size()];
        try {
          const Histogram hist = build_with_budget(fs, method.builder, method.estimator, budget_bits);
          errors[job] = run_histogram_queryset(fs, hist).avg_rel;
        } catch (const ConfigError&) {
          errors[job] = std::numeric_limits<double>::quiet_NaN();
        }
      },
      threads);
  std::vector<double> mean(methods.size(), 0.0);
  for (std::size_t job = 0; job < errors.size(); ++job) mean[job % methods.size()] += errors[job];
  for (double& x : mean) x /= double(sets.size());
  return mean;
}

struct NamedDistribution {
  std::string name;  // "D1"
  DataDistribution distribution;
};

struct NamedPopulation {
  std::string name;  // "P1"
  PopulationSpec population;
};

struct HistogramExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t histograms = 10;
  std::uint64_t budget_bits = 42 * 32;
  std::vector<NamedPopulation> populations;
  std::vector<NamedDistribution> distributions;
  std::vector<HistogramMethod> methods = table_methods();
  // Space sweep: budgets (bits) evaluated on one distribution/population pair.
  std::vector<std::uint64_t> sweep_budgets;
  NamedDistribution sweep_distribution{"D4", histogram_distribution(4)};
  NamedPopulation sweep_population{"P1", histogram_population(1)};
  unsigned threads = std::thread::hardware_concurrency();
};

// error[method][distribution] for one population, as fractions.
struct ErrorTable {
  std::string population;
  std::vector<std::string> methods;
  std::vector<std::string> distributions;
  std::vector<std::vector<double>> error;
};

struct SweepSeries {
  std::vector<std::uint64_t> budgets;
  std::vector<std::string> methods;
  std::vector<std::vector<double>> error;  // [method][budget]
};

struct HistogramExperimentResult {
  std::vector<ErrorTable> tables;
  SweepSeries sweep;
};

inline std::vector<FrequencySet> generate_histogram_dataset(const DataDistribution& dist, const PopulationSpec& pop,
                                                            std::uint64_t seed, std::size_t count) {
  std::vector<FrequencySet> sets(count);
  for (std::size_t s = 0; s < count; ++s) sets[s] = generate_sample(dist, pop, seed, s);
  return sets;
}

// Data set (population p, distribution d) uses seed derive_seed(seed, 1000 * p + d); the
// sweep uses derive_seed(seed, 999999).
inline HistogramExperimentResult experiment_histogram(const HistogramExperimentConfig& config) {
  HistogramExperimentResult result;
  std::vector<std::string> method_labels;
  for (const auto& m : config.methods) method_labels.push_back(m.label());

  for (std::size_t p = 0; p < config.populations.size(); ++p) {
    ErrorTable table;
    table.population = config.populations[p].name;
    table.methods = method_labels;
    table.error.assign(config.methods.size(), {});
    for (std::size_t d = 0; d < config.distributions.size(); ++d) {
      table.distributions.push_back(config.distributions[d].name);
      const auto sets = generate_histogram_dataset(config.distributions[d].distribution,
                                                   config.populations[p].population,
                                                   derive_seed(config.seed, 1000 * p + d), config.histograms);
      const auto errors = evaluate_histogram_methods(sets, config.methods, config.budget_bits, config.threads);
      for (std::size_t m = 0; m < errors.size(); ++m) table.error[m].push_back(errors[m]);
    }
    result.tables.push_back(std::move(table));
  }

  if (!config.sweep_budgets.empty() && !config.methods.empty()) {
    result.sweep.budgets = config.sweep_budgets;
    result.sweep.methods = method_labels;
    result.sweep.error.assign(config.methods.size(), {});
    const auto sets = generate_histogram_dataset(config.sweep_distribution.distribution,
                                                 config.sweep_population.population, derive_seed(config.seed, 999999),
                                                 config.histograms);
    for (std::uint64_t budget : config.sweep_budgets) {
      const auto errors = evaluate_histogram_methods(sets, config.methods, budget, config.threads);
      for (std::size_t m = 0; m < errors.size(); ++m) result.sweep.error[m].push_back(errors[m]);
    }
  }
  return result;
}

// Same table layout for frequency sets loaded from files (one column per input).
inline ErrorTable evaluate_inputs(const std::vector<std::string>& names, const std::vector<FrequencySet>& sets,
                                  const std::vector<HistogramMethod>& methods, std::uint64_t budget_bits,
                                  unsigned threads = std::thread::hardware_concurrency()) {
  ErrorTable table;
  table.population = "inputs";
  table.distributions = names;
  for (const auto& m : methods) table.methods.push_back(m.label());
  table.error.assign(methods.size(), {});
  for (const FrequencySet& fs : sets) {
    const auto errors = evaluate_histogram_methods({fs}, methods, budget_bits, threads);
    for (std::size_t m = 0; m < errors.size(); ++m) table.error[m].push_back(errors[m]);
  }
  return table;
}

}  // namespace hist4lt
