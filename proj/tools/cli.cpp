#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "hist4lt/hist4lt.hpp"
#include "hist4lt/io.hpp"

namespace hist4lt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  return in;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  auto in = open_input(path);
  try {
    json doc = json::parse(in);
    if (!doc.is_object()) throw ParseError(path + ": config must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

template <class T>
T config_value(const json& config, const char* key, T fallback) {
  if (!config.contains(key)) return fallback;
  try {
    return config.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

// --- gen -------------------------------------------------------------------

struct GenOptions {
  std::string distribution;
  std::string population;
  std::uint64_t seed = 1;
  std::size_t samples = 10;
  std::string out;
};

void cmd_gen(const GenOptions& o, std::ostream& out) {
  const DataDistribution dist = parse_distribution(o.distribution);
  const PopulationSpec pop = parse_population(o.population);
  pop.check();
  const fs::path dir(o.out);
  fs::create_directories(dir);
  json files = json::array();
  for (std::size_t s = 0; s < o.samples; ++s) {
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%03zu.csv", s);
    auto file = open_output(dir / name);
    write_frequency_csv(file, generate_sample(dist, pop, o.seed, s));
    files.push_back(name);
  }
  json manifest = {{"distribution", o.distribution},
                   {"population", o.population},
                   {"seed", o.seed},
                   {"samples", o.samples},
                   {"generator", dist.name()},
                   {"population_spec", population_to_json(pop)},
                   {"rng", "mt19937_64; sample s seeded with splitmix64(seed, s)"},
                   {"files", files}};
  open_output(dir / "manifest.json") << manifest.dump(2) << "\n";
  out << "wrote " << o.samples << " samples to " << dir.string() << "\n";
}

// --- build -----------------------------------------------------------------

struct BuildOptions {
  std::string input;
  std::string method = "md";
  std::string estimator = "cva";
  std::optional<std::uint64_t> budget_bits;
  std::optional<std::size_t> buckets;
  std::string out;
};

void cmd_build(const BuildOptions& o, std::ostream& out) {
  const BuildMethod method = parse_method(o.method);
  const EstimatorKind kind = parse_estimator(o.estimator);
  const FrequencySet fs = load_frequency_csv(o.input);
  const Histogram hist = o.buckets ? build_histogram(fs, method, kind, *o.buckets)
                                   : build_with_budget(fs, method, kind, o.budget_bits.value_or(42 * 32));
  if (auto problem = validate(hist, fs)) throw InvariantError("built histogram is invalid: " + *problem);
  const std::string text = histogram_to_json(hist).dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    open_output(o.out) << text;
  }
  out << "buckets=" << hist.bucket_count() << " storage_bits=" << hist.storage_bits << "\n";
}

// --- eval-bucket -----------------------------------------------------------

struct EvalBucketOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::vector<std::string> estimators;
  std::vector<std::string> groups;
  std::string out = "bucket-report";
  unsigned threads = std::thread::hardware_concurrency();
};

void cmd_eval_bucket(const EvalBucketOptions& o, std::ostream& out) {
  const json config = load_config(o.config);
  InsideBucketConfig run;
  run.threads = o.threads;
  run.seed = o.seed.value_or(config_value<std::uint64_t>(config, "seed", 1));
  run.samples = o.samples.value_or(config_value<std::size_t>(config, "samples", 100));

  auto estimators = o.estimators.empty() ? config_value<std::vector<std::string>>(config, "methods", {}) : o.estimators;
  if (!estimators.empty()) {
    run.methods.clear();
    for (const auto& name : estimators) run.methods.push_back(parse_estimator(name));
  }
  auto groups = o.groups.empty() ? config_value<std::vector<std::string>>(config, "groups", bucket_dataset_groups())
                                 : o.groups;
  for (const auto& g : groups) {
    for (auto& ds : bucket_datasets(g)) run.datasets.push_back(std::move(ds));
  }

  const auto rows = experiment_inside_bucket(run);
  const fs::path dir(o.out);
  open_output(dir / "inside_bucket.json") << inside_bucket_to_json(run, rows).dump(2) << "\n";
  for (const auto& g : groups) {
    write_inside_bucket_csv(open_output(dir / (g + "_avg_rel.csv")).seekp(0), rows, g, false);
    write_inside_bucket_csv(open_output(dir / (g + "_norm_abs.csv")).seekp(0), rows, g, true);
  }
  for (const auto& g : groups) {
    out << g << " (avg relative error, percent)\n";
    write_inside_bucket_csv(out, rows, g, false);
  }
}

// --- eval-hist -------------------------------------------------------------

struct EvalHistOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> budget_bits;
  std::vector<std::string> inputs;
  std::string out = "hist-report";
  unsigned threads = std::thread::hardware_concurrency();
};

std::vector<HistogramMethod> methods_from(const json& config) {
  std::vector<HistogramMethod> methods;
  for (const auto& label : config_value<std::vector<std::string>>(config, "methods", {})) {
    methods.push_back(parse_histogram_method(label));
  }
  return methods.empty() ? table_methods() : methods;
}

void cmd_eval_hist(const EvalHistOptions& o, std::ostream& out) {
  const json config = load_config(o.config);
  const fs::path dir(o.out);
  const auto budget = o.budget_bits.value_or(config_value<std::uint64_t>(config, "budget_bits", 42 * 32));
  const auto methods = methods_from(config);

  auto inputs = o.inputs.empty() ? config_value<std::vector<std::string>>(config, "inputs", {}) : o.inputs;
  if (!inputs.empty()) {
    std::vector<std::string> names;
    std::vector<FrequencySet> sets;
    for (const auto& path : inputs) {
      names.push_back(fs::path(path).stem().string());
      sets.push_back(load_frequency_csv(path));
    }
    const ErrorTable table = evaluate_inputs(names, sets, methods, budget, o.threads);
    json doc = {{"experiment", "histogram-inputs"}, {"budget_bits", budget}, {"inputs", inputs}, {"table", table_to_json(table)}};
    open_output(dir / "inputs.json") << doc.dump(2) << "\n";
    write_table_csv(open_output(dir / "inputs.csv").seekp(0), table);
    write_table_csv(out, table);
    return;
  }

  HistogramExperimentConfig run;
  run.threads = o.threads;
  run.seed = o.seed.value_or(config_value<std::uint64_t>(config, "seed", 1));
  run.histograms = o.samples.value_or(config_value<std::size_t>(config, "histograms", 10));
  run.budget_bits = budget;
  run.methods = methods;
  for (const auto& name : config_value<std::vector<std::string>>(config, "populations", {"P1", "P2", "P3"})) {
    run.populations.push_back({name, parse_population(name)});
  }
  for (const auto& name : config_value<std::vector<std::string>>(config, "distributions", {"D1", "D2", "D3", "D4", "D5"})) {
    run.distributions.push_back({name, parse_distribution(name)});
  }
  run.sweep_budgets = config_value<std::vector<std::uint64_t>>(config, "sweep_budgets", {});
  if (config.contains("sweep_distribution")) {
    const auto name = config_value<std::string>(config, "sweep_distribution", "D4");
    run.sweep_distribution = {name, parse_distribution(name)};
  }
  if (config.contains("sweep_population")) {
    const auto name = config_value<std::string>(config, "sweep_population", "P1");
    run.sweep_population = {name, parse_population(name)};
  }

  const auto result = experiment_histogram(run);
  open_output(dir / "histogram.json") << histogram_experiment_to_json(run, result).dump(2) << "\n";
  for (const auto& table : result.tables) {
    write_table_csv(open_output(dir / ("table_" + table.population + ".csv")).seekp(0), table);
    out << table.population << " (avg relative error, percent)\n";
    write_table_csv(out, table);
  }
  if (!result.sweep.budgets.empty()) {
    write_sweep_csv(open_output(dir / "sweep.csv").seekp(0), result.sweep);
  }
}

// --- ingest ----------------------------------------------------------------

struct IngestCliOptions {
  std::string input;
  std::string out;
  std::string mapping;
  IngestOptions ingest;
};

void cmd_ingest(const IngestCliOptions& o, std::ostream& out) {
  auto in = open_input(o.input);
  const IngestResult result = ingest_values(in, o.ingest);
  write_frequency_csv(open_output(o.out).seekp(0), result.frequencies);
  const std::string mapping = o.mapping.empty() ? o.out + ".map.csv" : o.mapping;
  write_mapping_csv(open_output(mapping).seekp(0), result);
  out << "domain=" << result.frequencies.size() << " distinct=" << result.mapping.size()
      << " total=" << result.frequencies.total() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bucket histograms with 4-level-tree indices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hist4lt 1.0");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate synthetic frequency sets");
  gen_cmd->add_option("--distribution,-d", gen.distribution, "D1..D5, gauss-rand, zipf-cuspmax(z,z), zipf-zrand(z,z)")
      ->required();
  gen_cmd->add_option("--population,-p", gen.population, "P1..P3 or p(T,D,t)")->required();
  gen_cmd->add_option("--seed", gen.seed, "master seed");
  gen_cmd->add_option("--samples", gen.samples, "number of frequency sets")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out,-o", gen.out, "output directory")->required();

  BuildOptions build;
  auto* build_cmd = app.add_subcommand("build", "build a histogram from a frequency CSV");
  build_cmd->add_option("--input,-i", build.input, "index,frequency CSV")->required();
  build_cmd->add_option("--method", build.method, "es, md or vo")
      ->check(CLI::IsMember({"es", "md", "vo"}, CLI::ignore_case));
  build_cmd->add_option("--estimator", build.estimator, "cva, usa, 1b, 2s, 4s, 8s, 3lt or 4lt")
      ->check(CLI::IsMember({"cva", "usa", "1b", "2s", "4s", "8s", "3lt", "4lt"}, CLI::ignore_case));
  auto* budget_opt = build_cmd->add_option("--budget-bits", build.budget_bits, "storage budget in bits (default 1344)");
  auto* buckets_opt = build_cmd->add_option("--buckets", build.buckets, "bucket count")->check(CLI::PositiveNumber);
  budget_opt->excludes(buckets_opt);
  build_cmd->add_option("--out,-o", build.out, "histogram JSON (stdout when omitted)");

  EvalBucketOptions eval_bucket;
  auto* eb_cmd = app.add_subcommand("eval-bucket", "error of the estimators inside single buckets");
  eb_cmd->add_option("--config,-c", eval_bucket.config, "JSON config {seed, samples, methods, groups}");
  eb_cmd->add_option("--seed", eval_bucket.seed, "master seed");
  eb_cmd->add_option("--samples", eval_bucket.samples, "permutation samples per data set")->check(CLI::PositiveNumber);
  eb_cmd->add_option("--estimator", eval_bucket.estimators, "estimators to compare (repeatable)");
  eb_cmd->add_option("--group", eval_bucket.groups, "zipf-t, zipf-b, gauss-t, gauss-b, zipf-z (repeatable)");
  eb_cmd->add_option("--threads", eval_bucket.threads, "worker threads")->check(CLI::PositiveNumber);
  eb_cmd->add_option("--out,-o", eval_bucket.out, "report directory");

  EvalHistOptions eval_hist;
  auto* eh_cmd = app.add_subcommand("eval-hist", "error of whole histograms under a storage budget");
  eh_cmd->add_option("--config,-c", eval_hist.config,
                     "JSON config {seed, histograms, budget_bits, populations, distributions, methods, sweep_budgets, inputs}");
  eh_cmd->add_option("--seed", eval_hist.seed, "master seed");
  eh_cmd->add_option("--samples", eval_hist.samples, "histograms per data set")->check(CLI::PositiveNumber);
  eh_cmd->add_option("--budget-bits", eval_hist.budget_bits, "storage budget in bits");
  eh_cmd->add_option("--input,-i", eval_hist.inputs, "frequency CSVs to evaluate instead of synthetic data");
  eh_cmd->add_option("--threads", eval_hist.threads, "worker threads")->check(CLI::PositiveNumber);
  eh_cmd->add_option("--out,-o", eval_hist.out, "report directory");

  IngestCliOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "count raw integer values into a frequency CSV");
  ingest_cmd->add_option("--input,-i", ingest.input, "file with one value per line (or CSV)")->required();
  ingest_cmd->add_option("--out,-o", ingest.out, "index,frequency CSV")->required();
  ingest_cmd->add_option("--mapping", ingest.mapping, "index,value sidecar (default <out>.map.csv)");
  ingest_cmd->add_option("--column", ingest.ingest.column, "0-based CSV column of the value");
  ingest_cmd->add_flag("--header", ingest.ingest.skip_header, "skip the first line");
  ingest_cmd->add_flag("--dense", ingest.ingest.dense, "index distinct values 1..k instead of min..max");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) cmd_gen(gen, out);
    if (*build_cmd) cmd_build(build, out);
    if (*eb_cmd) cmd_eval_bucket(eval_bucket, out);
    if (*eh_cmd) cmd_eval_hist(eval_hist, out);
    if (*ingest_cmd) cmd_ingest(ingest, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvariantError& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kInvariant;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kIo;
  } catch (const std::ios_base::failure& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  }
  return kOk;
}

}  // namespace hist4lt::cli
