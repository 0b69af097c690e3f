#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hist4lt/core.hpp"
#include "hist4lt/experiments.hpp"

namespace hist4lt {

// ---------------------------------------------------------------------------
// FrequencySet CSV
//
//   # m=<domain size>
//   index,frequency
//   <index>,<frequency>        one line per non-null value
// ---------------------------------------------------------------------------

inline void write_frequency_csv(std::ostream& out, const FrequencySet& fs) {
  out << "# m=" << fs.size() << "\n";
  out << "index,frequency\n";
  for (std::size_t i = 1; i <= fs.size(); ++i) {
    if (fs.freq(i) > 0) out << i << "," << fs.freq(i) << "\n";
  }
}

namespace detail {

inline std::uint64_t parse_unsigned(const std::string& text, std::size_t line, const std::string& what) {
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    if (text.empty() || text[0] == '-' || text[0] == '+') throw std::invalid_argument(text);
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ParseError("line " + std::to_string(line) + ": " + what + " '" + text + "' is not a non-negative integer");
  }
  return value;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

}  // namespace detail

// domain_size = 0 takes the size from the "# m=" line, or the largest index when absent.
inline FrequencySet read_frequency_csv(std::istream& in, std::size_t domain_size = 0) {
  std::map<std::uint64_t, Count> entries;
  std::size_t declared = 0;
  std::string raw;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    const std::string text = detail::trim(raw);
    if (text.empty()) continue;
    if (text[0] == '#') {
      if (text.rfind("# m=", 0) == 0) declared = detail::parse_unsigned(text.substr(4), line, "domain size");
      continue;
    }
    if (text == "index,frequency") continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ParseError("line " + std::to_string(line) + ": expected index,frequency");
    const auto index = detail::parse_unsigned(detail::trim(text.substr(0, comma)), line, "index");
    const auto freq = detail::parse_unsigned(detail::trim(text.substr(comma + 1)), line, "frequency");
    if (index == 0) throw ParseError("line " + std::to_string(line) + ": indices start at 1");
    if (!entries.emplace(index, freq).second) {
      throw ParseError("line " + std::to_string(line) + ": duplicate index " + std::to_string(index));
    }
  }
  std::size_t m = domain_size != 0 ? domain_size : declared;
  if (m == 0) m = entries.empty() ? 0 : entries.rbegin()->first;
  if (m == 0) throw ParseError("frequency file has no entries and no domain size");
  if (!entries.empty() && entries.rbegin()->first > m) {
    throw ParseError("index " + std::to_string(entries.rbegin()->first) + " exceeds domain size " + std::to_string(m));
  }
  std::vector<Count> freq(m, 0);
  for (auto [index, f] : entries) freq[index - 1] = f;
  return FrequencySet(std::move(freq));
}

inline FrequencySet load_frequency_csv(const std::string& path, std::size_t domain_size = 0) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  return read_frequency_csv(in, domain_size);
}

// ---------------------------------------------------------------------------
// Ingestion of raw attribute values
// ---------------------------------------------------------------------------

struct IngestOptions {
  bool dense = false;        // index the sorted distinct values 1..k instead of min..max
  std::size_t column = 0;    // 0-based CSV column holding the value
  bool skip_header = false;  // ignore the first non-empty line
};

struct IngestResult {
  FrequencySet frequencies;
  std::vector<std::pair<std::size_t, std::int64_t>> mapping;  // (index, value) of every non-null index
};

inline IngestResult ingest_values(std::istream& in, const IngestOptions& options = {}) {
  std::map<std::int64_t, Count> counts;
  std::string raw;
  bool header_pending = options.skip_header;
  for (std::size_t line = 1; std::getline(in, raw); ++line) {
    const std::string text = detail::trim(raw);
    if (text.empty() || text[0] == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::stringstream fields(text);
    std::string field;
    for (std::size_t c = 0; c <= options.column; ++c) {
      if (!std::getline(fields, field, ',')) {
        throw ParseError("line " + std::to_string(line) + ": missing column " + std::to_string(options.column));
      }
    }
    field = detail::trim(field);
    std::int64_t value = 0;
    std::size_t used = 0;
    try {
      value = std::stoll(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size()) {
      throw ParseError("line " + std::to_string(line) + ": '" + field + "' is not an integer value");
    }
    ++counts[value];
  }
  if (counts.empty()) throw ParseError("no values to ingest");

  IngestResult result;
  std::vector<Count> freq;
  if (options.dense) {
    for (auto [value, count] : counts) {
      freq.push_back(count);
      result.mapping.emplace_back(freq.size(), value);
    }
  } else {
    const std::int64_t lo = counts.begin()->first;
    const auto width = static_cast<unsigned __int128>(counts.rbegin()->first - static_cast<__int128>(lo)) + 1;
    if (width > (1u << 28)) throw ConfigError("value range too wide for a dense domain; use dense re-indexing");
    freq.assign(static_cast<std::size_t>(width), 0);
    for (auto [value, count] : counts) {
      const auto index = static_cast<std::size_t>(value - lo) + 1;
      freq[index - 1] = count;
      result.mapping.emplace_back(index, value);
    }
  }
  result.frequencies = FrequencySet(std::move(freq));
  return result;
}

inline void write_mapping_csv(std::ostream& out, const IngestResult& result) {
  out << "index,value\n";
  for (auto [index, value] : result.mapping) out << index << "," << value << "\n";
}

// ---------------------------------------------------------------------------
// Histogram JSON
//
//   {"estimator": "4lt", "method": "md", "storage_bits": 1344,
//    "buckets": [{"inf": 1, "sup": 7, "t": 3, "c": 120, "payload_hex": "84d2b67c"}, ...]}
//
// payload_hex is big-endian: 8 digits for 3LT/4LT words, 4s (four 8-bit codes) and 8s
// (eight 4-bit codes, first code in the top nibble); 16 digits for the 2s half sum;
// empty for CVA/USA/1b.
// ---------------------------------------------------------------------------

inline std::string payload_hex(const Payload& payload) {
  char buf[17] = {};
  if (const auto* p = std::get_if<Split2Payload>(&payload)) {
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(p->first_half));
  } else if (const auto* p4 = std::get_if<Split4Payload>(&payload)) {
    std::uint32_t word = 0;
    for (auto code : p4->codes) word = (word << 8) | code;
    std::snprintf(buf, sizeof(buf), "%08x", word);
  } else if (const auto* p8 = std::get_if<Split8Payload>(&payload)) {
    std::uint32_t word = 0;
    for (auto code : p8->codes) word = (word << 4) | (code & 0xF);
    std::snprintf(buf, sizeof(buf), "%08x", word);
  } else if (const auto* t3 = std::get_if<Tree3Payload>(&payload)) {
    return t3->index.to_hex();
  } else if (const auto* t4 = std::get_if<Tree4Payload>(&payload)) {
    return t4->index.to_hex();
  }
  return buf;
}

inline Payload parse_payload_hex(EstimatorKind kind, const std::string& hex) {
  auto parse_word = [&](std::size_t digits) -> std::uint64_t {
    if (hex.size() != digits) {
      throw ParseError("payload for " + std::string(to_string(kind)) + " needs " + std::to_string(digits) +
                       " hex digits, got '" + hex + "'");
    }
    std::uint64_t word = 0;
    for (char ch : hex) {
      const int v = std::isdigit(static_cast<unsigned char>(ch)) ? ch - '0'
                    : (ch >= 'a' && ch <= 'f')                   ? ch - 'a' + 10
                    : (ch >= 'A' && ch <= 'F')                   ? ch - 'A' + 10
                                                                 : -1;
      if (v < 0) throw ParseError("invalid hex payload '" + hex + "'");
      word = (word << 4) | static_cast<std::uint64_t>(v);
    }
    return word;
  };
  switch (kind) {
    case EstimatorKind::CVA:
    case EstimatorKind::USA:
    case EstimatorKind::OneBiased:
      if (!hex.empty()) throw ParseError("estimator " + std::string(to_string(kind)) + " carries no payload");
      return std::monostate{};
    case EstimatorKind::Split2: return Split2Payload{parse_word(16)};
    case EstimatorKind::Split4: {
      const auto word = parse_word(8);
      Split4Payload p;
      for (std::size_t k = 0; k < 4; ++k) p.codes[k] = static_cast<std::uint8_t>(word >> (24 - 8 * k));
      return p;
    }
    case EstimatorKind::Split8: {
      const auto word = parse_word(8);
      Split8Payload p;
      for (std::size_t k = 0; k < 8; ++k) p.codes[k] = static_cast<std::uint8_t>((word >> (28 - 4 * k)) & 0xF);
      return p;
    }
    case EstimatorKind::Tree3LT: {
      Tree3Payload p{PackedTreeIndex{static_cast<std::uint32_t>(parse_word(8))}};
      (void)p.index.fields_3lt();  // rejects a set spare bit
      return p;
    }
    case EstimatorKind::Tree4LT: return Tree4Payload{PackedTreeIndex{static_cast<std::uint32_t>(parse_word(8))}};
  }
  throw ParseError("unknown estimator");
}

inline nlohmann::json histogram_to_json(const Histogram& hist) {
  nlohmann::json buckets = nlohmann::json::array();
  for (const Bucket& b : hist.buckets) {
    buckets.push_back({{"inf", b.inf}, {"sup", b.sup}, {"t", b.t}, {"c", b.c}, {"payload_hex", payload_hex(b.payload)}});
  }
  return {{"estimator", std::string(to_string(hist.estimator))},
          {"method", std::string(to_string(hist.method))},
          {"storage_bits", hist.storage_bits},
          {"buckets", buckets}};
}

inline Histogram histogram_from_json(const nlohmann::json& doc) {
  try {
    Histogram hist;
    hist.estimator = parse_estimator(doc.at("estimator").get<std::string>());
    if (doc.contains("method")) hist.method = parse_method(doc.at("method").get<std::string>());
    hist.storage_bits = doc.value("storage_bits", std::uint64_t{0});
    for (const auto& b : doc.at("buckets")) {
      Bucket bucket;
      bucket.inf = b.at("inf").get<std::size_t>();
      bucket.sup = b.at("sup").get<std::size_t>();
      bucket.t = b.at("t").get<std::size_t>();
      bucket.c = b.at("c").get<Count>();
      bucket.payload = parse_payload_hex(hist.estimator, b.value("payload_hex", std::string{}));
      if (bucket.inf < 1 || bucket.inf > bucket.sup) throw ParseError("bucket bounds out of order");
      hist.buckets.push_back(std::move(bucket));
    }
    return hist;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("histogram JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline std::string percent(double fraction) {
  if (std::isnan(fraction)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

// method/distribution table in percent, methods as rows.
inline void write_table_csv(std::ostream& out, const ErrorTable& table) {
  out << "method";
  for (const auto& d : table.distributions) out << "," << d;
  out << "\n";
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    out << table.methods[m];
    for (double e : table.error[m]) out << "," << percent(e);
    out << "\n";
  }
}

inline void write_sweep_csv(std::ostream& out, const SweepSeries& sweep) {
  out << "method";
  for (auto budget : sweep.budgets) out << "," << budget / 32;  // four-byte numbers
  out << "\n";
  for (std::size_t m = 0; m < sweep.methods.size(); ++m) {
    out << sweep.methods[m];
    for (double e : sweep.error[m]) out << "," << percent(e);
    out << "\n";
  }
}

// One table per data set group: rows = methods, columns = data sets, avg_rel in percent.
inline void write_inside_bucket_csv(std::ostream& out, const std::vector<InsideBucketRow>& rows,
                                    const std::string& group, bool norm_abs = false) {
  std::vector<std::string> labels;
  std::vector<std::string> methods;
  std::map<std::pair<std::string, std::string>, double> value;
  for (const auto& r : rows) {
    if (r.group != group) continue;
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
    const std::string method(to_string(r.method));
    if (std::find(methods.begin(), methods.end(), method) == methods.end()) methods.push_back(method);
    value[{method, r.label}] = norm_abs ? r.norm_abs : r.avg_rel;
  }
  out << "method";
  for (const auto& l : labels) out << "," << l;
  out << "\n";
  for (const auto& m : methods) {
    out << m;
    for (const auto& l : labels) out << "," << percent(value[{m, l}]);
    out << "\n";
  }
}

inline nlohmann::json population_to_json(const PopulationSpec& pop) {
  return {{"total", pop.total}, {"domain", pop.domain}, {"t", pop.t}};
}

inline nlohmann::json inside_bucket_to_json(const InsideBucketConfig& config, const std::vector<InsideBucketRow>& rows) {
  nlohmann::json methods = nlohmann::json::array();
  for (auto m : config.methods) methods.push_back(std::string(to_string(m)));
  nlohmann::json out_rows = nlohmann::json::array();
  for (const auto& r : rows) {
    out_rows.push_back({{"group", r.group},
                        {"dataset", r.label},
                        {"distribution", r.distribution},
                        {"population", population_to_json(r.population)},
                        {"method", std::string(to_string(r.method))},
                        {"avg_rel_percent", r.avg_rel * 100.0},
                        {"norm_abs_percent", r.norm_abs * 100.0},
                        {"samples", r.samples}});
  }
  return {{"experiment", "inside-bucket"},
          {"config", {{"seed", config.seed}, {"samples", config.samples}, {"methods", methods}}},
          {"rng", "mt19937_64, streams split by splitmix64"},
          {"rows", out_rows}};
}

inline nlohmann::json table_to_json(const ErrorTable& table) {
  nlohmann::json rows = nlohmann::json::object();
  for (std::size_t m = 0; m < table.methods.size(); ++m) {
    nlohmann::json row = nlohmann::json::object();
    for (std::size_t d = 0; d < table.distributions.size(); ++d) {
      const double e = table.error[m][d];
      row[table.distributions[d]] = std::isnan(e) ? nlohmann::json(nullptr) : nlohmann::json(e * 100.0);
    }
    rows[table.methods[m]] = row;
  }
  return {{"population", table.population}, {"percent", rows}};
}

inline nlohmann::json histogram_experiment_to_json(const HistogramExperimentConfig& config,
                                                   const HistogramExperimentResult& result) {
  nlohmann::json pops = nlohmann::json::array();
  for (const auto& p : config.populations) pops.push_back({{"name", p.name}, {"spec", population_to_json(p.population)}});
  nlohmann::json dists = nlohmann::json::array();
  for (const auto& d : config.distributions) dists.push_back({{"name", d.name}, {"distribution", d.distribution.name()}});
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : config.methods) methods.push_back(m.label());
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : result.tables) tables.push_back(table_to_json(t));
  nlohmann::json doc = {{"experiment", "histogram"},
                        {"config",
                         {{"seed", config.seed},
                          {"histograms", config.histograms},
                          {"budget_bits", config.budget_bits},
                          {"populations", pops},
                          {"distributions", dists},
                          {"methods", methods}}},
                        {"rng", "mt19937_64, streams split by splitmix64"},
                        {"tables", tables}};
  if (!result.sweep.budgets.empty()) {
    nlohmann::json series = nlohmann::json::object();
    for (std::size_t m = 0; m < result.sweep.methods.size(); ++m) {
      nlohmann::json values = nlohmann::json::array();
      for (double e : result.sweep.error[m]) values.push_back(std::isnan(e) ? nlohmann::json(nullptr) : nlohmann::json(e * 100.0));
      series[result.sweep.methods[m]] = values;
    }
    doc["sweep"] = {{"budget_bits", result.sweep.budgets},
                    {"distribution", config.sweep_distribution.name},
                    {"population", config.sweep_population.name},
                    {"percent", series}};
  }
  return doc;
}

}  // namespace hist4lt
