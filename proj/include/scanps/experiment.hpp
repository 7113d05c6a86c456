#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "scanps/hetnet.hpp"
#include "scanps/methods.hpp"
#include "scanps/synthgen.hpp"

namespace scanps {

// Full description of an experiment: where the data comes from (a directory
// of generated files, or generator parameters), the method/ratio/seed grid,
// and the shared knobs.
struct ExperimentSpec {
  std::optional<std::string> data_dir;
  GeneratorParams gen;
  double new_fraction = 0.2;
  std::vector<MethodId> methods{kAllMethods, kAllMethods + std::size(kAllMethods)};
  std::vector<double> ratios{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double theta = 0.1;
  double rho = 0.5;
  std::size_t folds = 5;
  std::size_t jobs = 0;  // 0 = hardware concurrency
  std::string out_dir = "results";
  std::optional<std::string> sampling_dump_dir;
};

namespace detail {

template <typename T>
std::vector<T> parse_list(const std::string& value, T (*convert)(const std::string&)) {
  std::vector<T> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(convert(item));
  }
  if (out.empty()) throw std::invalid_argument("empty list value '" + value + "'");
  return out;
}

inline double to_double(const std::string& s) { return std::stod(s); }
inline std::uint64_t to_u64(const std::string& s) { return std::stoull(s); }

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string format_metric(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

inline std::string format_ratio(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

}  // namespace detail

// Applies one `key = value` setting. Shared by config files and CLI flags so
// flags can override file values with identical semantics.
inline void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  if (key == "data_dir") spec.data_dir = value;
  else if (key == "out") spec.out_dir = value;
  else if (key == "methods")
    spec.methods = detail::parse_list<MethodId>(value, [](const std::string& s) {
      return method_from_name(s);
    });
  else if (key == "ratios") spec.ratios = detail::parse_list<double>(value, detail::to_double);
  else if (key == "seeds") spec.seeds = detail::parse_list<std::uint64_t>(value, detail::to_u64);
  else if (key == "theta") spec.theta = std::stod(value);
  else if (key == "rho") spec.rho = std::stod(value);
  else if (key == "folds") spec.folds = std::stoull(value);
  else if (key == "jobs") spec.jobs = std::stoull(value);
  else if (key == "new_fraction") spec.new_fraction = std::stod(value);
  else if (key == "sampling_dump_dir") spec.sampling_dump_dir = value;
  else if (key == "n_users") spec.gen.n_users = std::stoull(value);
  else if (key == "attach_m") spec.gen.attach_m = std::stoull(value);
  else if (key == "p_overlap") spec.gen.p_overlap = std::stod(value);
  else if (key == "p_extra") spec.gen.p_extra = std::stod(value);
  else if (key == "anchor_coverage") spec.gen.anchor_coverage = std::stod(value);
  else if (key == "aux_intensity") spec.gen.aux_intensity = std::stod(value);
  else if (key == "vocab_size") spec.gen.vocab_size = std::stoull(value);
  else if (key == "n_locations") spec.gen.n_locations = std::stoull(value);
  else if (key == "seed") spec.gen.seed = std::stoull(value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

inline void load_config(ExperimentSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(path, lineno, "expected 'key = value'");
    std::string key = detail::trim(t.substr(0, eq));
    std::string value = detail::trim(t.substr(eq + 1));
    try {
      apply_setting(spec, key, value);
    } catch (const std::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Generated-data directory layout
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& generated_file_names() {
  static const std::vector<std::string> names = {
      "target_users.txt",       "target_links.txt",       "target_events_loc.txt",
      "target_events_time.txt", "target_events_word.txt", "source_users.txt",
      "source_links.txt",       "source_events_loc.txt",  "source_events_time.txt",
      "source_events_word.txt",
  };
  return names;
}

// Writes the ten per-network files, the anchors file, and a manifest echoing
// the parameters. Identical parameters produce byte-identical files.
inline void write_generated(const AlignedPair& pair, const GeneratorParams& params,
                            const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto at = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };
  save_users(pair.target(), at("target_users.txt"));
  save_links(pair.target(), at("target_links.txt"));
  save_events(pair.target(), at("target_events_loc.txt"), {EventKind::Location});
  save_events(pair.target(), at("target_events_time.txt"), {EventKind::Time});
  save_events(pair.target(), at("target_events_word.txt"), {EventKind::Word});
  save_users(pair.source(), at("source_users.txt"));
  save_links(pair.source(), at("source_links.txt"));
  save_events(pair.source(), at("source_events_loc.txt"), {EventKind::Location});
  save_events(pair.source(), at("source_events_time.txt"), {EventKind::Time});
  save_events(pair.source(), at("source_events_word.txt"), {EventKind::Word});
  save_anchors(pair, at("anchors.txt"));

  std::ofstream manifest(at("manifest.txt"));
  if (!manifest) throw std::runtime_error("cannot write manifest in " + out_dir);
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%g", x);
    return std::string(buf);
  };
  manifest << "n_users = " << params.n_users << "\n"
           << "attach_m = " << params.attach_m << "\n"
           << "p_overlap = " << num(params.p_overlap) << "\n"
           << "p_extra = " << num(params.p_extra) << "\n"
           << "anchor_coverage = " << num(params.anchor_coverage) << "\n"
           << "aux_intensity = " << num(params.aux_intensity) << "\n"
           << "vocab_size = " << params.vocab_size << "\n"
           << "n_locations = " << params.n_locations << "\n"
           << "seed = " << params.seed << "\n"
           << "anchors = anchors.txt\n"
           << "files =";
  for (const auto& name : generated_file_names()) manifest << " " << name;
  manifest << "\n";
}

inline AlignedPair load_pair_from_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  auto at = [&](const std::string& name) { return (fs::path(dir) / name).string(); };
  std::vector<std::string> target_events = {at("target_events_loc.txt"), at("target_events_time.txt"),
                                            at("target_events_word.txt")};
  std::vector<std::string> source_events = {at("source_events_loc.txt"), at("source_events_time.txt"),
                                            at("source_events_word.txt")};
  HeterogeneousNetwork target =
      load_network(at("target_users.txt"), at("target_links.txt"), target_events);
  HeterogeneousNetwork source =
      load_network(at("source_users.txt"), at("source_links.txt"), source_events);
  return build_aligned_pair(std::move(target), std::move(source), at("anchors.txt"));
}

inline AlignedPair load_or_generate(const ExperimentSpec& spec) {
  if (spec.data_dir) return load_pair_from_dir(*spec.data_dir);
  return generate(spec.gen);
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

struct ResultRow {
  MethodId method;
  double ratio = 0.0;
  std::uint64_t seed = 0;
  std::size_t fold = 0;
  std::optional<double> auc;
  std::optional<double> accuracy;
};

struct SweepOutcome {
  std::vector<ResultRow> rows;
  std::vector<std::string> failures;  // one message per failed cell
};

// Runs every (method, ratio, seed) cell with k-fold cross validation on a
// bounded worker pool. Cell order, and therefore output order, is the sorted
// grid order no matter how the workers are scheduled.
inline SweepOutcome run_sweep(const ExperimentSpec& spec, const AlignedPair& pair) {
  struct Cell {
    MethodId method;
    double ratio;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (MethodId m : spec.methods)
    for (double r : spec.ratios)
      for (std::uint64_t s : spec.seeds) cells.push_back({m, r, s});
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.method != b.method) return static_cast<int>(a.method) < static_cast<int>(b.method);
    if (a.ratio != b.ratio) return a.ratio < b.ratio;
    return a.seed < b.seed;
  });
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](const Cell& a, const Cell& b) {
                            return a.method == b.method && a.ratio == b.ratio && a.seed == b.seed;
                          }),
              cells.end());

  if (spec.sampling_dump_dir) std::filesystem::create_directories(*spec.sampling_dump_dir);

  struct CellOutput {
    std::vector<ResultRow> rows;
    std::string failure;
  };
  std::vector<CellOutput> outputs(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      try {
        UserPartition partition = partition_users(pair.target(), spec.new_fraction, cell.seed);
        MethodConfig config;
        config.method = cell.method;
        config.theta = spec.theta;
        config.rho = spec.rho;
        config.ratio = cell.ratio;
        config.seed = cell.seed;
        config.folds = spec.folds;
        if (spec.sampling_dump_dir && has_personalized_sampling(cell.method)) {
          config.sampling_dump_path =
              (std::filesystem::path(*spec.sampling_dump_dir) /
               ("sampling_" + method_name(cell.method) + "_r" + detail::format_ratio(cell.ratio) +
                "_s" + std::to_string(cell.seed) + ".csv"))
                  .string();
        }
        auto fold_results = run_method(pair, partition, config);
        for (std::size_t f = 0; f < fold_results.size(); ++f) {
          outputs[i].rows.push_back(ResultRow{cell.method, cell.ratio, cell.seed, f,
                                              fold_results[f].auc, fold_results[f].accuracy});
        }
      } catch (const std::exception& e) {
        outputs[i].failure = "cell " + method_name(cell.method) + " ratio " +
                             detail::format_ratio(cell.ratio) + " seed " +
                             std::to_string(cell.seed) + ": " + e.what();
      }
    }
  };

  std::size_t n_threads = spec.jobs > 0 ? spec.jobs : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepOutcome outcome;
  for (auto& out : outputs) {
    if (!out.failure.empty()) outcome.failures.push_back(out.failure);
    for (auto& row : out.rows) outcome.rows.push_back(std::move(row));
  }
  return outcome;
}

inline void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "method,ratio,seed,fold,auc,accuracy\n";
  for (const auto& row : rows) {
    out << method_name(row.method) << "," << detail::format_ratio(row.ratio) << "," << row.seed
        << "," << row.fold << ",";
    if (row.auc) out << detail::format_metric(*row.auc);
    out << ",";
    if (row.accuracy) out << detail::format_metric(*row.accuracy);
    out << "\n";
  }
}

inline std::vector<ResultRow> load_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (detail::trim(line) != "method,ratio,seed,fold,auc,accuracy")
        throw ParseError(path, lineno, "unexpected header");
      continue;
    }
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    while (fields.size() < 6) fields.emplace_back();  // trailing empties
    if (fields.size() != 6) throw ParseError(path, lineno, "expected 6 fields");
    try {
      ResultRow row;
      row.method = method_from_name(fields[0]);
      row.ratio = std::stod(fields[1]);
      row.seed = std::stoull(fields[2]);
      row.fold = std::stoull(fields[3]);
      if (!fields[4].empty()) row.auc = std::stod(fields[4]);
      if (!fields[5].empty()) row.accuracy = std::stod(fields[5]);
      rows.push_back(row);
    } catch (const std::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Aggregation and report rendering
// ---------------------------------------------------------------------------

struct MetricAggregate {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;       // population std over all (seed, fold) values
  double seed_stddev = 0.0;  // population std over per-seed means
};

struct AggregateRow {
  MethodId method;
  double ratio = 0.0;
  std::optional<MetricAggregate> auc;
  std::optional<MetricAggregate> accuracy;
};

namespace detail {

inline std::optional<MetricAggregate> aggregate_metric(
    const std::vector<std::pair<std::uint64_t, double>>& values) {
  if (values.empty()) return std::nullopt;
  MetricAggregate agg;
  agg.n = values.size();
  for (const auto& [seed, v] : values) agg.mean += v;
  agg.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (const auto& [seed, v] : values) var += (v - agg.mean) * (v - agg.mean);
  agg.stddev = std::sqrt(var / static_cast<double>(values.size()));
  std::map<std::uint64_t, std::pair<double, std::size_t>> by_seed;
  for (const auto& [seed, v] : values) {
    by_seed[seed].first += v;
    by_seed[seed].second += 1;
  }
  double seed_var = 0.0;
  for (auto& [seed, acc] : by_seed) {
    double seed_mean = acc.first / static_cast<double>(acc.second);
    seed_var += (seed_mean - agg.mean) * (seed_mean - agg.mean);
  }
  agg.seed_stddev = std::sqrt(seed_var / static_cast<double>(by_seed.size()));
  return agg;
}

}  // namespace detail

inline std::vector<AggregateRow> aggregate_results(const std::vector<ResultRow>& rows) {
  std::map<std::pair<int, double>, std::pair<std::vector<std::pair<std::uint64_t, double>>,
                                             std::vector<std::pair<std::uint64_t, double>>>>
      groups;
  for (const auto& row : rows) {
    auto& group = groups[{static_cast<int>(row.method), row.ratio}];
    if (row.auc) group.first.emplace_back(row.seed, *row.auc);
    if (row.accuracy) group.second.emplace_back(row.seed, *row.accuracy);
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, group] : groups) {
    AggregateRow agg;
    agg.method = static_cast<MethodId>(key.first);
    agg.ratio = key.second;
    agg.auc = detail::aggregate_metric(group.first);
    agg.accuracy = detail::aggregate_metric(group.second);
    out.push_back(std::move(agg));
  }
  return out;
}

// Two mean±std tables (AUC then Accuracy): one row per method, one column per
// ratio, em dash where a metric is undefined for the method.
inline std::string render_report(const std::vector<AggregateRow>& aggregates) {
  std::vector<double> ratios;
  std::vector<MethodId> methods;
  for (const auto& row : aggregates) {
    if (std::find(ratios.begin(), ratios.end(), row.ratio) == ratios.end())
      ratios.push_back(row.ratio);
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
      methods.push_back(row.method);
  }
  std::sort(ratios.begin(), ratios.end());
  std::sort(methods.begin(), methods.end(),
            [](MethodId a, MethodId b) { return static_cast<int>(a) < static_cast<int>(b); });

  auto lookup = [&](MethodId m, double r) -> const AggregateRow* {
    for (const auto& row : aggregates)
      if (row.method == m && row.ratio == r) return &row;
    return nullptr;
  };

  std::ostringstream out;
  out << "# mean±std across seeds and folds (population std); '—' = metric undefined\n";
  auto table = [&](const char* title, auto metric_of) {
    out << "\n" << title << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-12s", "method");
    out << buf;
    for (double r : ratios) {
      std::snprintf(buf, sizeof(buf), "  %-13s", detail::format_ratio(r).c_str());
      out << buf;
    }
    out << "\n";
    for (MethodId m : methods) {
      std::snprintf(buf, sizeof(buf), "%-12s", method_name(m).c_str());
      out << buf;
      for (double r : ratios) {
        const AggregateRow* row = lookup(m, r);
        const std::optional<MetricAggregate>* metric = row ? metric_of(*row) : nullptr;
        if (metric && metric->has_value()) {
          std::snprintf(buf, sizeof(buf), "  %.3f±%.3f", (**metric).mean, (**metric).stddev);
          out << buf;
        } else {
          std::snprintf(buf, sizeof(buf), "  %-13s", "—");
          out << buf;
        }
      }
      out << "\n";
    }
  };
  table("AUC", [](const AggregateRow& row) { return &row.auc; });
  table("Accuracy", [](const AggregateRow& row) { return &row.accuracy; });
  return out.str();
}

inline void write_report_csv(const std::vector<AggregateRow>& aggregates, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "method,ratio,metric,n,mean,std,seed_std\n";
  auto emit = [&](const AggregateRow& row, const char* name,
                  const std::optional<MetricAggregate>& m) {
    if (!m) return;
    out << method_name(row.method) << "," << detail::format_ratio(row.ratio) << "," << name << ","
        << m->n << "," << detail::format_metric(m->mean) << "," << detail::format_metric(m->stddev)
        << "," << detail::format_metric(m->seed_stddev) << "\n";
  };
  for (const auto& row : aggregates) {
    emit(row, "auc", row.auc);
    emit(row, "accuracy", row.accuracy);
  }
}

}  // namespace scanps
