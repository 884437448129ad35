#include "autoda/report.hpp"

#include "autoda/error.hpp"
#include "autoda/parallel.hpp"
#include "autoda/program_text.hpp"
#include "autoda/search.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;

namespace autoda {

namespace {

constexpr std::uint64_t bench_stream = 6;

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double aggregate(std::vector<double> &v, Aggregation agg) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (agg == Aggregation::mean) return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2) return v[m];
  return v[m - 1] == v[m] ? v[m] : (v[m - 1] + v[m]) / 2.0;
}

void check_name(const std::string &name) {
  const bool ok = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }) && name != "." && name != "..";
  if (!ok) throw ConfigError("program name '" + name + "' must use only letters, digits, '_', '-' and '.'");
}

}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "median") return Aggregation::median;
  if (s == "mean") return Aggregation::mean;
  throw ConfigError("aggregation must be 'median' or 'mean', got '" + std::string(s) + "'");
}

std::string_view to_string(Aggregation a) { return a == Aggregation::median ? "median" : "mean"; }

void BenchConfig::validate() const {
  check(budget >= 1, "bench budget must be at least 1");
  check(epsilon > 0.0, "epsilon must be positive");
  check(n_examples >= 1, "n_examples must be at least 1");
  check(pool_scale > 0.0, "pool_scale must be positive");
  controller.validate();
}

BenchConfig bench_config(KeyValues &kv, BenchConfig c) {
  c.budget = kv.get("budget", c.budget);
  c.epsilon = kv.get("epsilon", c.epsilon);
  c.checkpoints = kv.get("checkpoints", c.checkpoints);
  c.aggregation = parse_aggregation(kv.get("aggregation", std::string(to_string(c.aggregation))));
  c.n_examples = static_cast<std::size_t>(kv.get("n_examples", std::uint64_t{c.n_examples}));
  c.pool_scale = kv.get("pool_scale", c.pool_scale);
  c.seed = kv.get("seed", c.seed);
  c.workers = static_cast<std::size_t>(kv.get("workers", std::uint64_t{c.workers}));
  c.adapt = kv.get("adapt", c.adapt);
  c.controller.alpha = kv.get("alpha", c.controller.alpha);
  c.controller.lo = kv.get("lo", c.controller.lo);
  c.controller.hi = kv.get("hi", c.controller.hi);
  c.controller.target = kv.get("target", c.controller.target);
  if (kv.has("p_init")) c.controller.p_init = kv.get("p_init", 0.0);
  c.start.max_tries = static_cast<std::size_t>(kv.get("start_tries", std::uint64_t{c.start.max_tries}));
  c.start.noise_scale = kv.get("start_noise", c.start.noise_scale);
  return c;
}

BenchResult benchmark(const std::vector<NamedProgram> &programs, const DecisionOracle &oracle,
                      const std::vector<Vector> &examples, const BenchConfig &cfg) {
  cfg.validate();
  BenchResult r;
  r.n_examples = examples.size();
  for (const auto &p : programs) {
    check_name(p.name);
    if (std::count(r.programs.begin(), r.programs.end(), p.name)) throw ConfigError("duplicate program name " + p.name);
    r.programs.push_back(p.name);
  }

  std::vector<std::size_t> kept;
  std::vector<Vector> fallbacks;
  for (std::size_t k = 0; k < examples.size(); ++k) {
    if (examples[k].size() != oracle.dim()) throw ConfigError(fmt::format("example {} has the wrong dimension", k));
    if (oracle.decide_offline(examples[k]) == Decision::adversarial) {
      r.excluded.push_back(k);
      continue;
    }
    kept.push_back(k);
    fallbacks.push_back(fallback_for(oracle, examples[k], Rng::stream(cfg.seed, {bench_stream, k, 0})));
  }

  AttackConfig acfg;
  acfg.query_budget = cfg.budget;
  acfg.adapt = cfg.adapt;
  acfg.controller = cfg.controller;
  acfg.start = cfg.start;

  r.logs.assign(programs.size(), std::vector<RunLog>(kept.size()));
  const std::size_t n = programs.size() * kept.size();
  parallel_for(n, cfg.workers ? cfg.workers : default_workers(), [&](std::size_t job) {
    const std::size_t i = job / kept.size(), j = job % kept.size();
    Rng rng = Rng::stream(cfg.seed, {bench_stream, kept[j], 1});
    r.logs[i][j] = attack(programs[i].program, oracle, examples[kept[j]], fallbacks[j], acfg, rng);
  });
  return r;
}

std::vector<CurvePoint> make_curve(const std::vector<RunLog> &logs, double epsilon, Aggregation agg) {
  std::vector<std::uint64_t> events;
  for (const auto &log : logs) {
    if (!log.found_start) continue;
    events.push_back(log.start_queries);
    for (const auto &u : log.updates) events.push_back(u.q);
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  std::vector<std::size_t> cursor(logs.size(), 0);
  std::vector<double> d(logs.size());
  std::vector<CurvePoint> out;
  out.reserve(events.size());
  for (auto q : events) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const auto &log = logs[i];
      if (!log.found_start || q < log.start_queries) {
        d[i] = std::numeric_limits<double>::infinity();
        continue;
      }
      auto &c = cursor[i];
      while (c < log.updates.size() && log.updates[c].q <= q) ++c;
      d[i] = c ? log.updates[c - 1].d : log.initial_distance;
      if (d[i] < epsilon) ++hits;
    }
    auto tmp = d;
    out.push_back({q, aggregate(tmp, agg), static_cast<double>(hits) / static_cast<double>(logs.size())});
  }
  return out;
}

CurvePoint curve_at(const std::vector<CurvePoint> &curve, std::uint64_t q) {
  auto it = std::upper_bound(curve.begin(), curve.end(), q,
                             [](std::uint64_t v, const CurvePoint &p) { return v < p.q; });
  if (it == curve.begin()) return {q, std::numeric_limits<double>::infinity(), 0.0};
  return *std::prev(it);
}

std::string format_curve_csv(const std::vector<CurvePoint> &curve, Aggregation agg) {
  std::string out = fmt::format("queries,{}_distortion,success_rate\n", to_string(agg));
  for (const auto &p : curve) out += fmt::format("{},{},{}\n", p.q, format_double(p.distortion), format_double(p.success));
  return out;
}

void save_bench(const std::string &dir, const BenchResult &r, const BenchConfig &cfg) {
  fs::create_directories(fs::path(dir) / "runs");
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < r.n_examples; ++k)
    if (!std::count(r.excluded.begin(), r.excluded.end(), k)) kept.push_back(k);
  for (std::size_t i = 0; i < r.programs.size(); ++i) {
    const fs::path pdir = fs::path(dir) / "runs" / r.programs[i];
    fs::create_directories(pdir);
    for (std::size_t j = 0; j < kept.size(); ++j)
      write_file((pdir / fmt::format("{}.jsonl", kept[j])).string(), format_runlog(r.logs[i][j], cfg.epsilon));
  }
  nlohmann::json m = {
      {"programs", r.programs},
      {"n_examples", r.n_examples},
      {"examples", kept},
      {"excluded", r.excluded},
      {"budget", cfg.budget},
      {"epsilon", cfg.epsilon},
      {"checkpoints", cfg.checkpoints},
      {"aggregation", std::string(to_string(cfg.aggregation))},
      {"seed", cfg.seed},
      {"adapt", cfg.adapt},
  };
  write_file((fs::path(dir) / "bench.json").string(), m.dump(2) + "\n");
}

void emit_reports(const std::string &dir, std::optional<Aggregation> agg_override) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file((fs::path(dir) / "bench.json").string()));
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("malformed bench.json: ") + e.what());
  }
  const double epsilon = m.at("epsilon").get<double>();
  const auto checkpoints = m.at("checkpoints").get<std::vector<std::uint64_t>>();
  const auto kept = m.at("examples").get<std::vector<std::size_t>>();
  const Aggregation agg = agg_override.value_or(parse_aggregation(m.at("aggregation").get<std::string>()));

  nlohmann::json summary = {
      {"aggregation", std::string(to_string(agg))},
      {"epsilon", epsilon},
      {"budget", m.at("budget")},
      {"examples", kept.size()},
      {"excluded", m.at("excluded")},
      {"programs", nlohmann::json::array()},
  };
  for (const auto &name : m.at("programs").get<std::vector<std::string>>()) {
    check_name(name);
    std::vector<RunLog> logs;
    for (auto k : kept)
      logs.push_back(parse_runlog(read_file((fs::path(dir) / "runs" / name / fmt::format("{}.jsonl", k)).string())));
    const auto curve = make_curve(logs, epsilon, agg);
    write_file((fs::path(dir) / fmt::format("curve_{}.csv", name)).string(), format_curve_csv(curve, agg));

    nlohmann::json p = {{"name", name}, {"checkpoints", nlohmann::json::array()}};
    for (auto q : checkpoints) {
      const auto pt = curve_at(curve, q);
      p["checkpoints"].push_back({{"queries", q}, {"distortion", number(pt.distortion)}, {"success_rate", pt.success}});
    }
    std::vector<double> ratios;
    std::uint64_t errors = 0;
    for (const auto &log : logs) {
      if (!log.error.empty()) ++errors;
      if (log.found_start && log.initial_distance > 0.0) ratios.push_back(distortion_ratio(log));
    }
    p["distortion_ratio"] = number(aggregate(ratios, agg));
    p["errors"] = errors;
    summary["programs"].push_back(std::move(p));
  }
  write_file((fs::path(dir) / "summary.json").string(), summary.dump(2) + "\n");
}

std::vector<Vector> load_vectors(const std::string &path, std::size_t dim) {
  std::istringstream in(read_file(path));
  std::vector<Vector> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    Vector v;
    std::string tok;
    while (fields >> tok) {
      double x = 0.0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || p != tok.data() + tok.size())
        throw ConfigError(fmt::format("{}:{}: bad number '{}'", path, number, tok));
      v.push_back(x);
    }
    if (v.empty()) continue;
    if (v.size() != dim) throw ConfigError(fmt::format("{}:{}: expected {} values, got {}", path, number, dim, v.size()));
    out.push_back(std::move(v));
  }
  return out;
}

}
