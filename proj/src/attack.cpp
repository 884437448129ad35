#include "autoda/attack.hpp"

#include "autoda/compiler.hpp"
#include "autoda/error.hpp"
#include "autoda/program_text.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <sstream>

namespace autoda {

std::optional<StartPoint> find_start(const DecisionOracle &oracle, std::span<const double> x0,
                                     std::span<const double> fallback, Rng &rng, const StartConfig &cfg,
                                     std::uint64_t query_cap) {
  std::uint64_t used = 0;
  Vector cand(x0.size());
  for (std::size_t t = 0; t < cfg.max_tries; ++t) {
    if (used >= query_cap) return std::nullopt;
    for (std::size_t i = 0; i < cand.size(); ++i) cand[i] = x0[i] + cfg.noise_scale * rng.gaussian();
    ++used;
    if (oracle.query(cand) == Decision::adversarial) return StartPoint{cand, used, false};
  }
  if (fallback.empty()) throw Error(fmt::format("no adversarial starting point after {} tries and no fallback", cfg.max_tries));
  if (used >= query_cap) return std::nullopt;
  ++used;
  if (oracle.query(fallback) != Decision::adversarial) throw Error("fallback starting point is not adversarial");
  return StartPoint{Vector(fallback.begin(), fallback.end()), used, true};
}

DistanceTest::DistanceTest(std::size_t n_cases, std::size_t dim, std::uint64_t seed) : dim_(dim) {
  if (dim == 0) throw ConfigError("distance test dimension must be positive");
  Rng rng = Rng::stream(seed, {0xd157});
  for (std::size_t c = 0; c < n_cases; ++c) {
    Vector x0(dim), x(dim), n(dim);
    rng.gaussian(x0);
    rng.gaussian(n);
    for (std::size_t i = 0; i < dim; ++i) x[i] = x0[i] + rng.gaussian();
    d_.push_back(distance(x, x0));
    x0_.push_back(std::move(x0));
    x_.push_back(std::move(x));
    n_.push_back(std::move(n));
  }
}

template <class Program, class Machine>
bool DistanceTest::run(const Program &p, Machine &machine) const {
  const auto hyper = p.initial_hyper_values();
  for (std::size_t c = 0; c < x0_.size(); ++c) {
    auto out = machine.run(p, hyper, x0_[c], x_[c], n_[c]);
    if (!all_finite(out)) return false;
    if (!(distance(out, x0_[c]) < d_[c])) return false;
  }
  return true;
}

bool DistanceTest::operator()(const TacProgram &p, TacMachine &machine) const { return run(p, machine); }

bool DistanceTest::operator()(const SsaProgram &p, SsaMachine &machine) const { return run(p, machine); }

bool DistanceTest::operator()(const TacProgram &p) const {
  TacMachine m(dim_);
  return (*this)(p, m);
}

bool DistanceTest::operator()(const SsaProgram &p) const {
  SsaMachine m(dim_);
  return run(p, m);
}

void controller_step(AttackState &state, bool success, const ControllerConfig &cfg) {
  if (!state.adaptation_enabled) return;
  state.p = update_success_rate(state.p, success, cfg);
  scale_hyperparams(state.p, state.hyper, state.adaptive, cfg);
}

double RunLog::distance_at(std::uint64_t q) const {
  if (!found_start || q < start_queries) return std::numeric_limits<double>::infinity();
  double d = initial_distance;
  for (const auto &r : updates) {
    if (r.q > q) break;
    d = r.d;
  }
  return d;
}

RunLog attack(const TacProgram &program, const DecisionOracle &oracle, std::span<const double> x0,
              const StartPoint &start, const AttackConfig &cfg, Rng &rng) {
  cfg.controller.validate();
  const std::size_t dim = x0.size();
  if (start.x1.size() != dim) throw Error("starting point dimension does not match x0");

  AttackState st;
  st.x0.assign(x0.begin(), x0.end());
  st.x = start.x1;
  st.d_min = distance(st.x, st.x0);
  st.p = cfg.controller.initial_rate();
  st.hyper = program.initial_hyper_values();
  st.adaptive = program.adaptive_mask();
  st.queries = start.queries;
  st.adaptation_enabled = cfg.adapt;

  RunLog log;
  log.found_start = true;
  log.start_from_fallback = start.from_fallback;
  log.start_queries = start.queries;
  log.initial_distance = st.d_min;

  const std::uint64_t max_iter = cfg.max_iterations ? cfg.max_iterations : 10 * cfg.query_budget;
  TacMachine machine(dim);
  Vector n(dim);
  try {
    while (st.queries < cfg.query_budget && log.iterations < max_iter) {
      ++log.iterations;
      rng.gaussian(n);
      auto cand = machine.run(program, st.hyper, st.x0, st.x, n);
      bool success = false;
      if (all_finite(cand)) {
        const double d = distance(cand, st.x0);
        if (d < st.d_min) {
          ++st.queries;
          if (oracle.query(cand) == Decision::adversarial) {
            st.x.assign(cand.begin(), cand.end());
            st.d_min = d;
            log.updates.push_back({st.queries, d});
            success = true;
          }
        }
      }
      controller_step(st, success, cfg.controller);
    }
  } catch (const std::exception &e) {
    log.error = e.what();
  }
  log.queries = st.queries;
  log.final_distance = st.d_min;
  log.final_hyper = st.hyper;
  log.adversarial = std::move(st.x);
  return log;
}

RunLog attack(const TacProgram &program, const DecisionOracle &oracle, std::span<const double> x0,
              std::span<const double> fallback, const AttackConfig &cfg, Rng &rng) {
  std::optional<StartPoint> start;
  try {
    start = find_start(oracle, x0, fallback, rng, cfg.start, cfg.query_budget);
  } catch (const OracleError &e) {
    RunLog log;
    log.error = e.what();
    return log;
  }
  if (!start) {
    RunLog log;
    log.start_queries = log.queries = cfg.query_budget;
    return log;
  }
  return attack(program, oracle, x0, *start, cfg, rng);
}

double distortion_ratio(const RunLog &log) {
  if (!log.found_start) throw Error("distortion ratio of a run without a starting point");
  if (!(log.initial_distance > 0.0)) throw Error("distortion ratio undefined for zero initial distance");
  return log.final_distance / log.initial_distance;
}

namespace {

std::string num(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

double num_or_nan(const nlohmann::json &j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

}

std::string format_runlog(const RunLog &log, std::optional<double> epsilon) {
  std::string out;
  for (const auto &r : log.updates) out += fmt::format("{{\"q\":{},\"d\":{}}}\n", r.q, num(r.d));
  std::string hyper;
  for (std::size_t i = 0; i < log.final_hyper.size(); ++i) hyper += (i ? "," : "") + num(log.final_hyper[i]);
  const double ratio = log.found_start && log.initial_distance > 0.0 ? distortion_ratio(log)
                                                                     : std::numeric_limits<double>::quiet_NaN();
  out += fmt::format(
      "{{\"summary\":true,\"found_start\":{},\"start_from_fallback\":{},\"start_queries\":{},\"d0\":{},"
      "\"queries\":{},\"iterations\":{},\"final_d\":{},\"ratio\":{},\"hyper\":[{}]",
      log.found_start, log.start_from_fallback, log.start_queries, num(log.initial_distance), log.queries,
      log.iterations, num(log.final_distance), num(ratio), hyper);
  if (epsilon) out += fmt::format(",\"epsilon\":{},\"success\":{}", num(*epsilon), log.found_start && log.final_distance < *epsilon);
  if (!log.error.empty()) out += ",\"error\":" + nlohmann::json(log.error).dump();
  out += "}\n";
  return out;
}

RunLog parse_runlog(std::string_view text) {
  RunLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  bool have_summary = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(number, std::string("malformed run log record: ") + e.what());
    }
    if (have_summary) throw ParseError(number, "record after the summary");
    if (j.contains("summary")) {
      have_summary = true;
      log.found_start = j.at("found_start").get<bool>();
      log.start_from_fallback = j.value("start_from_fallback", false);
      log.start_queries = j.at("start_queries").get<std::uint64_t>();
      log.initial_distance = num_or_nan(j.at("d0"));
      log.queries = j.at("queries").get<std::uint64_t>();
      log.iterations = j.at("iterations").get<std::uint64_t>();
      log.final_distance = num_or_nan(j.at("final_d"));
      for (const auto &h : j.at("hyper")) log.final_hyper.push_back(num_or_nan(h));
      log.error = j.value("error", "");
    } else {
      log.updates.push_back({j.at("q").get<std::uint64_t>(), num_or_nan(j.at("d"))});
    }
  }
  if (!have_summary) throw ParseError(number, "run log has no summary record");
  return log;
}

}
