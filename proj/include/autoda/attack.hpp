#ifndef AUTODA_ATTACK_HPP
#define AUTODA_ATTACK_HPP

#include "autoda/controller.hpp"
#include "autoda/dsl.hpp"
#include "autoda/interpreter.hpp"
#include "autoda/oracle.hpp"
#include "autoda/rng.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace autoda {

struct StartConfig {
  std::size_t max_tries = 100;
  double noise_scale = 1.0;  // std-dev of the Gaussian added to x0
};

struct StartPoint {
  Vector x1;
  std::uint64_t queries = 0;  // spent finding x1
  bool from_fallback = false;
};

/// Adds fresh Gaussian noise to x0 until the oracle reports adversarial;
/// after `max_tries` failures checks and returns `fallback` (one more query).
/// Empty only if `query_cap` runs out first. Throws Error when the fallback
/// is not adversarial.
std::optional<StartPoint> find_start(const DecisionOracle &oracle, std::span<const double> x0,
                                     std::span<const double> fallback, Rng &rng, const StartConfig &cfg = {},
                                     std::uint64_t query_cap = std::numeric_limits<std::uint64_t>::max());

/// Filters programs whose proposals are not strictly closer to x0 than x.
/// The test tuples are drawn once from `seed`: x0, n standard Gaussian and
/// x = x0 + standard Gaussian.
class DistanceTest {
 public:
  static constexpr std::uint64_t default_seed = 0x5eed0da;

  explicit DistanceTest(std::size_t n_cases = 10, std::size_t dim = 32, std::uint64_t seed = default_seed);

  /// Runs with the program's initial hyperparameter values.
  bool operator()(const TacProgram &p, TacMachine &machine) const;
  bool operator()(const TacProgram &p) const;
  bool operator()(const SsaProgram &p, SsaMachine &machine) const;
  bool operator()(const SsaProgram &p) const;

  std::size_t dim() const { return dim_; }
  std::size_t cases() const { return x0_.size(); }

 private:
  template <class Program, class Machine>
  bool run(const Program &p, Machine &machine) const;

  std::size_t dim_;
  std::vector<Vector> x0_, x_, n_;
  std::vector<double> d_;
};

/// Per-example random-walk state.
struct AttackState {
  Vector x0;
  Vector x;  // best adversarial example so far
  double d_min = 0.0;
  double p = 0.0;  // decayed success rate
  Vector hyper;
  std::vector<bool> adaptive;
  std::uint64_t queries = 0;
  bool adaptation_enabled = true;
};

/// Success-rate update followed by hyperparameter scaling. No-op when
/// adaptation is disabled.
void controller_step(AttackState &state, bool success, const ControllerConfig &cfg);

struct AttackConfig {
  std::uint64_t query_budget = 1000;  // includes starting-point queries
  // Iteration cap; 0 means 10 × query_budget. Candidates that fail the
  // distance re-check use an iteration but no query.
  std::uint64_t max_iterations = 0;
  bool adapt = true;
  ControllerConfig controller;
  StartConfig start;
};

struct LogRecord {
  std::uint64_t q;  // query index (1-based, over the whole run)
  double d;         // d_min after the update

  friend bool operator==(const LogRecord &, const LogRecord &) = default;
};

struct RunLog {
  bool found_start = false;
  bool start_from_fallback = false;
  std::uint64_t start_queries = 0;
  double initial_distance = std::numeric_limits<double>::quiet_NaN();
  std::vector<LogRecord> updates;  // accepted updates only
  std::uint64_t queries = 0;
  std::uint64_t iterations = 0;
  double final_distance = std::numeric_limits<double>::quiet_NaN();
  Vector final_hyper;
  Vector adversarial;  // not persisted
  std::string error;   // set when the run aborted

  /// d_min in effect after `q` queries; +inf before the start is found.
  double distance_at(std::uint64_t q) const;
};

/// Random walk from a known start. `start.queries` count toward the budget.
RunLog attack(const TacProgram &program, const DecisionOracle &oracle, std::span<const double> x0,
              const StartPoint &start, const AttackConfig &cfg, Rng &rng);

/// find_start followed by the random walk, all within cfg.query_budget.
RunLog attack(const TacProgram &program, const DecisionOracle &oracle, std::span<const double> x0,
              std::span<const double> fallback, const AttackConfig &cfg, Rng &rng);

/// final d_min / initial distance.
double distortion_ratio(const RunLog &log);

/// JSON lines: `{"q":..,"d":..}` per accepted update, then a summary record.
std::string format_runlog(const RunLog &log, std::optional<double> epsilon = std::nullopt);
RunLog parse_runlog(std::string_view text);

}

#endif //AUTODA_ATTACK_HPP
