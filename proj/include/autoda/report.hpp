#ifndef AUTODA_REPORT_HPP
#define AUTODA_REPORT_HPP

#include "autoda/attack.hpp"
#include "autoda/config.hpp"
#include "autoda/dsl.hpp"
#include "autoda/oracle.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace autoda {

enum class Aggregation : std::uint8_t { median, mean };

Aggregation parse_aggregation(std::string_view s);
std::string_view to_string(Aggregation a);

struct BenchConfig {
  std::uint64_t budget = 20000;  // per run, starting-point queries included
  double epsilon = 1.0;          // success iff d_min < epsilon
  std::vector<std::uint64_t> checkpoints{2000, 4000, 20000};
  Aggregation aggregation = Aggregation::median;
  std::size_t n_examples = 10;  // synthetic pool size when no example file is given
  double pool_scale = 1.0;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  bool adapt = true;
  ControllerConfig controller;
  StartConfig start;

  void validate() const;
};

BenchConfig bench_config(KeyValues &kv, BenchConfig base = {});

struct NamedProgram {
  std::string name;  // file-name safe
  TacProgram program;
};

struct BenchResult {
  std::vector<std::string> programs;
  std::size_t n_examples = 0;
  std::vector<std::size_t> excluded;     // example indices dropped at setup
  std::vector<std::vector<RunLog>> logs;  // [program][kept example]
};

/// Runs every program on every benign example. Examples the oracle already
/// labels adversarial are excluded (and reported) before any query is spent.
/// Each example uses one noise stream shared by all programs.
BenchResult benchmark(const std::vector<NamedProgram> &programs, const DecisionOracle &oracle,
                      const std::vector<Vector> &examples, const BenchConfig &cfg);

struct CurvePoint {
  std::uint64_t q = 0;
  double distortion = 0.0;  // aggregated d_min; +inf while any start is pending (median: most)
  double success = 0.0;     // fraction of runs with d_min < epsilon

  friend bool operator==(const CurvePoint &, const CurvePoint &) = default;
};

/// Right-continuous step functions sampled at every query count where some
/// run's d_min changes (start found or update accepted).
std::vector<CurvePoint> make_curve(const std::vector<RunLog> &logs, double epsilon, Aggregation agg);

/// Curve value at query count q: the point with the greatest logged q' <= q.
CurvePoint curve_at(const std::vector<CurvePoint> &curve, std::uint64_t q);

std::string format_curve_csv(const std::vector<CurvePoint> &curve, Aggregation agg);

/// Writes runs/<program>/<example>.jsonl and bench.json describing them.
void save_bench(const std::string &dir, const BenchResult &r, const BenchConfig &cfg);

/// Regenerates curve_<program>.csv and summary.json in `dir` from the
/// persisted run logs alone. `agg` overrides the saved aggregation.
void emit_reports(const std::string &dir, std::optional<Aggregation> agg = std::nullopt);

/// Whitespace or comma separated vectors, one per line.
std::vector<Vector> load_vectors(const std::string &path, std::size_t dim);

}

#endif //AUTODA_REPORT_HPP
