#include "autoda/config.hpp"

#include "autoda/error.hpp"
#include "autoda/program_text.hpp"

#include <fmt/format.h>

#include <charconv>
#include <sstream>

namespace autoda {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t to_u64(const std::string &key, std::string_view s) {
  std::uint64_t v = 0;
  // Accept 5e6 style budgets as long as they are whole numbers.
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && p == s.data() + s.size()) return v;
  double d = 0.0;
  auto [q, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec2 == std::errc() && q == s.data() + s.size() && d >= 0.0 && d < 1.8e19 && d == static_cast<double>(static_cast<std::uint64_t>(d)))
    return static_cast<std::uint64_t>(d);
  throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", key, s));
}

}

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", number));
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", number));
    if (kv.values_.count(key)) throw ConfigError(fmt::format("line {}: duplicate key '{}'", number, key));
    kv.values_[key] = value;
    kv.lines_[key] = number;
  }
  return kv;
}

KeyValues KeyValues::load(const std::string &path) { return parse(read_file(path)); }

std::string KeyValues::get(const std::string &key, const std::string &fallback) {
  read_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValues::get(const std::string &key, double fallback) {
  read_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto &s = it->second;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, s));
  return v;
}

std::uint64_t KeyValues::get(const std::string &key, std::uint64_t fallback) {
  read_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : to_u64(key, it->second);
}

bool KeyValues::get(const std::string &key, bool fallback) {
  read_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto &s = it->second;
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, s));
}

std::vector<std::uint64_t> KeyValues::get(const std::string &key, const std::vector<std::uint64_t> &fallback) {
  read_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::uint64_t> out;
  std::string_view rest = it->second;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    out.push_back(to_u64(key, trim(rest.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

void KeyValues::reject_unused() const {
  std::string bad;
  for (const auto &[k, v] : values_)
    if (!read_.count(k)) bad += fmt::format("{}{} (line {})", bad.empty() ? "" : ", ", k, lines_.count(k) ? lines_.at(k) : 0);
  if (!bad.empty()) throw ConfigError("unknown config keys: " + bad);
}

SearchConfig search_config(KeyValues &kv, SearchConfig c) {
  auto size = [&](const char *k, std::size_t &v) { v = static_cast<std::size_t>(kv.get(k, std::uint64_t{v})); };
  auto u64 = [&](const char *k, std::uint64_t &v) { v = kv.get(k, v); };
  auto dbl = [&](const char *k, double &v) { v = kv.get(k, v); };
  auto flag = [&](const char *k, bool &v) { v = kv.get(k, v); };

  size("batch_size", c.batch_size);
  u64("stage1_iters", c.stage1_iters);
  u64("stage2_iters", c.stage2_iters);
  size("n_stage2_examples", c.n_stage2_examples);
  u64("query_budget", c.query_budget);
  size("max_len", c.gen.max_len);
  size("n_hyperparams", c.gen.n_hyperparams);
  dbl("hyperparam_init", c.gen.hyperparam_init);
  dbl("unused_bias", c.gen.unused_bias);
  flag("predefined", c.techniques.predefined);
  flag("inputs_check", c.techniques.inputs_check);
  flag("distance_test", c.techniques.distance_test);
  flag("compact", c.techniques.compact);
  flag("require_hyperparams", c.require_hyperparams);
  flag("stage2_adapt", c.stage2_adapt);
  dbl("alpha", c.controller.alpha);
  dbl("lo", c.controller.lo);
  dbl("hi", c.controller.hi);
  dbl("target", c.controller.target);
  if (kv.has("p_init")) c.controller.p_init = kv.get("p_init", 0.0);
  size("start_tries", c.start.max_tries);
  dbl("start_noise", c.start.noise_scale);
  c.oracle = kv.get("oracle", c.oracle);
  size("dim", c.dim);
  size("workers", c.workers);
  u64("seed", c.seed);
  size("distance_cases", c.distance_cases);
  size("distance_dim", c.distance_dim);
  size("pool_size", c.pool_size);
  dbl("pool_scale", c.pool_scale);
  size("chunk", c.chunk);
  size("top_k", c.top_k);
  return c;
}

std::string format_search_config(const SearchConfig &c) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::string out;
  out += "# search settings; every key is optional\n";
  out += fmt::format("seed = {}\n", c.seed);
  out += fmt::format("workers = {}  # 0: all hardware threads\n", c.workers);
  out += fmt::format("query_budget = {}\n", c.query_budget);
  out += fmt::format("batch_size = {}\n", c.batch_size);
  out += fmt::format("stage1_iters = {}\n", c.stage1_iters);
  out += fmt::format("stage2_iters = {}\n", c.stage2_iters);
  out += fmt::format("n_stage2_examples = {}\n", c.n_stage2_examples);
  out += fmt::format("stage2_adapt = {}\n", b(c.stage2_adapt));
  out += "\n# victim\n";
  out += fmt::format("oracle = {}\n", c.oracle);
  out += fmt::format("dim = {}\n", c.dim);
  out += fmt::format("pool_size = {}\n", c.pool_size);
  out += fmt::format("pool_scale = {}\n", c.pool_scale);
  out += fmt::format("start_tries = {}\n", c.start.max_tries);
  out += fmt::format("start_noise = {}\n", c.start.noise_scale);
  out += "\n# generator\n";
  out += fmt::format("max_len = {}\n", c.gen.max_len);
  out += fmt::format("n_hyperparams = {}\n", c.gen.n_hyperparams);
  out += fmt::format("hyperparam_init = {}\n", c.gen.hyperparam_init);
  out += fmt::format("unused_bias = {}\n", c.gen.unused_bias);
  out += fmt::format("predefined = {}\n", b(c.techniques.predefined));
  out += fmt::format("compact = {}\n", b(c.techniques.compact));
  out += "\n# filters\n";
  out += fmt::format("inputs_check = {}\n", b(c.techniques.inputs_check));
  out += fmt::format("require_hyperparams = {}\n", b(c.require_hyperparams));
  out += fmt::format("distance_test = {}\n", b(c.techniques.distance_test));
  out += fmt::format("distance_cases = {}\n", c.distance_cases);
  out += fmt::format("distance_dim = {}\n", c.distance_dim);
  out += "\n# step-size controller\n";
  out += fmt::format("alpha = {}\n", c.controller.alpha);
  out += fmt::format("lo = {}\n", c.controller.lo);
  out += fmt::format("hi = {}\n", c.controller.hi);
  out += fmt::format("target = {}\n", c.controller.target);
  if (c.controller.p_init) out += fmt::format("p_init = {}\n", *c.controller.p_init);
  out += "\n# plumbing\n";
  out += fmt::format("chunk = {}\n", c.chunk);
  out += fmt::format("top_k = {}\n", c.top_k);
  return out;
}

}
