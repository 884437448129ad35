#include "autoda/oracle.hpp"

#include "autoda/error.hpp"
#include "autoda/program_text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

namespace autoda {

void DecisionOracle::check_dim(std::span<const double> x) const {
  if (x.size() != dim_) throw OracleError(fmt::format("query dimension {} does not match oracle dimension {}", x.size(), dim_));
}

Decision DecisionOracle::query(std::span<const double> x) const {
  check_dim(x);
  queries_.fetch_add(1, std::memory_order_relaxed);
  return is_adversarial(x) ? Decision::adversarial : Decision::benign;
}

Decision DecisionOracle::decide_offline(std::span<const double> x) const {
  check_dim(x);
  return is_adversarial(x) ? Decision::adversarial : Decision::benign;
}

std::optional<double> DecisionOracle::optimal_distance(std::span<const double>) const { return std::nullopt; }
std::optional<Vector> DecisionOracle::fallback(std::span<const double>) const { return std::nullopt; }

HalfspaceOracle::HalfspaceOracle(Vector w, double b)
    : DecisionOracle(w.size()), w_(std::move(w)), b_(b), norm_(kernel::norm(w_.data(), w_.size())) {
  if (w_.empty() || !(norm_ > 0.0) || !std::isfinite(norm_)) throw OracleError("halfspace normal must be nonzero and finite");
}

double HalfspaceOracle::score(std::span<const double> x) const { return kernel::dot(w_.data(), x.data(), w_.size()) + b_; }

bool HalfspaceOracle::is_adversarial(std::span<const double> x) const { return score(x) > 0.0; }

std::optional<double> HalfspaceOracle::optimal_distance(std::span<const double> x0) const {
  return std::abs(score(x0)) / norm_;
}

std::optional<Vector> HalfspaceOracle::fallback(std::span<const double> x0) const {
  // Reflect across the hyperplane, plus a unit margin past it.
  const double s = score(x0);
  const double t = (std::abs(s) + std::max(norm_, std::abs(s))) / (norm_ * norm_);
  Vector out(x0.begin(), x0.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * w_[i];
  return out;
}

std::string HalfspaceOracle::describe() const {
  std::string w;
  for (std::size_t i = 0; i < w_.size(); ++i) w += (i ? "," : "") + format_double(w_[i]);
  return "halfspace:w=" + w + ";b=" + format_double(b_);
}

SphereOracle::SphereOracle(Vector center, double radius, Side adversarial)
    : DecisionOracle(center.size()), center_(std::move(center)), radius_(radius), side_(adversarial) {
  if (center_.empty()) throw OracleError("sphere center must have positive dimension");
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw OracleError("sphere radius must be positive and finite");
}

bool SphereOracle::is_adversarial(std::span<const double> x) const {
  const double r = distance(x, center_);
  return side_ == Side::outside ? r > radius_ : r < radius_;
}

std::optional<double> SphereOracle::optimal_distance(std::span<const double> x0) const {
  return std::abs(radius_ - distance(x0, center_));
}

std::optional<Vector> SphereOracle::fallback(std::span<const double> x0) const {
  if (side_ == Side::inside) return center_;
  // Radially outward from x0 to twice the radius.
  Vector dir(x0.size());
  const double r = distance(x0, center_);
  for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = r > 0.0 ? (x0[i] - center_[i]) / r : (i == 0 ? 1.0 : 0.0);
  Vector out(center_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += 2.0 * std::max(radius_, r) * dir[i];
  return out;
}

std::string SphereOracle::describe() const {
  std::string c;
  for (std::size_t i = 0; i < center_.size(); ++i) c += (i ? "," : "") + format_double(center_[i]);
  return "sphere:c=" + c + ";r=" + format_double(radius_) + ";adv=" + (side_ == Side::outside ? "outside" : "inside");
}

MlpOracle::MlpOracle(std::vector<Layer> layers, std::size_t benign_label)
    : DecisionOracle(layers.empty() ? 0 : layers.front().cols), layers_(std::move(layers)), benign_(benign_label) {
  if (layers_.empty()) throw OracleError("mlp needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto &l = layers_[i];
    if (l.rows == 0 || l.cols == 0) throw OracleError(fmt::format("mlp layer {} has an empty shape", i + 1));
    if (l.weights.size() != l.rows * l.cols || l.bias.size() != l.rows)
      throw OracleError(fmt::format("mlp layer {} has inconsistent sizes", i + 1));
    if (i > 0 && l.cols != layers_[i - 1].rows)
      throw OracleError(fmt::format("mlp layer {} takes {} inputs but layer {} produces {}", i + 1, l.cols, i,
                                    layers_[i - 1].rows));
  }
  if (benign_ >= layers_.back().rows)
    throw OracleError(fmt::format("benign label {} out of range for {} classes", benign_, layers_.back().rows));
}

std::size_t MlpOracle::label(std::span<const double> x) const {
  Vector cur(x.begin(), x.end()), next;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto &l = layers_[li];
    next.assign(l.rows, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r) {
      double v = kernel::dot(l.weights.data() + r * l.cols, cur.data(), l.cols) + l.bias[r];
      if (li + 1 < layers_.size()) v = std::max(v, 0.0);
      next[r] = v;
    }
    cur.swap(next);
  }
  return static_cast<std::size_t>(std::max_element(cur.begin(), cur.end()) - cur.begin());
}

bool MlpOracle::is_adversarial(std::span<const double> x) const { return label(x) != benign_; }

std::string MlpOracle::describe() const {
  return fmt::format("mlp:layers={};benign={}", layers_.size(), benign_);
}

namespace {

class Tokens {
 public:
  explicit Tokens(std::string_view s) : s_(s) {}

  std::size_t offset() {
    skip();
    return pos_;
  }

  std::string_view next(const char *what) {
    skip();
    if (pos_ >= s_.size()) throw OracleError(fmt::format("truncated mlp file at byte offset {}: expected {}", pos_, what));
    const auto start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  template <class T>
  T number(const char *what) {
    const auto at = offset();
    auto tok = next(what);
    T v{};
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw OracleError(fmt::format("malformed mlp file at byte offset {}: expected {}, got '{}'", at, what, tok));
    return v;
  }

 private:
  void skip() {
    while (pos_ < s_.size()) {
      if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

Vector parse_list(std::string_view s, std::size_t dim, const std::string &key) {
  Vector out;
  while (true) {
    auto comma = s.find(',');
    auto tok = s.substr(0, comma);
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw ConfigError(fmt::format("oracle spec: malformed number '{}' in {}", tok, key));
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (out.size() == 1 && dim > 1) out.assign(dim, out[0]);
  if (dim != 0 && out.size() != dim)
    throw ConfigError(fmt::format("oracle spec: {} has {} entries but dim is {}", key, out.size(), dim));
  return out;
}

double parse_scalar(const std::string &s, const std::string &key) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(fmt::format("oracle spec: malformed {} '{}'", key, s));
  return v;
}

}

std::vector<MlpOracle::Layer> parse_mlp(std::string_view text) {
  Tokens t(text);
  const auto at = t.offset();
  if (t.next("'layers:' header") != "layers:")
    throw OracleError(fmt::format("malformed mlp file at byte offset {}: expected 'layers:'", at));
  const auto k = t.number<std::size_t>("layer count");
  if (k == 0) throw OracleError("mlp file declares zero layers");
  std::vector<MlpOracle::Layer> layers(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto &l = layers[i];
    l.rows = t.number<std::size_t>("layer rows");
    l.cols = t.number<std::size_t>("layer cols");
    if (i > 0 && l.cols != layers[i - 1].rows)
      throw OracleError(fmt::format("mlp layer {} takes {} inputs but layer {} produces {}", i + 1, l.cols, i, layers[i - 1].rows));
    l.weights.resize(l.rows * l.cols);
    for (auto &w : l.weights) w = t.number<double>("weight");
    l.bias.resize(l.rows);
    for (auto &b : l.bias) b = t.number<double>("bias");
  }
  const auto end = t.offset();
  if (end != text.size()) throw OracleError(fmt::format("malformed mlp file at byte offset {}: trailing data", end));
  return layers;
}

std::string format_mlp(const std::vector<MlpOracle::Layer> &layers) {
  std::string out = fmt::format("layers: {}\n", layers.size());
  for (const auto &l : layers) {
    out += fmt::format("{} {}\n", l.rows, l.cols);
    for (std::size_t r = 0; r < l.rows; ++r) {
      for (std::size_t c = 0; c < l.cols; ++c) out += (c ? " " : "") + format_double(l.weights[r * l.cols + c]);
      out += "\n";
    }
    for (std::size_t r = 0; r < l.rows; ++r) out += (r ? " " : "") + format_double(l.bias[r]);
    out += "\n";
  }
  return out;
}

std::unique_ptr<MlpOracle> load_mlp(const std::string &path, std::size_t benign_label) {
  return std::make_unique<MlpOracle>(parse_mlp(read_file(path)), benign_label);
}

std::unique_ptr<DecisionOracle> make_oracle(std::string_view spec, std::size_t dim) {
  const auto colon = spec.find(':');
  const std::string kind(spec.substr(0, colon));
  std::map<std::string, std::string> kv;
  if (colon != std::string_view::npos) {
    auto rest = spec.substr(colon + 1);
    while (!rest.empty()) {
      auto semi = rest.find(';');
      auto item = rest.substr(0, semi);
      if (!item.empty()) {
        auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ConfigError(fmt::format("oracle spec: expected key=value, got '{}'", item));
        kv[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
      }
      if (semi == std::string_view::npos) break;
      rest.remove_prefix(semi + 1);
    }
  }
  auto take = [&](const std::string &key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto finish = [&](std::unique_ptr<DecisionOracle> o) {
    if (!kv.empty()) throw ConfigError(fmt::format("oracle spec: unknown key '{}' for {}", kv.begin()->first, kind));
    if (dim != 0 && o->dim() != dim)
      throw ConfigError(fmt::format("oracle dimension {} does not match requested dim {}", o->dim(), dim));
    return o;
  };

  if (kind == "halfspace") {
    Vector w;
    if (auto axis = take("axis")) {
      if (dim == 0) throw ConfigError("oracle spec: axis= needs an explicit dim");
      const auto i = static_cast<std::size_t>(parse_scalar(*axis, "axis"));
      if (i >= dim) throw ConfigError("oracle spec: axis out of range");
      w.assign(dim, 0.0);
      w[i] = 1.0;
    } else if (auto ws = take("w")) {
      w = parse_list(*ws, dim, "w");
    } else {
      throw ConfigError("oracle spec: halfspace needs w= or axis=");
    }
    const auto bs = take("b");
    const double b = bs ? parse_scalar(*bs, "b") : 0.0;
    return finish(std::make_unique<HalfspaceOracle>(std::move(w), b));
  }
  if (kind == "sphere") {
    Vector c;
    if (auto cs = take("c")) {
      c = parse_list(*cs, dim, "c");
    } else {
      if (dim == 0) throw ConfigError("oracle spec: sphere without c= needs an explicit dim");
      c.assign(dim, 0.0);
    }
    auto r = take("r");
    if (!r) throw ConfigError("oracle spec: sphere needs r=");
    Side side = Side::outside;
    if (auto adv = take("adv")) {
      if (*adv == "inside") side = Side::inside;
      else if (*adv != "outside") throw ConfigError("oracle spec: adv must be inside or outside");
    }
    return finish(std::make_unique<SphereOracle>(std::move(c), parse_scalar(*r, "r"), side));
  }
  if (kind == "mlp") {
    auto path = take("path");
    if (!path) throw ConfigError("oracle spec: mlp needs path=");
    const auto bs = take("benign");
    const double benign = bs ? parse_scalar(*bs, "benign") : 0.0;
    if (benign < 0 || benign != std::floor(benign)) throw ConfigError("oracle spec: benign must be a class index");
    return finish(load_mlp(*path, static_cast<std::size_t>(benign)));
  }
  throw ConfigError("oracle spec: unknown oracle kind '" + kind + "'");
}

}
