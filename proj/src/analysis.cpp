#include "autoda/analysis.hpp"

#include <algorithm>

namespace autoda {

std::size_t LiveSet::size() const { return static_cast<std::size_t>(std::count(live_.begin(), live_.end(), true)); }

LiveSet live_set(const SsaProgram &p) {
  std::vector<bool> live(p.value_count(), false);
  live[p.return_id.index] = true;
  for (auto it = p.body.rbegin(); it != p.body.rend(); ++it) {
    if (!live[it->dest.index]) continue;
    for (auto a : it->operands()) live[a.index] = true;
  }
  return LiveSet(std::move(live));
}

std::vector<std::size_t> dead_instructions(const SsaProgram &p) {
  const auto live = live_set(p);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < p.body.size(); ++i)
    if (!live.contains(p.body[i].dest)) out.push_back(i);
  return out;
}

SsaProgram strip_dead(const SsaProgram &p) {
  const auto live = live_set(p);
  SsaProgram out = p;
  out.body.clear();
  for (const auto &ins : p.body)
    if (live.contains(ins.dest)) out.body.push_back(ins);
  return out;
}

InputsCheck inputs_check(const SsaProgram &p, bool require_hyperparams) {
  const auto live = live_set(p);
  static const char *roles[] = {"x0", "x", "n"};
  InputsCheck r;
  auto miss = [&](ValueId id, const char *role) {
    r.reason += (r.missing.empty() ? "unused: " : ", ") + to_string(id) + " (" + role + ")";
    r.missing.push_back(id);
  };
  for (std::size_t i = 0; i < 3; ++i)
    if (!live.contains(p.inputs[i])) miss(p.inputs[i], roles[i]);
  if (require_hyperparams)
    for (const auto &h : p.hyperparams)
      if (!live.contains(h.id)) miss(h.id, "hyperparameter");
  r.pass = r.missing.empty();
  if (r.pass) r.reason = "all inputs used";
  return r;
}

}
