#include "autoda/compiler.hpp"

#include "autoda/analysis.hpp"
#include "autoda/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <optional>

namespace autoda {

namespace {

class SlotPool {
 public:
  std::uint32_t take() {
    if (free_.empty()) return size_++;
    auto it = std::min_element(free_.begin(), free_.end());
    const auto s = *it;
    free_.erase(it);
    return s;
  }

  std::uint32_t reserve() { return size_++; }
  void release(std::uint32_t s) { free_.push_back(s); }
  std::uint32_t size() const { return size_; }

 private:
  std::vector<std::uint32_t> free_;
  std::uint32_t size_ = 0;
};

constexpr std::int64_t never = -1;

}

TacProgram compile(const SsaProgram &p) {
  p.validate();
  const auto live = live_set(p);

  std::vector<const SsaInstr *> kept;
  for (const auto &ins : p.body)
    if (live.contains(ins.dest)) kept.push_back(&ins);

  std::vector<std::int64_t> last_use(p.value_count(), never);
  for (std::size_t k = 0; k < kept.size(); ++k)
    for (auto a : kept[k]->operands()) last_use[a.index] = static_cast<std::int64_t>(k);

  SlotPool scalars, vectors;
  auto pool = [&](Kind k) -> SlotPool & { return k == Kind::scalar ? scalars : vectors; };
  std::vector<std::optional<Slot>> slot_of(p.value_count());

  TacProgram out;
  auto bind_entry = [&](ValueId id) {
    const Slot s{pool(id.kind).reserve(), id.kind};
    slot_of[id.index] = s;
    return s;
  };
  for (const auto &h : p.hyperparams) out.hyperparams.push_back({bind_entry(h.id), h.init, h.fixed});
  for (std::size_t i = 0; i < 3; ++i) out.inputs[i] = bind_entry(p.inputs[i]);
  // Entry values nobody reads are free from the start.
  for (const auto &h : p.hyperparams)
    if (last_use[h.id.index] == never) scalars.release(slot_of[h.id.index]->index);
  for (auto in : p.inputs)
    if (last_use[in.index] == never) vectors.release(slot_of[in.index]->index);

  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto &ins = *kept[k];
    TacInstr t{{}, ins.op, {}};
    const auto ops = ins.operands();
    for (std::size_t i = 0; i < ops.size(); ++i) t.args[i] = *slot_of[ops[i].index];
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const bool repeat = i > 0 && ops[i] == ops[0];
      if (!repeat && last_use[ops[i].index] == static_cast<std::int64_t>(k))
        pool(ops[i].kind).release(slot_of[ops[i].index]->index);
    }
    t.dest = {pool(ins.dest.kind).take(), ins.dest.kind};
    slot_of[ins.dest.index] = t.dest;
    out.body.push_back(t);
    out.origin.push_back(ins.dest);
  }
  out.return_slot = *slot_of[p.return_id.index];
  out.n_scalar_slots = scalars.size();
  out.n_vector_slots = vectors.size();
  out.validate();
  return out;
}

SlotCheck check_slots(const TacProgram &tac) {
  std::vector<bool> s(tac.n_scalar_slots, false), v(tac.n_vector_slots, false);
  auto state = [&](Slot x) -> std::vector<bool>::reference { return x.kind == Kind::scalar ? s[x.index] : v[x.index]; };
  auto name = [](Slot x) { return fmt::format("{}{}", kind_prefix(x.kind), x.index); };
  for (const auto &h : tac.hyperparams) state(h.slot) = true;
  for (auto in : tac.inputs) state(in) = true;
  for (std::size_t i = 0; i < tac.body.size(); ++i) {
    for (auto a : tac.body[i].operands())
      if (!state(a)) return {false, fmt::format("instruction {} reads {} before any write", i + 1, name(a))};
    state(tac.body[i].dest) = true;
  }
  if (!state(tac.return_slot)) return {false, "return slot " + name(tac.return_slot) + " is never written"};
  return {};
}

SlotCheck check_slot_mapping(const SsaProgram &ssa, const TacProgram &tac) {
  if (tac.origin.size() != tac.body.size()) return {false, "TAC program carries no origin table"};
  constexpr std::uint32_t none = 0xffffffffu;
  std::vector<std::uint32_t> s(tac.n_scalar_slots, none), v(tac.n_vector_slots, none);
  auto holder = [&](Slot x) -> std::uint32_t & { return x.kind == Kind::scalar ? s[x.index] : v[x.index]; };
  std::vector<const SsaInstr *> def(ssa.value_count(), nullptr);
  for (const auto &ins : ssa.body) def[ins.dest.index] = &ins;

  if (tac.hyperparams.size() != ssa.hyperparams.size()) return {false, "hyperparameter count differs"};
  for (std::size_t i = 0; i < tac.hyperparams.size(); ++i) holder(tac.hyperparams[i].slot) = ssa.hyperparams[i].id.index;
  for (std::size_t i = 0; i < 3; ++i) holder(tac.inputs[i]) = ssa.inputs[i].index;

  for (std::size_t k = 0; k < tac.body.size(); ++k) {
    const auto &t = tac.body[k];
    const auto id = tac.origin[k];
    if (id.index >= def.size() || def[id.index] == nullptr)
      return {false, fmt::format("instruction {} has no SSA origin", k + 1)};
    const auto &src = *def[id.index];
    if (src.op != t.op) return {false, fmt::format("instruction {} changes the operation", k + 1)};
    const auto ops = src.operands();
    for (std::size_t i = 0; i < ops.size(); ++i)
      if (holder(t.args[i]) != ops[i].index)
        return {false, fmt::format("instruction {} operand {} reads a slot not holding {}", k + 1, i + 1, to_string(ops[i]))};
    holder(t.dest) = id.index;
  }
  if (holder(tac.return_slot) != ssa.return_id.index) return {false, "return slot does not hold the return value"};
  return {};
}

}
