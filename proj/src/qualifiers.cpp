#include "rxcheck/qualifiers.hpp"

namespace rxcheck {

namespace {

void require_concrete(ThreadQual a, ThreadQual b) {
  if (!is_concrete(a) || !is_concrete(b)) {
    throw std::invalid_argument("thread order is undefined for @PolyThread; instantiate first");
  }
}

}  // namespace

bool thread_leq(ThreadQual a, ThreadQual b) {
  require_concrete(a, b);
  if (a == b) return true;
  return a == ThreadQual::Bottom || b == ThreadQual::Any;
}

ThreadQual thread_join(ThreadQual a, ThreadQual b) {
  require_concrete(a, b);
  if (thread_leq(a, b)) return b;
  if (thread_leq(b, a)) return a;
  return ThreadQual::Any;
}

ThreadQual thread_meet(ThreadQual a, ThreadQual b) {
  require_concrete(a, b);
  if (thread_leq(a, b)) return a;
  if (thread_leq(b, a)) return b;
  return ThreadQual::Bottom;
}

ThreadQual instantiate(ThreadQual q, const PolyBinding& binding) {
  if (is_concrete(q)) return q;
  if (!binding.thread) throw UnboundPolyQualifier("no binding for @PolyThread");
  return *binding.thread;
}

EffectQual instantiate(EffectQual q, const PolyBinding& binding) {
  if (is_concrete(q)) return q;
  if (!binding.effect) throw UnboundPolyQualifier("no binding for @PolyUIEffect");
  return *binding.effect;
}

std::string_view annotation_name(ThreadQual q) {
  switch (q) {
    case ThreadQual::Bottom: return "@BottomThread";
    case ThreadQual::Comp: return "@CompThread";
    case ThreadQual::UI: return "@UIThread";
    case ThreadQual::Any: return "@AnyThread";
    case ThreadQual::Poly: return "@PolyThread";
  }
  return "@AnyThread";
}

std::string_view annotation_name(EffectQual q) {
  switch (q) {
    case EffectQual::Safe: return "@SafeEffect";
    case EffectQual::PolyUI: return "@PolyUIEffect";
    case EffectQual::UI: return "@UIEffect";
  }
  return "@SafeEffect";
}

std::string_view type_use_name(EffectQual q) {
  switch (q) {
    case EffectQual::Safe: return "@AlwaysSafe";
    case EffectQual::PolyUI: return "@PolyUI";
    case EffectQual::UI: return "@UI";
  }
  return "@AlwaysSafe";
}

std::optional<ThreadQual> thread_from_annotation(std::string_view name) {
  if (name == "BottomThread") return ThreadQual::Bottom;
  if (name == "CompThread") return ThreadQual::Comp;
  if (name == "UIThread") return ThreadQual::UI;
  if (name == "AnyThread") return ThreadQual::Any;
  if (name == "PolyThread") return ThreadQual::Poly;
  return std::nullopt;
}

std::optional<EffectQual> effect_from_method_annotation(std::string_view name) {
  if (name == "SafeEffect") return EffectQual::Safe;
  if (name == "PolyUIEffect") return EffectQual::PolyUI;
  if (name == "UIEffect") return EffectQual::UI;
  return std::nullopt;
}

std::optional<EffectQual> effect_from_type_use(std::string_view name) {
  if (name == "AlwaysSafe") return EffectQual::Safe;
  if (name == "PolyUI") return EffectQual::PolyUI;
  if (name == "UI") return EffectQual::UI;
  return std::nullopt;
}

}  // namespace rxcheck
