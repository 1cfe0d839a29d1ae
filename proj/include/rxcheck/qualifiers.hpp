#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rxcheck {

/// Method and callback effect refinement. Declaration order matches the
/// sub-effecting order Safe < PolyUI < UI.
enum class EffectQual { Safe, PolyUI, UI };

/// Stream and scheduler thread refinement. Bottom/Comp/UI/Any form a diamond;
/// Poly is a refinement variable and is not part of the order.
enum class ThreadQual { Bottom, Comp, UI, Any, Poly };

constexpr bool is_concrete(EffectQual q) { return q != EffectQual::PolyUI; }
constexpr bool is_concrete(ThreadQual q) { return q != ThreadQual::Poly; }

constexpr bool effect_leq(EffectQual a, EffectQual b) {
  return static_cast<int>(a) <= static_cast<int>(b);
}

constexpr EffectQual effect_join(EffectQual a, EffectQual b) { return effect_leq(a, b) ? b : a; }

/// Diamond order over concrete thread qualifiers.
/// Throws std::invalid_argument if either side is ThreadQual::Poly.
bool thread_leq(ThreadQual a, ThreadQual b);

/// Least upper bound; same precondition as thread_leq.
ThreadQual thread_join(ThreadQual a, ThreadQual b);

/// Greatest lower bound; same precondition as thread_leq.
ThreadQual thread_meet(ThreadQual a, ThreadQual b);

/// Call-site instantiation of a signature's single refinement variable.
struct PolyBinding {
  std::optional<ThreadQual> thread;
  std::optional<EffectQual> effect;

  bool operator==(const PolyBinding&) const = default;
};

class UnboundPolyQualifier : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ThreadQual instantiate(ThreadQual q, const PolyBinding& binding);
EffectQual instantiate(EffectQual q, const PolyBinding& binding);

/// Source spelling, e.g. "@CompThread".
std::string_view annotation_name(ThreadQual q);
/// Method-level spelling, e.g. "@UIEffect".
std::string_view annotation_name(EffectQual q);
/// Type-use spelling for callback instances: "@UI", "@PolyUI", "@AlwaysSafe".
std::string_view type_use_name(EffectQual q);

std::optional<ThreadQual> thread_from_annotation(std::string_view name);
std::optional<EffectQual> effect_from_method_annotation(std::string_view name);
std::optional<EffectQual> effect_from_type_use(std::string_view name);

}  // namespace rxcheck
