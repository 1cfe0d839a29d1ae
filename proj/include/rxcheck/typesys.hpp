#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rxcheck/ast.hpp"
#include "rxcheck/diagnostic.hpp"
#include "rxcheck/qualifiers.hpp"
#include "rxcheck/resolve.hpp"
#include "rxcheck/stubs.hpp"

namespace rxcheck {

/// Static type of an expression.
struct ValueType {
  enum class Kind {
    Value,     // an instance of `type`
    ClassRef,  // a class name used as a static receiver; `type.name` is the class
    Null,
    Unknown,   // unresolvable; compatible with everything
  };
  Kind kind = Kind::Unknown;
  ast::TypeRef type;

  static ValueType of(ast::TypeRef t) { return ValueType{Kind::Value, std::move(t)}; }
  static ValueType unknown() { return ValueType{}; }
  bool known() const { return kind == Kind::Value; }
  const ThreadQual* thread() const { return kind == Kind::Value ? type.thread() : nullptr; }
  const EffectQual* effect() const { return kind == Kind::Value ? type.effect() : nullptr; }

  bool operator==(const ValueType&) const = default;
};

// Order on thread qualifiers where @PolyThread is a rigid variable (inside a
// polymorphic method body): it is below only @AnyThread and itself.
bool thread_leq_rigid(ThreadQual a, ThreadQual b);
ThreadQual thread_join_rigid(ThreadQual a, ThreadQual b);

/// Outcome of matching one call against a signature.
struct CallTyping {
  ast::TypeRef result;                    // instantiated and substituted
  ast::TypeRef receiver;                  // formal receiver, instantiated
  std::vector<ast::TypeRef> params;       // formals, instantiated
  PolyBinding binding;
  EffectQual effect = EffectQual::Safe;   // callee effect after instantiation
  bool unbound = false;                   // a polymorphic qualifier had no position to bind from
  std::string unbound_detail;
};

/// Solves the polymorphic binding and generic parameters for one call.
/// `receiver` is absent for static calls. Unknown actuals bind nothing;
/// a polymorphic position left without a concrete actual is bound to the
/// top of its lattice.
CallTyping instantiate_call(const MethodSig& sig, const std::optional<ValueType>& receiver,
                            const std::vector<ValueType>& args);

/// Effect transitivity at a call site. `callee.effect` must already be
/// instantiated for this call.
std::optional<Diagnostic> check_call_effect(EffectQual caller_effect, const MethodSig& callee, bool same_receiver,
                                            const Span& at = {}, const std::string& caller = "");

/// Effect inheritance for `sub` overriding `super_`.
std::optional<Diagnostic> check_override(const MethodSig& sub, const MethodSig& super_, const Span& at = {});

/// A callback of effect `callback_effect` handed to an operator running on
/// `stream_thread`. Strict mode admits UI callbacks on UI and bottom streams
/// only; lenient mode admits anything whose effect fits under the thread.
std::optional<Diagnostic> check_subscribe(ThreadQual stream_thread, EffectQual callback_effect, bool strict = true,
                                          const Span& at = {}, const std::string& method = "subscribe");

struct CheckOptions {
  bool strict_any_subscribe = true;
};

struct LambdaRecord {
  const ast::Expr* expr = nullptr;
  Span span;
  EffectQual effect = EffectQual::Safe;
  bool poly_target = false;       // effect came from inference rather than the target
  bool direct_ui_call = false;    // body (nested lambdas excluded) calls a UI method
};

struct CheckResult {
  std::vector<Diagnostic> diagnostics;                        // sorted
  std::map<const ast::Expr*, ast::TypeRef> call_types;        // result type of every resolved call
  std::vector<LambdaRecord> lambdas;                          // in source order

  bool accepted() const { return diagnostics.empty(); }
};

/// Checks every method body of `p`. Expression pointers in the result point
/// into `p`, which must outlive it.
CheckResult check_program(const ResolvedProgram& p, const StubEnv& env, const CheckOptions& options = {});

}  // namespace rxcheck
