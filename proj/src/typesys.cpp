#include "rxcheck/typesys.hpp"

#include <algorithm>
#include <set>

#include "world.hpp"

namespace rxcheck {

using namespace ast;

bool thread_leq_rigid(ThreadQual a, ThreadQual b) {
  if (a == b || a == ThreadQual::Bottom || b == ThreadQual::Any) return true;
  if (a == ThreadQual::Poly || b == ThreadQual::Poly) return false;
  return thread_leq(a, b);
}

ThreadQual thread_join_rigid(ThreadQual a, ThreadQual b) {
  if (a == b) return a;
  if (a == ThreadQual::Bottom) return b;
  if (b == ThreadQual::Bottom) return a;
  if (a == ThreadQual::Poly || b == ThreadQual::Poly) return ThreadQual::Any;
  return thread_join(a, b);
}

namespace {

bool has_poly_thread(const TypeRef& t) {
  if (const auto* q = t.thread(); q && *q == ThreadQual::Poly) return true;
  return std::any_of(t.args.begin(), t.args.end(), has_poly_thread);
}

bool has_poly_effect(const TypeRef& t) {
  if (const auto* q = t.effect(); q && *q == EffectQual::PolyUI) return true;
  return std::any_of(t.args.begin(), t.args.end(), has_poly_effect);
}

bool has_type_var(const TypeRef& t) {
  if (t.kind == BaseKind::TypeVar) return true;
  return std::any_of(t.args.begin(), t.args.end(), has_type_var);
}

struct Unifier {
  std::map<std::string, TypeRef> vars;
  std::optional<ThreadQual> thread;
  std::optional<EffectQual> effect;
  bool thread_position = false;
  bool effect_position = false;

  void unify(const TypeRef& formal, const ValueType& actual) {
    if (!actual.known()) {
      thread_position = thread_position || has_poly_thread(formal);
      effect_position = effect_position || has_poly_effect(formal);
      return;
    }
    unify(formal, actual.type);
  }

  void unify(const TypeRef& formal, const TypeRef& actual) {
    if (formal.kind == BaseKind::TypeVar) {
      if (actual.kind != BaseKind::TypeVar || actual.name != formal.name) vars.try_emplace(formal.name, actual);
      return;
    }
    if (const auto* q = formal.thread(); q && *q == ThreadQual::Poly) {
      thread_position = true;
      if (const auto* a = actual.thread()) thread = thread ? thread_join_rigid(*thread, *a) : *a;
    }
    if (const auto* q = formal.effect(); q && *q == EffectQual::PolyUI) {
      effect_position = true;
      if (const auto* a = actual.effect()) effect = effect ? effect_join(*effect, *a) : *a;
    }
    if (formal.kind == actual.kind && formal.name == actual.name && formal.args.size() == actual.args.size()) {
      for (std::size_t i = 0; i < formal.args.size(); ++i) unify(formal.args[i], actual.args[i]);
    } else {
      for (const auto& a : formal.args) {
        thread_position = thread_position || has_poly_thread(a);
        effect_position = effect_position || has_poly_effect(a);
      }
    }
  }

  TypeRef apply(const TypeRef& t) const {
    if (t.kind == BaseKind::TypeVar) {
      auto it = vars.find(t.name);
      return it == vars.end() ? t : it->second;
    }
    TypeRef out = t;
    if (const auto* q = t.thread(); q && *q == ThreadQual::Poly && thread) out.qualifier = *thread;
    if (const auto* q = t.effect(); q && *q == EffectQual::PolyUI && effect) out.qualifier = *effect;
    for (auto& a : out.args) a = apply(a);
    return out;
  }
};

}  // namespace

CallTyping instantiate_call(const MethodSig& sig, const std::optional<ValueType>& receiver,
                            const std::vector<ValueType>& args) {
  Unifier u;
  if (receiver && !sig.is_static) u.unify(sig.receiver, *receiver);
  for (std::size_t i = 0; i < sig.params.size() && i < args.size(); ++i) u.unify(sig.params[i], args[i]);

  CallTyping out;
  bool needs_thread = has_poly_thread(sig.return_type);
  bool needs_effect = sig.effect == EffectQual::PolyUI || has_poly_effect(sig.return_type);
  for (const auto& p : sig.params) {
    needs_thread = needs_thread || has_poly_thread(p);
    needs_effect = needs_effect || has_poly_effect(p);
  }
  if (!sig.is_static) {
    needs_thread = needs_thread || has_poly_thread(sig.receiver);
    needs_effect = needs_effect || has_poly_effect(sig.receiver);
  }
  if (needs_thread && !u.thread) {
    // a position exists but every actual there was unknown: assume the worst
    if (!u.thread_position) {
      out.unbound = true;
      out.unbound_detail = "@PolyThread in " + sig.owner + "#" + sig.name + " has no receiver or argument to bind from";
    }
    u.thread = ThreadQual::Any;
  }
  if (needs_effect && !u.effect) {
    if (!u.effect_position) {
      out.unbound = true;
      out.unbound_detail = "@PolyUIEffect in " + sig.owner + "#" + sig.name + " has no receiver or argument to bind from";
    }
    u.effect = EffectQual::UI;
  }
  out.binding = PolyBinding{u.thread, u.effect};
  out.effect = sig.effect == EffectQual::PolyUI ? *u.effect : sig.effect;
  out.result = u.apply(sig.return_type);
  out.receiver = u.apply(sig.receiver);
  for (const auto& p : sig.params) out.params.push_back(u.apply(p));
  return out;
}

namespace {

std::string qname(const MethodSig& s) { return s.owner + "#" + s.name; }

void add_decl_related(Diagnostic& d, const Span& span, const std::string& what) {
  if (!span.file.empty()) d.related.push_back(RelatedInfo{span, what});
}

}  // namespace

std::optional<Diagnostic> check_call_effect(EffectQual caller_effect, const MethodSig& callee, bool same_receiver,
                                            const Span& at, const std::string& caller) {
  const std::string who = caller.empty() ? "caller" : caller;
  if (caller_effect == EffectQual::PolyUI && callee.effect == EffectQual::PolyUI) {
    if (same_receiver) return std::nullopt;
    Diagnostic d = make_diagnostic(codes::kEffectPolyReceiver, at,
                                   "@PolyUIEffect " + who + " calls @PolyUIEffect method " + qname(callee) +
                                       " on a different receiver; polymorphic effects only agree on the same receiver");
    add_decl_related(d, callee.span, "callee declared here");
    return d;
  }
  if (effect_leq(callee.effect, caller_effect)) return std::nullopt;
  Diagnostic d = make_diagnostic(codes::kEffectTransitivity, at,
                                 std::string(annotation_name(caller_effect)) + " " + who + " calls " +
                                     std::string(annotation_name(callee.effect)) + " method " + qname(callee));
  add_decl_related(d, callee.span, "callee declared here");
  return d;
}

std::optional<Diagnostic> check_override(const MethodSig& sub, const MethodSig& super_, const Span& at) {
  if (effect_leq(sub.effect, super_.effect)) return std::nullopt;
  Diagnostic d = make_diagnostic(codes::kEffectInheritance, at.file.empty() ? sub.span : at,
                                 std::string(annotation_name(sub.effect)) + " method " + qname(sub) + " overrides " +
                                     std::string(annotation_name(super_.effect)) + " method " + qname(super_));
  add_decl_related(d, super_.span, "overridden method declared here");
  return d;
}

std::optional<Diagnostic> check_subscribe(ThreadQual stream_thread, EffectQual callback_effect, bool strict,
                                          const Span& at, const std::string& method) {
  if (callback_effect == EffectQual::Safe) return std::nullopt;
  if (stream_thread == ThreadQual::Poly) stream_thread = ThreadQual::Any;
  const bool ok = stream_thread == ThreadQual::UI || stream_thread == ThreadQual::Bottom ||
                  (!strict && stream_thread == ThreadQual::Any);
  if (ok) return std::nullopt;
  const std::string thread(annotation_name(stream_thread));
  std::string msg = method == "subscribe"
                        ? "Subscribing a callback with @UIEffect to an observable scheduled on " + thread
                        : "Passing a callback with @UIEffect to " + method + " on an observable scheduled on " + thread;
  msg += "; @UIEffect effects are limited to @UIThread observables";
  return make_diagnostic(codes::kThreadViolation, at, std::move(msg));
}

// ---------------------------------------------------------------------------

namespace {

using detail::World;

std::string describe(const TypeRef& t) { return t.kind == BaseKind::Void ? "void" : format_type(t); }

std::string describe(const ValueType& v) {
  switch (v.kind) {
    case ValueType::Kind::Value: return describe(v.type);
    case ValueType::Kind::ClassRef: return "class " + v.type.name;
    case ValueType::Kind::Null: return "null";
    case ValueType::Kind::Unknown: break;
  }
  return "<unknown>";
}

bool same_element(const TypeRef& a, const TypeRef& b) {
  if (a.kind == BaseKind::TypeVar || b.kind == BaseKind::TypeVar) return true;
  if (a.name != b.name || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_element(a.args[i], b.args[i])) return false;
  }
  return true;
}

int primitive_rank(const std::string& n) {
  if (n == "int") return 1;
  if (n == "long") return 2;
  if (n == "double") return 3;
  return 0;
}

struct Frame {
  EffectQual effect = EffectQual::Safe;
  std::string where;
  ValueType this_type;
  const ClassDecl* cls = nullptr;          // enclosing user class
  std::optional<TypeRef> return_target;    // absent: unchecked
  std::vector<ValueType>* returns = nullptr;
};

class Checker {
 public:
  Checker(const ResolvedProgram& p, const StubEnv& env, const CheckOptions& opts)
      : program_(p), world_(p, env), opts_(opts) {}

  CheckResult run() {
    for (const auto& pkg : program_.program.packages) {
      for (const auto& cls : pkg.classes) check_class(pkg, cls);
    }
    sort_diagnostics(result_.diagnostics);
    std::stable_sort(result_.lambdas.begin(), result_.lambdas.end(),
                     [](const LambdaRecord& a, const LambdaRecord& b) { return a.span < b.span; });
    return std::move(result_);
  }

 private:
  // --- diagnostics -------------------------------------------------------
  void report(Diagnostic d) {
    if (probing_ == 0) result_.diagnostics.push_back(std::move(d));
  }
  void report(std::string_view code, const Span& span, std::string msg) {
    report(make_diagnostic(code, span, std::move(msg)));
  }

  // --- declarations ------------------------------------------------------
  void check_class(const PackageDecl& pkg, const ClassDecl& cls) {
    Frame init;
    init.effect = cls.class_effect == ClassEffect::UIType || pkg.ui_package ? EffectQual::UI : EffectQual::Safe;
    init.where = "field initializer in " + cls.name.name;
    init.this_type = ValueType::of(world_.implicit_receiver(cls.name.name));
    init.cls = &cls;
    for (const auto& f : cls.fields) {
      if (!f.init) continue;
      with_frame(init, [&] {
        ValueType v = type_expr(*f.init, &f.type);
        check_assignable(v, f.type, f.init->span, "field " + f.name.name);
      });
    }
    for (const auto& m : cls.methods) {
      const MethodSig& sig = world_.sig_of(m);
      check_overrides(cls, m, sig);
      if (!m.body) continue;
      Frame fr;
      fr.effect = sig.effect;
      fr.where = "method " + sig.owner + "#" + sig.name;
      fr.this_type = ValueType::of(sig.receiver);
      fr.cls = &cls;
      fr.return_target = m.return_type;
      check_body(fr, m, *m.body);
    }
  }

  void check_overrides(const ClassDecl& cls, const MethodDecl& m, const MethodSig& sig) {
    if (sig.is_static) return;
    const World::Found sup = world_.find_method(cls.name.name, sig.name, sig.arity(), /*skip_self=*/true);
    if (!sup.sig || sup.sig->is_static) return;
    MethodSig super_inst = *sup.sig;
    if (super_inst.effect == EffectQual::PolyUI) {
      super_inst.effect = poly_super_effect(cls, super_inst.owner);
    }
    if (auto d = check_override(sig, super_inst, m.name.span)) report(std::move(*d));
  }

  /// Effect a polymorphic supertype method has as seen from `cls`.
  EffectQual poly_super_effect(const ClassDecl& cls, const std::string& super_owner) const {
    if (cls.class_effect == ClassEffect::PolyUIType) return EffectQual::PolyUI;
    auto from_ref = [&](const TypeRef& ref) -> std::optional<EffectQual> {
      if (ref.name != super_owner) return std::nullopt;
      if (const auto* q = ref.effect()) return *q;
      return EffectQual::Safe;
    };
    if (cls.superclass) {
      if (auto e = from_ref(*cls.superclass)) return *e;
    }
    for (const auto& i : cls.interfaces) {
      if (auto e = from_ref(i)) return *e;
    }
    return EffectQual::Safe;
  }

  void check_body(Frame fr, const MethodDecl& m, const std::vector<Stmt>& body) {
    with_frame(fr, [&] {
      push_scope();
      for (const auto& p : m.params) declare(p.name, ValueType::of(p.type));
      for (const auto& s : body) stmt(s);
      pop_scope();
    });
  }

  template <class F>
  void with_frame(Frame fr, F&& f) {
    frames_.push_back(std::move(fr));
    f();
    frames_.pop_back();
  }
  Frame& frame() { return frames_.back(); }

  // --- scopes ------------------------------------------------------------
  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }
  void declare(const std::string& name, ValueType t) { scopes_.back()[name] = std::move(t); }

  const ValueType* local(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (auto f = it->find(name); f != it->end()) return &f->second;
    }
    return nullptr;
  }

  // --- statements --------------------------------------------------------
  void stmts(const std::vector<Stmt>& body) {
    push_scope();
    for (const auto& s : body) stmt(s);
    pop_scope();
  }

  void stmt(const Stmt& s) {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, LocalDecl>) {
            ValueType v = type_expr(n.init, &n.type);
            check_assignable(v, n.type, n.init.span, "local " + n.name.name);
            declare(n.name.name, ValueType::of(n.type));
          } else if constexpr (std::is_same_v<N, ExprStmt>) {
            type_expr(n.expr, nullptr);
          } else if constexpr (std::is_same_v<N, Assign>) {
            ValueType target = type_expr(n.target, nullptr);
            if (target.known()) {
              ValueType v = type_expr(n.value, &target.type);
              check_assignable(v, target.type, n.value.span, "assignment");
            } else {
              type_expr(n.value, nullptr);
            }
          } else if constexpr (std::is_same_v<N, Return>) {
            const std::optional<TypeRef> target = frame().return_target;
            ValueType v = ValueType::unknown();
            if (n.value) {
              const bool checked = target && target->kind != BaseKind::Void && !has_type_var(*target);
              v = type_expr(*n.value, checked ? &*target : nullptr);
              if (checked) check_assignable(v, *target, n.value->span, "return value");
            }
            if (frame().returns && n.value) frame().returns->push_back(v);
          } else if constexpr (std::is_same_v<N, If>) {
            type_expr(n.cond, nullptr);
            stmts(n.then_body);
            if (n.else_body) stmts(*n.else_body);
          } else {
            stmts(n.body);
          }
        },
        s.node);
  }

  // --- compatibility -----------------------------------------------------
  std::optional<std::string> incompatibility(const ValueType& actual, const TypeRef& formal) const {
    if (actual.kind == ValueType::Kind::Unknown || actual.kind == ValueType::Kind::Null) return std::nullopt;
    if (actual.kind == ValueType::Kind::ClassRef) return "class " + actual.type.name + " is not a value";
    const TypeRef& a = actual.type;
    const TypeRef& f = formal;
    if (f.kind == BaseKind::TypeVar || a.kind == BaseKind::TypeVar) return std::nullopt;
    auto mismatch = [&] { return describe(a) + " is not compatible with " + describe(f); };
    if (a.kind == BaseKind::Void || f.kind == BaseKind::Void) {
      return a.kind == f.kind ? std::nullopt : std::optional<std::string>(mismatch());
    }
    if (a.kind == BaseKind::Primitive || f.kind == BaseKind::Primitive) {
      if (a.kind != f.kind) return mismatch();
      if (a.name == f.name) return std::nullopt;
      const int ra = primitive_rank(a.name);
      const int rf = primitive_rank(f.name);
      if (ra != 0 && rf != 0 && ra < rf) return std::nullopt;
      return mismatch();
    }
    if (f.kind == BaseKind::Named && f.name == "Object") return std::nullopt;
    if (a.kind == BaseKind::Stream || a.kind == BaseKind::Scheduler || f.kind == BaseKind::Stream ||
        f.kind == BaseKind::Scheduler) {
      if (a.kind != f.kind) return mismatch();
      if (a.kind == BaseKind::Stream && (a.args.size() != f.args.size() || !same_element(a, f))) return mismatch();
      const ThreadQual* qa = a.thread();
      const ThreadQual* qf = f.thread();
      if (qa && qf && !thread_leq_rigid(*qa, *qf)) {
        return std::string(annotation_name(*qa)) + " " + a.name + " is not a subtype of " +
               std::string(annotation_name(*qf)) + " " + f.name;
      }
      return std::nullopt;
    }
    if (!world_.is_subclass(a.name, f.name)) return mismatch();
    const EffectQual* ea = a.effect();
    const EffectQual* ef = f.effect();
    if (ea && ef && !effect_leq(*ea, *ef)) {
      return std::string(type_use_name(*ea)) + " " + a.name + " is not a subtype of " +
             std::string(type_use_name(*ef)) + " " + f.name;
    }
    return std::nullopt;
  }

  void check_assignable(const ValueType& v, const TypeRef& target, const Span& at, const std::string& what) {
    if (auto why = incompatibility(v, target)) report(codes::kTypeArgument, at, "incompatible " + what + ": " + *why);
  }

  // --- expressions -------------------------------------------------------
  ValueType type_expr(const Expr& e, const TypeRef* target) {
    return std::visit([&](const auto& n) { return expr(e, n, target); }, e.node);
  }

  ValueType expr(const Expr&, const Literal& l, const TypeRef*) {
    switch (l.kind) {
      case Literal::Kind::Int: return ValueType::of(primitive_type("int"));
      case Literal::Kind::Long: return ValueType::of(primitive_type("long"));
      case Literal::Kind::Double: return ValueType::of(primitive_type("double"));
      case Literal::Kind::Bool: return ValueType::of(primitive_type("boolean"));
      case Literal::Kind::String: return ValueType::of(named_type("String"));
      case Literal::Kind::Null: break;
    }
    return ValueType{ValueType::Kind::Null, {}};
  }

  ValueType expr(const Expr&, const VarRef& v, const TypeRef*) {
    if (const ValueType* t = local(v.name)) return *t;
    if (frame().cls) {
      if (auto f = world_.find_field(frame().cls->name.name, v.name)) return ValueType::of(*f);
    }
    if (world_.class_exists(v.name)) return ValueType{ValueType::Kind::ClassRef, named_type(v.name)};
    return ValueType::unknown();
  }

  ValueType expr(const Expr&, const This&, const TypeRef*) { return frame().this_type; }

  ValueType expr(const Expr&, const FieldRef& f, const TypeRef*) {
    ValueType obj = type_expr(*f.object, nullptr);
    if (obj.kind == ValueType::Kind::ClassRef) {
      if (auto t = world_.find_field(obj.type.name, f.name)) return ValueType::of(*t);
      // library constants such as TimeUnit.MILLISECONDS
      if (!world_.user_class(obj.type.name)) return ValueType::of(named_type(obj.type.name));
      return ValueType::unknown();
    }
    if (obj.known() && obj.type.kind == BaseKind::Named) {
      if (auto t = world_.find_field(obj.type.name, f.name)) {
        Unifier u;
        u.unify(world_.implicit_receiver(obj.type.name), obj.type);
        return ValueType::of(u.apply(*t));
      }
    }
    return ValueType::unknown();
  }

  ValueType expr(const Expr&, const NewObject& n, const TypeRef*) {
    for (const auto& a : n.args) type_expr(a, nullptr);
    return ValueType::of(n.type);
  }

  ValueType expr(const Expr&, const AnonClass& n, const TypeRef*) {
    for (const auto& a : n.args) type_expr(a, nullptr);
    const EffectQual instance = n.type.effect() ? *n.type.effect() : EffectQual::Safe;
    for (const auto& m : n.methods) {
      MethodSig sig;
      sig.owner = "anonymous " + n.type.name;
      sig.name = m.name.name;
      sig.effect = m.effect.value_or(instance);
      sig.span = m.name.span;
      for (const auto& p : m.params) sig.params.push_back(p.type);
      const World::Found sup = world_.find_method(n.type.name, m.name.name, m.params.size());
      if (sup.sig) {
        MethodSig super_inst = *sup.sig;
        if (super_inst.effect == EffectQual::PolyUI) super_inst.effect = instance;
        if (auto d = check_override(sig, super_inst, m.name.span)) report(std::move(*d));
      }
      if (!m.body) continue;
      Frame fr = frame();
      fr.effect = sig.effect;
      fr.where = "method " + sig.owner + "#" + sig.name;
      fr.this_type = ValueType::of(n.type);
      fr.return_target = m.return_type;
      fr.returns = nullptr;
      ui_flags_.push_back(false);  // calls in here do not count for the enclosing lambda
      check_body(fr, m, *m.body);
      ui_flags_.pop_back();
    }
    return ValueType::of(n.type);
  }

  ValueType expr(const Expr& e, const Lambda& lam, const TypeRef* target) {
    const MethodSig* sam = nullptr;
    if (target && target->kind == BaseKind::Named) sam = world_.sam(target->name);
    if (!sam) {
      if (target && target->kind != BaseKind::TypeVar) {
        report(codes::kUnknownInterface, e.span,
               "cannot infer an effect for this lambda: " + describe(*target) + " is not a functional interface");
      }
      // no usable target: check the body without constraining its effect
      lambda_body(lam, {}, std::nullopt, EffectQual::UI);
      return ValueType::unknown();
    }

    // parameters and return type as seen through the target's type arguments
    Unifier view;
    view.unify(world_.implicit_receiver(target->name), *target);
    std::vector<ValueType> params;
    for (const auto& p : sam->params) {
      TypeRef t = view.apply(p);
      params.push_back(has_type_var(t) && t.kind == BaseKind::TypeVar ? ValueType::unknown() : ValueType::of(t));
    }
    if (params.size() != lam.params.size()) {
      report(codes::kTypeArgument, e.span,
             "lambda takes " + std::to_string(lam.params.size()) + " parameter(s) but " + sam->owner + "#" +
                 sam->name + " expects " + std::to_string(params.size()));
    }
    std::optional<TypeRef> ret = view.apply(sam->return_type);
    if (has_type_var(*ret)) ret.reset();

    EffectQual effect = sam->effect;
    bool inferred = false;
    if (const EffectQual* q = target->effect()) {
      if (*q == EffectQual::PolyUI) {
        inferred = true;
        ++probing_;
        const bool ui = lambda_body(lam, params, ret, EffectQual::UI).second;
        --probing_;
        effect = ui ? EffectQual::UI : EffectQual::Safe;
      } else {
        effect = *q;
      }
    }

    std::size_t slot = 0;
    if (probing_ == 0) {
      slot = result_.lambdas.size();
      result_.lambdas.push_back(LambdaRecord{&e, e.span, effect, inferred, false});
    }
    auto [body_type, ui_call] = lambda_body(lam, params, ret, effect);
    if (probing_ == 0) result_.lambdas[slot].direct_ui_call = ui_call;

    TypeRef actual = *target;
    actual.qualifier = effect;
    if (sam->return_type.kind == BaseKind::TypeVar && body_type.known()) {
      const auto tps = world_.type_params(target->name);
      auto it = std::find(tps.begin(), tps.end(), sam->return_type.name);
      if (it != tps.end()) {
        const std::size_t i = static_cast<std::size_t>(it - tps.begin());
        if (i < actual.args.size() && has_type_var(actual.args[i])) actual.args[i] = body_type.type;
      }
    }
    return ValueType::of(std::move(actual));
  }

  /// Checks a lambda body under `effect`; returns its result type and
  /// whether it directly calls a UI method.
  std::pair<ValueType, bool> lambda_body(const Lambda& lam, const std::vector<ValueType>& params,
                                         const std::optional<TypeRef>& ret, EffectQual effect) {
    Frame fr = frame();
    fr.effect = effect;
    fr.where = "lambda";
    fr.return_target = ret ? ret : std::optional<TypeRef>{};
    std::vector<ValueType> returns;
    fr.returns = &returns;
    ValueType result = ValueType::unknown();
    ui_flags_.push_back(false);
    with_frame(fr, [&] {
      push_scope();
      for (std::size_t i = 0; i < lam.params.size(); ++i) {
        declare(lam.params[i].name, i < params.size() ? params[i] : ValueType::unknown());
      }
      if (lam.expr_body) {
        const bool checked = ret && ret->kind != BaseKind::Void;
        result = type_expr(**lam.expr_body, checked ? &*ret : nullptr);
        if (checked) check_assignable(result, *ret, (*lam.expr_body)->span, "lambda result");
      } else {
        for (const auto& s : lam.block_body) stmt(s);
        for (const auto& r : returns) {
          if (r.known()) {
            result = r;
            break;
          }
        }
      }
      pop_scope();
    });
    const bool ui = ui_flags_.back();
    ui_flags_.pop_back();
    return {result, ui};
  }

  ValueType expr(const Expr& e, const MethodCall& call, const TypeRef*) {
    const Span at = cover(call.name_span, e.span);
    std::optional<ValueType> recv;
    bool same_receiver = false;
    std::string owner;
    if (!call.receiver) {
      same_receiver = true;
      if (frame().cls) {
        owner = frame().cls->name.name;
        recv = ValueType::of(world_.implicit_receiver(owner));
        if (frame().cls && frame().this_type.known() && frame().this_type.type.name == owner) recv = frame().this_type;
      }
    } else {
      const Expr& r = **call.receiver;
      ValueType rt = type_expr(r, nullptr);
      same_receiver = r.as<This>() != nullptr;
      if (rt.kind == ValueType::Kind::ClassRef) {
        owner = rt.type.name;
      } else if (rt.known()) {
        switch (rt.type.kind) {
          case BaseKind::Stream: owner = "Observable"; break;
          case BaseKind::Scheduler: owner = "Scheduler"; break;
          case BaseKind::Named: owner = rt.type.name; break;
          case BaseKind::TypeVar: break;
          default:
            report(codes::kUnknownMethod, at, "cannot call " + call.name + " on a value of type " + describe(rt));
            return type_args_untargeted(call);
        }
        recv = rt;
      } else if (rt.kind == ValueType::Kind::Null) {
        report(codes::kUnknownMethod, at, "cannot call " + call.name + " on null");
        return type_args_untargeted(call);
      }
      if (owner.empty()) {
        if (rt.known()) return type_args_untargeted(call);  // generic element: nothing to resolve against
        report(codes::kUnknownMethod, at, "cannot resolve method " + call.name + ": the receiver's type is unknown");
        return type_args_untargeted(call);
      }
    }
    if (owner.empty()) {
      report(codes::kUnknownMethod, at, "cannot resolve method " + call.name);
      return type_args_untargeted(call);
    }

    const World::Found found = world_.find_method(owner, call.name, call.args.size());
    if (!found.sig) {
      report(codes::kUnknownMethod, at,
             "cannot resolve method " + owner + "#" + call.name + " with " + std::to_string(call.args.size()) +
                 " argument(s)");
      return type_args_untargeted(call);
    }
    const MethodSig& sig = *found.sig;
    if (!sig.is_static && !recv) {
      report(codes::kUnknownMethod, at, "instance method " + owner + "#" + call.name + " called without a receiver");
      return type_args_untargeted(call);
    }
    if (sig.is_static) recv.reset();

    // element types from the receiver shape each argument's target
    Unifier pre;
    if (recv) pre.unify(sig.receiver, *recv);
    std::vector<ValueType> args;
    for (std::size_t i = 0; i < call.args.size(); ++i) {
      TypeRef target = pre.apply(sig.params[i]);
      args.push_back(type_expr(call.args[i], &target));
    }

    CallTyping ct = instantiate_call(sig, recv, args);
    if (ct.unbound) report(codes::kPolyUnbound, at, ct.unbound_detail);
    if (recv && !sig.is_static) {
      if (auto why = incompatibility(*recv, ct.receiver)) {
        report(codes::kTypeArgument, at, "receiver of " + sig.owner + "#" + sig.name + ": " + *why);
      }
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (auto why = incompatibility(args[i], ct.params[i])) {
        std::string pname = i < sig.param_names.size() ? sig.param_names[i] : std::to_string(i + 1);
        report(codes::kTypeArgument, call.args[i].span,
               "argument " + pname + " of " + sig.owner + "#" + sig.name + ": " + *why);
      }
    }

    MethodSig inst = sig;
    inst.effect = ct.effect;
    if (auto d = check_call_effect(frame().effect, inst, same_receiver, at, frame().where)) report(std::move(*d));
    if (ct.effect == EffectQual::UI && !ui_flags_.empty()) ui_flags_.back() = true;

    // callbacks handed to a stream run on that stream's thread
    if (recv && recv->known() && recv->type.kind == BaseKind::Stream) {
      std::optional<EffectQual> cb;
      for (std::size_t i = 0; i < sig.params.size(); ++i) {
        const EffectQual* fq = sig.params[i].effect();
        if (!fq || *fq != EffectQual::PolyUI) continue;
        EffectQual a = args[i].effect() ? *args[i].effect() : EffectQual::UI;
        if (a == EffectQual::PolyUI) a = EffectQual::UI;
        cb = cb ? effect_join(*cb, a) : a;
      }
      const ThreadQual* th = recv->type.thread();
      if (cb && th) {
        if (auto d = check_subscribe(*th, *cb, opts_.strict_any_subscribe, at, sig.name)) report(std::move(*d));
      }
    }

    if (probing_ == 0) result_.call_types[&e] = ct.result;
    return ValueType::of(ct.result);
  }

  ValueType type_args_untargeted(const MethodCall& call) {
    for (const auto& a : call.args) type_expr(a, nullptr);
    return ValueType::unknown();
  }

  const ResolvedProgram& program_;
  World world_;
  CheckOptions opts_;
  CheckResult result_;
  std::vector<Frame> frames_;
  std::vector<std::map<std::string, ValueType>> scopes_;
  std::vector<bool> ui_flags_;
  int probing_ = 0;
};

}  // namespace

CheckResult check_program(const ResolvedProgram& p, const StubEnv& env, const CheckOptions& options) {
  return Checker(p, env, options).run();
}

}  // namespace rxcheck
