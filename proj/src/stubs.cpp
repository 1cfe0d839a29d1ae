#include "rxcheck/stubs.hpp"

#include <algorithm>
#include <set>

namespace rxcheck {

using ast::BaseKind;
using ast::ClassEffect;
using ast::TypeRef;

bool same_signature(const MethodSig& a, const MethodSig& b) {
  return a.owner == b.owner && a.name == b.name && a.effect == b.effect && a.receiver == b.receiver &&
         a.params == b.params && a.return_type == b.return_type && a.is_static == b.is_static &&
         a.type_params == b.type_params && a.owner_annotation == b.owner_annotation;
}

std::string format_type(const TypeRef& t) {
  std::string out;
  if (const auto* th = t.thread()) {
    out += annotation_name(*th);
    out += ' ';
  } else if (const auto* ef = t.effect()) {
    out += type_use_name(*ef);
    out += ' ';
  }
  out += t.name;
  if (!t.args.empty()) {
    out += '<';
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (i) out += ", ";
      out += format_type(t.args[i]);
    }
    out += '>';
  }
  return out;
}

std::string format_signature(const MethodSig& sig) {
  std::string out;
  if (sig.is_static) out += "static ";
  out += annotation_name(sig.effect);
  out += ' ';
  if (!sig.type_params.empty()) {
    out += '<';
    for (std::size_t i = 0; i < sig.type_params.size(); ++i) {
      if (i) out += ", ";
      out += sig.type_params[i];
    }
    out += "> ";
  }
  out += format_type(sig.return_type) + " " + sig.owner + "#" + sig.name + "(";
  bool first = true;
  if (!sig.is_static) {
    out += format_type(sig.receiver) + " this";
    first = false;
  }
  for (const auto& p : sig.params) {
    if (!first) out += ", ";
    out += format_type(p);
    first = false;
  }
  out += ")";
  if (sig.owner_annotation != ClassEffect::None) {
    out += " in ";
    out += ast::to_string(sig.owner_annotation);
  }
  return out;
}

namespace {

bool contains_poly_thread(const TypeRef& t) {
  if (const auto* th = t.thread(); th && *th == ThreadQual::Poly) return true;
  return std::any_of(t.args.begin(), t.args.end(), contains_poly_thread);
}

void placement_problems(const TypeRef& t, std::vector<std::string>& out) {
  const bool thread_base = t.kind == BaseKind::Stream || t.kind == BaseKind::Scheduler;
  if (t.thread() && !thread_base) out.push_back("thread qualifier on non-stream type " + t.name);
  if (t.effect() && (thread_base || t.kind == BaseKind::Void || t.kind == BaseKind::Primitive)) {
    out.push_back("effect qualifier on non-callback type " + t.name);
  }
  if (thread_base && !t.thread()) out.push_back("unqualified stream/scheduler type " + t.name);
  for (const auto& a : t.args) placement_problems(a, out);
}

}  // namespace

std::vector<std::string> signature_problems(const MethodSig& sig) {
  std::vector<std::string> out;
  if (contains_poly_thread(sig.return_type)) {
    bool bound = contains_poly_thread(sig.receiver) && !sig.is_static;
    for (const auto& p : sig.params) bound = bound || contains_poly_thread(p);
    if (!bound) {
      out.push_back(sig.owner + "#" + sig.name +
                    ": @PolyThread in the return type needs @PolyThread on the receiver or a parameter");
    }
  }
  if (!sig.is_static) placement_problems(sig.receiver, out);
  for (const auto& p : sig.params) placement_problems(p, out);
  placement_problems(sig.return_type, out);
  return out;
}

bool StubClass::same_shape(const StubClass& other) const {
  return name == other.name && is_interface == other.is_interface && annotation == other.annotation &&
         superclass == other.superclass && interfaces == other.interfaces && type_params == other.type_params;
}

const MethodSig* StubEnv::lookup(std::string_view owner, std::string_view name, std::size_t arity) const {
  auto it = methods_.find(MethodKey{std::string(owner), std::string(name), arity});
  return it == methods_.end() ? nullptr : &it->second;
}

const StubClass* StubEnv::find_class(std::string_view name) const {
  auto it = classes_.find(name);
  return it == classes_.end() ? nullptr : &it->second;
}

void StubEnv::put_method(MethodSig sig) {
  MethodKey key{sig.owner, sig.name, sig.arity()};
  methods_.insert_or_assign(std::move(key), std::move(sig));
}

void StubEnv::put_class(StubClass cls) {
  std::string key = cls.name;
  classes_.insert_or_assign(std::move(key), std::move(cls));
}

std::vector<std::string> StubEnv::annotated_classes() const {
  std::vector<std::string> out;
  for (const auto& [name, cls] : classes_) {
    if (cls.annotation != ClassEffect::None) out.push_back(name);
  }
  return out;
}

bool operator==(const StubEnv& a, const StubEnv& b) {
  if (a.methods_.size() != b.methods_.size() || a.classes_.size() != b.classes_.size()) return false;
  for (auto ia = a.methods_.begin(), ib = b.methods_.begin(); ia != a.methods_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !same_signature(ia->second, ib->second)) return false;
  }
  for (auto ia = a.classes_.begin(), ib = b.classes_.begin(); ia != a.classes_.end(); ++ia, ++ib) {
    if (!ia->second.same_shape(ib->second)) return false;
  }
  return true;
}

MergeResult merge(const StubEnv& env, const std::vector<MethodSig>& extra) {
  MergeResult result{env, {}};
  std::map<MethodKey, const MethodSig*> seen;
  for (const auto& sig : extra) {
    MethodKey key{sig.owner, sig.name, sig.arity()};
    auto [it, inserted] = seen.emplace(key, &sig);
    if (!inserted) {
      if (!same_signature(*it->second, sig)) {
        Diagnostic d = make_diagnostic(codes::kStubConflict, sig.span,
                                       "conflicting stub signatures for " + sig.owner + "#" + sig.name + "/" +
                                           std::to_string(sig.arity()) + ": " + format_signature(*it->second) +
                                           " vs " + format_signature(sig));
        d.related.push_back(RelatedInfo{it->second->span, "first declared here"});
        result.diagnostics.push_back(std::move(d));
      }
      continue;
    }
    result.env.put_method(sig);
  }
  sort_diagnostics(result.diagnostics);
  return result;
}

MergeResult merge(const StubEnv& env, const StubFile& extra) {
  MergeResult result = merge(env, extra.methods);
  for (const auto& cls : extra.classes) {
    StubClass merged = cls;
    if (const StubClass* existing = env.find_class(cls.name)) {
      if (merged.annotation == ClassEffect::None) merged.annotation = existing->annotation;
      if (!merged.superclass) merged.superclass = existing->superclass;
      if (merged.type_params.empty()) merged.type_params = existing->type_params;
      for (const auto& i : existing->interfaces) {
        if (std::find(merged.interfaces.begin(), merged.interfaces.end(), i) == merged.interfaces.end()) {
          merged.interfaces.push_back(i);
        }
      }
    }
    result.env.put_class(std::move(merged));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Built-in model. stubs/builtin.astub is the same model in stub syntax; the
// test suite checks that both agree.

namespace {

TypeRef tvar(std::string name) { return TypeRef{BaseKind::TypeVar, std::move(name), {}, std::nullopt}; }

TypeRef obs(ThreadQual q, TypeRef elem = tvar("T")) { return ast::stream_type(q, std::move(elem)); }

TypeRef callback(std::string name, std::vector<TypeRef> args, EffectQual q) {
  TypeRef t = ast::named_type(std::move(name), std::move(args));
  t.qualifier = q;
  return t;
}

struct Builder {
  StubEnv env;

  void cls(std::string name, ClassEffect annotation = ClassEffect::None, bool is_interface = false,
           std::vector<std::string> type_params = {}, std::optional<std::string> superclass = std::nullopt) {
    StubClass c;
    c.name = std::move(name);
    c.annotation = annotation;
    c.is_interface = is_interface;
    c.type_params = std::move(type_params);
    c.superclass = std::move(superclass);
    env.put_class(std::move(c));
  }

  TypeRef implicit_receiver(const std::string& owner) const {
    const StubClass* c = env.find_class(owner);
    std::vector<TypeRef> args;
    if (c) {
      for (const auto& tp : c->type_params) args.push_back(tvar(tp));
    }
    if (owner == "Observable") return ast::stream_type(ThreadQual::Any, args.empty() ? tvar("T") : args[0]);
    if (owner == "Scheduler") return ast::scheduler_type(ThreadQual::Any);
    TypeRef t = ast::named_type(owner, std::move(args));
    if (c && c->annotation == ClassEffect::PolyUIType) t.qualifier = EffectQual::PolyUI;
    return t;
  }

  void method(const std::string& owner, std::string name, std::optional<EffectQual> effect, TypeRef ret,
              std::vector<std::pair<TypeRef, std::string>> params, std::optional<TypeRef> receiver = std::nullopt,
              bool is_static = false, std::vector<std::string> type_params = {}) {
    const StubClass* c = env.find_class(owner);
    MethodSig sig;
    sig.owner = owner;
    sig.name = std::move(name);
    sig.owner_annotation = c ? c->annotation : ClassEffect::None;
    if (effect) {
      sig.effect = *effect;
    } else if (sig.owner_annotation == ClassEffect::UIType) {
      sig.effect = EffectQual::UI;
    } else if (sig.owner_annotation == ClassEffect::PolyUIType) {
      sig.effect = EffectQual::PolyUI;
    }
    sig.receiver = receiver ? *receiver : implicit_receiver(owner);
    for (auto& [type, pname] : params) {
      sig.params.push_back(std::move(type));
      sig.param_names.push_back(std::move(pname));
    }
    sig.return_type = std::move(ret);
    sig.is_static = is_static;
    sig.type_params = std::move(type_params);
    env.put_method(std::move(sig));
  }
};

}  // namespace

StubEnv builtin_env() {
  using ast::named_type;
  using ast::primitive_type;
  Builder b;

  // java.lang and friends
  b.cls("Object");
  b.cls("String");
  b.cls("Throwable");
  b.cls("Message");
  b.cls("TimeUnit");

  // Callback interfaces: one abstract method each, effect-polymorphic.
  b.cls("Runnable", ClassEffect::PolyUIType, true);
  b.cls("Action", ClassEffect::PolyUIType, true);
  b.cls("Callback", ClassEffect::PolyUIType, true);
  b.cls("Consumer", ClassEffect::PolyUIType, true, {"T"});
  b.cls("Observer", ClassEffect::PolyUIType, true, {"T"});
  b.cls("Predicate", ClassEffect::PolyUIType, true, {"T"});
  b.cls("Function", ClassEffect::PolyUIType, true, {"T", "R"});
  const auto poly = EffectQual::PolyUI;
  b.method("Runnable", "run", poly, ast::void_type(), {});
  b.method("Action", "run", poly, ast::void_type(), {});
  b.method("Callback", "handleMessage", poly, primitive_type("boolean"), {{named_type("Message"), "m"}});
  b.method("Consumer", "accept", poly, ast::void_type(), {{tvar("T"), "value"}});
  b.method("Observer", "onNext", poly, ast::void_type(), {{tvar("T"), "value"}});
  b.method("Predicate", "test", poly, primitive_type("boolean"), {{tvar("T"), "value"}});
  b.method("Function", "apply", poly, tvar("R"), {{tvar("T"), "value"}});

  // Schedulers
  b.cls("Scheduler");
  b.cls("AndroidSchedulers");
  b.cls("Schedulers");
  b.method("AndroidSchedulers", "mainThread", std::nullopt, ast::scheduler_type(ThreadQual::UI), {}, std::nullopt,
           true);
  b.method("Schedulers", "computation", std::nullopt, ast::scheduler_type(ThreadQual::Comp), {}, std::nullopt,
           true);
  b.method("Schedulers", "io", std::nullopt, ast::scheduler_type(ThreadQual::Comp), {}, std::nullopt, true);

  // Observable operators
  b.cls("Observable", ClassEffect::None, false, {"T"});
  const auto P = ThreadQual::Poly;
  const auto safe = EffectQual::Safe;
  b.method("Observable", "filter", std::nullopt, obs(P),
           {{callback("Predicate", {tvar("T")}, safe), "predicate"}}, obs(P));
  b.method("Observable", "map", std::nullopt, obs(P, tvar("R")),
           {{callback("Function", {tvar("T"), tvar("R")}, safe), "mapper"}}, obs(P), false, {"R"});
  b.method("Observable", "take", std::nullopt, obs(P), {{primitive_type("int"), "k"}}, obs(P));
  b.method("Observable", "onErrorReturn", std::nullopt, obs(P),
           {{callback("Function", {named_type("Throwable"), tvar("T")}, poly), "valueSupplier"}}, obs(P));
  b.method("Observable", "delay", std::nullopt, obs(ThreadQual::Comp),
           {{primitive_type("long"), "delay"}, {named_type("TimeUnit"), "unit"}});
  // receiver stays implicit (@AnyThread): the result follows the scheduler only
  b.method("Observable", "observeOn", std::nullopt, obs(P), {{ast::scheduler_type(P), "thread"}});
  b.method("Observable", "switchMap", std::nullopt, obs(ThreadQual::Any, tvar("R")),
           {{callback("Function", {tvar("T"), obs(ThreadQual::Any, tvar("R"))}, safe), "mapper"}}, std::nullopt,
           false, {"R"});
  b.method("Observable", "subscribe", std::nullopt, ast::void_type(),
           {{callback("Consumer", {tvar("T")}, poly), "onNext"}});
  b.method("Observable", "subscribe", std::nullopt, ast::void_type(),
           {{callback("Consumer", {tvar("T")}, poly), "onNext"},
            {callback("Consumer", {named_type("Throwable")}, poly), "onError"}});

  // Android UI toolkit
  b.cls("View", ClassEffect::UIType);
  b.cls("ScrollView", ClassEffect::UIType, false, {}, "View");
  b.cls("TextView", ClassEffect::UIType, false, {}, "View");
  b.cls("Activity", ClassEffect::UIType);
  const auto runnable_ui = callback("Runnable", {}, EffectQual::UI);
  b.method("View", "invalidate", std::nullopt, ast::void_type(), {});
  b.method("View", "setVisibility", std::nullopt, ast::void_type(), {{primitive_type("int"), "visibility"}});
  b.method("View", "post", safe, primitive_type("boolean"), {{runnable_ui, "action"}});
  b.method("ScrollView", "post", safe, primitive_type("boolean"), {{runnable_ui, "action"}});
  b.method("ScrollView", "scrollTo", std::nullopt, ast::void_type(),
           {{primitive_type("int"), "x"}, {primitive_type("int"), "y"}});
  b.method("TextView", "setText", std::nullopt, ast::void_type(), {{named_type("String"), "text"}});
  b.method("Activity", "runOnUiThread", safe, ast::void_type(), {{runnable_ui, "action"}});
  b.method("Activity", "setContentView", std::nullopt, ast::void_type(), {{primitive_type("int"), "layoutId"}});

  return std::move(b.env);
}

}  // namespace rxcheck
