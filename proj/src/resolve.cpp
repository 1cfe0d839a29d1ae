#include "rxcheck/resolve.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "parser.hpp"
#include "rxcheck/frontend.hpp"

namespace rxcheck {

using namespace ast;

const ClassDecl* ResolvedProgram::find_class(std::string_view name) const {
  for (const auto& pkg : program.packages) {
    for (const auto& cls : pkg.classes) {
      if (cls.name.name == name) return &cls;
    }
  }
  return nullptr;
}

const PackageDecl* ResolvedProgram::package_of(const ClassDecl& cls) const {
  for (const auto& pkg : program.packages) {
    for (const auto& c : pkg.classes) {
      if (&c == &cls) return &pkg;
    }
  }
  return nullptr;
}

namespace {

using Scope = std::vector<const std::vector<std::string>*>;

bool in_scope(const Scope& scope, const std::string& name) {
  return std::any_of(scope.begin(), scope.end(), [&](const auto* tps) {
    return std::find(tps->begin(), tps->end(), name) != tps->end();
  });
}

/// Picks the written effect of a method, reporting a second one as a conflict.
std::optional<EffectQual> written_effect(const std::vector<Annotation>& annos, std::vector<Diagnostic>& diags) {
  std::optional<EffectQual> found;
  const Annotation* first = nullptr;
  for (const auto& a : annos) {
    if (auto e = effect_from_method_annotation(a.name)) {
      if (found) {
        Diagnostic d = make_diagnostic(codes::kAnnotConflict, a.span,
                                       "method carries both @" + first->name + " and @" + a.name);
        d.related.push_back(RelatedInfo{first->span, "first effect annotation"});
        diags.push_back(std::move(d));
        continue;
      }
      found = e;
      first = &a;
    }
  }
  return found;
}

ClassEffect written_class_effect(const std::vector<Annotation>& annos, std::vector<Diagnostic>& diags) {
  ClassEffect found = ClassEffect::None;
  const Annotation* first = nullptr;
  for (const auto& a : annos) {
    ClassEffect e = a.name == "UIType" ? ClassEffect::UIType
                    : a.name == "PolyUIType" ? ClassEffect::PolyUIType
                                             : ClassEffect::None;
    if (e == ClassEffect::None) continue;
    if (first) {
      Diagnostic d = make_diagnostic(codes::kAnnotConflict, a.span,
                                     "class carries both @" + first->name + " and @" + a.name);
      d.related.push_back(RelatedInfo{first->span, "first class annotation"});
      diags.push_back(std::move(d));
      continue;
    }
    found = e;
    first = &a;
  }
  return found;
}

EffectQual class_default(ClassEffect ce, bool ui_package) {
  if (ce == ClassEffect::UIType) return EffectQual::UI;
  if (ce == ClassEffect::PolyUIType) return EffectQual::PolyUI;
  return ui_package ? EffectQual::UI : EffectQual::Safe;
}

class Resolver {
 public:
  Resolver(Program& p, const StubEnv& stubs) : program_(p), stubs_(stubs) {}

  std::vector<Diagnostic> run() {
    // class effects first: type defaults need to know which classes are polymorphic
    for (auto& pkg : program_.packages) {
      pkg.ui_package = std::any_of(pkg.annotations.begin(), pkg.annotations.end(),
                                   [](const Annotation& a) { return a.name == "UIPackage"; });
      for (auto& cls : pkg.classes) {
        cls.class_effect = written_class_effect(cls.annotations, diags_);
        user_classes_[cls.name.name] = &cls;
      }
    }
    for (auto& pkg : program_.packages) {
      for (auto& cls : pkg.classes) resolve_class(pkg, cls);
    }
    sort_diagnostics(diags_);
    return std::move(diags_);
  }

 private:
  ClassEffect class_effect_of(const std::string& name) const {
    if (auto it = user_classes_.find(name); it != user_classes_.end()) return it->second->class_effect;
    if (const StubClass* c = stubs_.find_class(name)) return c->annotation;
    return ClassEffect::None;
  }

  void type(TypeRef& t) {
    apply_type_defaults(
        t, [&](const std::string& n) { return in_scope(scope_, n); },
        [&](const std::string& n) { return class_effect_of(n) == ClassEffect::PolyUIType; });
  }

  void resolve_class(const PackageDecl& pkg, ClassDecl& cls) {
    scope_ = {&cls.type_params};
    if (cls.superclass) type(*cls.superclass);
    for (auto& i : cls.interfaces) type(i);
    for (auto& f : cls.fields) {
      type(f.type);
      if (f.init) expr(*f.init);
    }
    const EffectQual fallback = class_default(cls.class_effect, pkg.ui_package);
    for (auto& m : cls.methods) method(m, fallback);
  }

  void method(MethodDecl& m, EffectQual fallback) {
    m.effect = written_effect(m.annotations, diags_).value_or(fallback);
    scope_.push_back(&m.type_params);
    type(m.return_type);
    if (m.receiver) type(m.receiver->type);
    for (auto& p : m.params) type(p.type);
    if (m.body) {
      for (auto& s : *m.body) stmt(s);
    }
    scope_.pop_back();
  }

  void stmts(std::vector<Stmt>& body) {
    for (auto& s : body) stmt(s);
  }

  void stmt(Stmt& s) {
    std::visit(
        [&](auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, LocalDecl>) {
            type(n.type);
            expr(n.init);
          } else if constexpr (std::is_same_v<N, ExprStmt>) {
            expr(n.expr);
          } else if constexpr (std::is_same_v<N, Assign>) {
            expr(n.target);
            expr(n.value);
          } else if constexpr (std::is_same_v<N, Return>) {
            if (n.value) expr(*n.value);
          } else if constexpr (std::is_same_v<N, If>) {
            expr(n.cond);
            stmts(n.then_body);
            if (n.else_body) stmts(*n.else_body);
          } else {
            stmts(n.body);
          }
        },
        s.node);
  }

  void expr(Expr& e) {
    std::visit(
        [&](auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, FieldRef>) {
            expr(*n.object);
          } else if constexpr (std::is_same_v<N, MethodCall>) {
            if (n.receiver) expr(**n.receiver);
            for (auto& a : n.args) expr(a);
          } else if constexpr (std::is_same_v<N, Lambda>) {
            if (n.expr_body) expr(**n.expr_body);
            stmts(n.block_body);
          } else if constexpr (std::is_same_v<N, NewObject>) {
            type(n.type);
            for (auto& a : n.args) expr(a);
          } else if constexpr (std::is_same_v<N, AnonClass>) {
            type(n.type);
            for (auto& a : n.args) expr(a);
            EffectQual fallback = EffectQual::Safe;
            if (const EffectQual* q = n.type.effect()) {
              fallback = *q;
            } else if (class_effect_of(n.type.name) == ClassEffect::UIType) {
              fallback = EffectQual::UI;
            }
            for (auto& m : n.methods) method(m, fallback);
          }
        },
        e.node);
  }

  Program& program_;
  const StubEnv& stubs_;
  std::map<std::string, ClassDecl*> user_classes_;
  Scope scope_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

ResolveResult resolve_annotations(const Program& program, const StubEnv& stubs) {
  ResolveResult out;
  out.resolved.program = program;
  out.diagnostics = Resolver(out.resolved.program, stubs).run();
  return out;
}

// ---------------------------------------------------------------------------
// Stub files

namespace {

TypeRef implicit_receiver(const std::string& owner, const std::vector<std::string>& type_params, ClassEffect annotation) {
  std::vector<TypeRef> args;
  for (const auto& tp : type_params) args.push_back(TypeRef{BaseKind::TypeVar, tp, {}, std::nullopt});
  if (owner == "Observable") {
    return stream_type(ThreadQual::Any,
                       args.empty() ? TypeRef{BaseKind::TypeVar, "T", {}, std::nullopt} : std::move(args[0]));
  }
  if (owner == "Scheduler") return scheduler_type(ThreadQual::Any);
  TypeRef t = named_type(owner, std::move(args));
  if (annotation == ClassEffect::PolyUIType) t.qualifier = EffectQual::PolyUI;
  return t;
}

Diagnostic stub_error(const Span& span, const std::string& msg) {
  return make_diagnostic(codes::kStubParseError, span, msg);
}

}  // namespace

StubParseResult parse_stub_file(std::string_view text, std::string_view path, const StubEnv* context) {
  StubParseResult result;
  detail::FileParse file = detail::parse_file(text, std::string(path), detail::ParseMode::Stub);
  for (auto& d : file.diagnostics) {
    d.code = codes::kStubParseError;
    result.diagnostics.push_back(std::move(d));
  }
  if (!result.diagnostics.empty()) {
    sort_diagnostics(result.diagnostics);
    return result;
  }

  // class table: this file first, then the context model
  StubFile out;
  std::map<std::string, std::size_t> index;
  std::vector<std::pair<const PackageDecl*, const ClassDecl*>> decls;
  for (const auto& pkg : file.packages) {
    const bool ui_package = std::any_of(pkg.annotations.begin(), pkg.annotations.end(),
                                        [](const Annotation& a) { return a.name == "UIPackage"; });
    for (const auto& cls : pkg.classes) {
      decls.emplace_back(&pkg, &cls);
      ClassEffect ce = written_class_effect(cls.annotations, result.diagnostics);
      const StubClass* known = context ? context->find_class(cls.name.name) : nullptr;
      if (ce == ClassEffect::None && known) ce = known->annotation;
      if (ce == ClassEffect::None && ui_package) ce = ClassEffect::UIType;
      StubClass sc;
      sc.name = cls.name.name;
      sc.is_interface = cls.is_interface;
      sc.annotation = ce;
      if (cls.superclass) sc.superclass = cls.superclass->name;
      for (const auto& i : cls.interfaces) sc.interfaces.push_back(i.name);
      sc.type_params = cls.type_params;
      if (sc.type_params.empty() && known) sc.type_params = known->type_params;
      sc.span = cls.name.span;
      if (auto it = index.find(sc.name); it != index.end()) {
        StubClass& prev = out.classes[it->second];
        if (prev.annotation == ClassEffect::None) prev.annotation = sc.annotation;
        for (const auto& i : sc.interfaces) {
          if (std::find(prev.interfaces.begin(), prev.interfaces.end(), i) == prev.interfaces.end()) {
            prev.interfaces.push_back(i);
          }
        }
        if (!prev.superclass) prev.superclass = sc.superclass;
        continue;
      }
      index[sc.name] = out.classes.size();
      out.classes.push_back(std::move(sc));
    }
  }
  auto annotation_of = [&](const std::string& name) {
    if (auto it = index.find(name); it != index.end()) return out.classes[it->second].annotation;
    if (const StubClass* c = context ? context->find_class(name) : nullptr) return c->annotation;
    return ClassEffect::None;
  };

  std::map<MethodKey, const MethodSig*> seen;
  std::vector<MethodSig> methods;
  for (const auto& [pkg, cls] : decls) {
    const StubClass& owner = out.classes[index.at(cls->name.name)];
    for (const auto& f : cls->fields) {
      result.diagnostics.push_back(stub_error(f.name.span, "stub files may not declare fields"));
    }
    for (const auto& m : cls->methods) {
      if (m.body) {
        result.diagnostics.push_back(stub_error(m.name.span, "stub method " + m.name.name + " may not have a body"));
        continue;
      }
      MethodSig sig;
      sig.owner = owner.name;
      sig.name = m.name.name;
      sig.owner_annotation = owner.annotation;
      sig.effect = written_effect(m.annotations, result.diagnostics)
                       .value_or(class_default(owner.annotation, false));
      sig.is_static = m.is_static();
      sig.type_params = m.type_params;
      sig.span = m.name.span;
      const std::vector<std::string>* scope[] = {&owner.type_params, &m.type_params};
      auto is_tp = [&](const std::string& n) {
        return std::any_of(std::begin(scope), std::end(scope),
                           [&](const auto* s) { return std::find(s->begin(), s->end(), n) != s->end(); });
      };
      auto is_poly = [&](const std::string& n) { return annotation_of(n) == ClassEffect::PolyUIType; };
      if (m.receiver) {
        sig.receiver = m.receiver->type;
        apply_type_defaults(sig.receiver, is_tp, is_poly);
      } else {
        sig.receiver = implicit_receiver(owner.name, owner.type_params, owner.annotation);
      }
      for (const auto& p : m.params) {
        TypeRef t = p.type;
        apply_type_defaults(t, is_tp, is_poly);
        sig.params.push_back(std::move(t));
        sig.param_names.push_back(p.name);
      }
      sig.return_type = m.return_type;
      apply_type_defaults(sig.return_type, is_tp, is_poly);
      for (const auto& problem : signature_problems(sig)) {
        result.diagnostics.push_back(stub_error(sig.span, problem));
      }
      methods.push_back(std::move(sig));
    }
  }
  for (const auto& sig : methods) {
    auto [it, fresh] = seen.emplace(MethodKey{sig.owner, sig.name, sig.arity()}, &sig);
    if (fresh) {
      out.methods.push_back(sig);
      continue;
    }
    if (!same_signature(*it->second, sig)) {
      Diagnostic d = make_diagnostic(codes::kStubConflict, sig.span,
                                     "conflicting stub signatures for " + sig.owner + "#" + sig.name + "/" +
                                         std::to_string(sig.arity()) + ": " + format_signature(*it->second) +
                                         " vs " + format_signature(sig));
      d.related.push_back(RelatedInfo{it->second->span, "first declared here"});
      result.diagnostics.push_back(std::move(d));
    }
  }
  sort_diagnostics(result.diagnostics);
  if (result.diagnostics.empty()) result.stubs = std::move(out);
  return result;
}

}  // namespace rxcheck
