#pragma once

#include <fstream>
#include <set>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rxcheck/frontend.hpp"
#include "rxcheck/resolve.hpp"
#include "rxcheck/stubs.hpp"
#include "rxcheck/typesys.hpp"

namespace rxtest {

inline std::string source_path(const std::string& rel) { return std::string(RXCHECK_SOURCE_DIR) + "/" + rel; }

inline std::string slurp(const std::string& rel) {
  std::ifstream in(source_path(rel), std::ios::binary);
  if (!in) throw std::runtime_error("missing test input " + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const rxcheck::StubEnv& builtin() {
  static const rxcheck::StubEnv env = rxcheck::builtin_env();
  return env;
}

// Everything from one run of the pipeline. `check` points into `program`.
struct Analysis {
  std::unique_ptr<rxcheck::ResolvedProgram> program;
  std::vector<rxcheck::Diagnostic> diagnostics;
  rxcheck::CheckResult check;
};

inline Analysis analyze(const std::string& text, const rxcheck::StubEnv& env = builtin(),
                        const std::string& path = "input.mrx", const rxcheck::CheckOptions& options = {}) {
  Analysis a;
  auto parsed = rxcheck::parse_program({rxcheck::SourceFile{path, text}});
  if (!parsed.ok()) {
    a.diagnostics = parsed.diagnostics;
    return a;
  }
  auto resolved = rxcheck::resolve_annotations(*parsed.program, env);
  a.program = std::make_unique<rxcheck::ResolvedProgram>(std::move(resolved.resolved));
  a.check = rxcheck::check_program(*a.program, env, options);
  a.diagnostics = resolved.diagnostics;
  a.diagnostics.insert(a.diagnostics.end(), a.check.diagnostics.begin(), a.check.diagnostics.end());
  rxcheck::sort_diagnostics(a.diagnostics);
  return a;
}

inline Analysis analyze_file(const std::string& rel, const rxcheck::StubEnv& env = builtin()) {
  return analyze(slurp(rel), env, rel);
}

inline rxcheck::ResolvedProgram resolve_text(const std::string& text, const rxcheck::StubEnv& env = builtin()) {
  auto parsed = rxcheck::parse_program({rxcheck::SourceFile{"input.mrx", text}});
  if (!parsed.ok()) throw std::runtime_error("does not parse: " + rxcheck::format_text(parsed.diagnostics.front()));
  return rxcheck::resolve_annotations(*parsed.program, env).resolved;
}

inline rxcheck::StubEnv env_with(const std::string& stub_rel) {
  auto parsed = rxcheck::parse_stub_file(slurp(stub_rel), stub_rel, &builtin());
  if (!parsed.ok()) throw std::runtime_error("bad stub " + stub_rel);
  return rxcheck::merge(builtin(), *parsed.stubs).env;
}

// Method names that carry a UI effect anywhere in the model or program.
inline std::set<std::string> ui_method_names(const rxcheck::ResolvedProgram& p, const rxcheck::StubEnv& env = builtin()) {
  std::set<std::string> out;
  for (const auto& [key, sig] : env.methods()) {
    if (sig.effect == rxcheck::EffectQual::UI) out.insert(key.name);
  }
  for (const auto& pkg : p.program.packages) {
    for (const auto& c : pkg.classes) {
      for (const auto& m : c.methods) {
        if (m.effect == rxcheck::EffectQual::UI) out.insert(m.name.name);
      }
    }
  }
  return out;
}

// Calls made directly by a lambda body; nested lambdas and anonymous classes
// are not entered.
inline void direct_calls(const rxcheck::ast::Expr& e, std::vector<std::string>& out);

inline void direct_calls(const std::vector<rxcheck::ast::Stmt>& body, std::vector<std::string>& out) {
  using namespace rxcheck::ast;
  for (const auto& s : body) {
    if (const auto* d = s.as<LocalDecl>()) direct_calls(d->init, out);
    if (const auto* x = s.as<ExprStmt>()) direct_calls(x->expr, out);
    if (const auto* a = s.as<Assign>()) {
      direct_calls(a->target, out);
      direct_calls(a->value, out);
    }
    if (const auto* r = s.as<Return>(); r && r->value) direct_calls(*r->value, out);
    if (const auto* i = s.as<If>()) {
      direct_calls(i->cond, out);
      direct_calls(i->then_body, out);
      if (i->else_body) direct_calls(*i->else_body, out);
    }
    if (const auto* b = s.as<Block>()) direct_calls(b->body, out);
  }
}

inline void direct_calls(const rxcheck::ast::Expr& e, std::vector<std::string>& out) {
  using namespace rxcheck::ast;
  if (const auto* c = e.as<MethodCall>()) {
    out.push_back(c->name);
    if (c->receiver) direct_calls(**c->receiver, out);
    for (const auto& a : c->args) direct_calls(a, out);
  } else if (const auto* f = e.as<FieldRef>()) {
    direct_calls(*f->object, out);
  } else if (const auto* n = e.as<NewObject>()) {
    for (const auto& a : n->args) direct_calls(a, out);
  }
}

// Independent re-scan of inference results: names of UI methods called
// directly from lambdas that were inferred safe. Matching by name
// over-approximates, so an empty result is conclusive.
inline std::vector<std::string> ui_calls_in_safe_lambdas(const rxcheck::ResolvedProgram& p,
                                                         const rxcheck::CheckResult& r) {
  const auto ui = ui_method_names(p);
  std::vector<std::string> bad;
  for (const auto& rec : r.lambdas) {
    if (rec.effect != rxcheck::EffectQual::Safe) continue;
    const auto* lam = rec.expr->as<rxcheck::ast::Lambda>();
    if (!lam) continue;
    std::vector<std::string> calls;
    if (lam->expr_body) direct_calls(**lam->expr_body, calls);
    direct_calls(lam->block_body, calls);
    for (auto& name : calls) {
      if (ui.count(name)) bad.push_back(std::move(name));
    }
  }
  return bad;
}

}  // namespace rxtest
