#include "rxcheck/ast.hpp"

#include <algorithm>

namespace rxcheck::ast {

bool MethodDecl::is_static() const {
  return std::find(modifiers.begin(), modifiers.end(), "static") != modifiers.end();
}

namespace {

void strip(std::vector<Stmt>& body);
void strip(MethodDecl& m);

void strip(Expr& e) {
  e.span = {};
  std::visit(
      [](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, FieldRef>) {
          strip(*n.object);
        } else if constexpr (std::is_same_v<T, MethodCall>) {
          n.name_span = {};
          if (n.receiver) strip(**n.receiver);
          for (auto& a : n.args) strip(a);
        } else if constexpr (std::is_same_v<T, Lambda>) {
          for (auto& p : n.params) p.span = {};
          if (n.expr_body) strip(**n.expr_body);
          strip(n.block_body);
        } else if constexpr (std::is_same_v<T, NewObject>) {
          for (auto& a : n.args) strip(a);
        } else if constexpr (std::is_same_v<T, AnonClass>) {
          for (auto& a : n.args) strip(a);
          for (auto& m : n.methods) strip(m);
        }
      },
      e.node);
}

void strip(Stmt& s) {
  s.span = {};
  std::visit(
      [](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LocalDecl>) {
          n.name.span = {};
          strip(n.init);
        } else if constexpr (std::is_same_v<T, ExprStmt>) {
          strip(n.expr);
        } else if constexpr (std::is_same_v<T, Assign>) {
          strip(n.target);
          strip(n.value);
        } else if constexpr (std::is_same_v<T, Return>) {
          if (n.value) strip(*n.value);
        } else if constexpr (std::is_same_v<T, If>) {
          strip(n.cond);
          strip(n.then_body);
          if (n.else_body) strip(*n.else_body);
        } else if constexpr (std::is_same_v<T, Block>) {
          strip(n.body);
        }
      },
      s.node);
}

void strip(std::vector<Stmt>& body) {
  for (auto& s : body) strip(s);
}

void strip(MethodDecl& m) {
  m.name.span = {};
  for (auto& a : m.annotations) a.span = {};
  if (m.receiver) m.receiver->span = {};
  for (auto& p : m.params) p.span = {};
  if (m.body) strip(*m.body);
}

}  // namespace

void strip_spans(Program& program) {
  for (auto& pkg : program.packages) {
    pkg.span = {};
    for (auto& a : pkg.annotations) a.span = {};
    for (auto& cls : pkg.classes) {
      cls.name.span = {};
      for (auto& a : cls.annotations) a.span = {};
      for (auto& f : cls.fields) {
        f.name.span = {};
        if (f.init) strip(*f.init);
      }
      for (auto& m : cls.methods) strip(m);
    }
  }
}

TypeRef named_type(std::string name, std::vector<TypeRef> args) {
  return TypeRef{BaseKind::Named, std::move(name), std::move(args), std::nullopt};
}

TypeRef stream_type(std::optional<ThreadQual> qual, TypeRef element) {
  TypeRef t{BaseKind::Stream, "Observable", {std::move(element)}, std::nullopt};
  if (qual) t.qualifier = *qual;
  return t;
}

TypeRef scheduler_type(std::optional<ThreadQual> qual) {
  TypeRef t{BaseKind::Scheduler, "Scheduler", {}, std::nullopt};
  if (qual) t.qualifier = *qual;
  return t;
}

TypeRef primitive_type(std::string name) {
  return TypeRef{BaseKind::Primitive, std::move(name), {}, std::nullopt};
}

TypeRef void_type() { return TypeRef{BaseKind::Void, "void", {}, std::nullopt}; }

Expr make_var(std::string name) { return Expr{VarRef{std::move(name)}, {}}; }

Expr make_literal(Literal::Kind kind, std::string text) {
  return Expr{Literal{kind, std::move(text)}, {}};
}

Expr make_field(Expr object, std::string name) {
  return Expr{FieldRef{Box<Expr>(std::move(object)), std::move(name)}, {}};
}

Expr make_call(std::optional<Expr> receiver, std::string name, std::vector<Expr> args) {
  MethodCall call;
  if (receiver) call.receiver = Box<Expr>(std::move(*receiver));
  call.name = std::move(name);
  call.args = std::move(args);
  return Expr{std::move(call), {}};
}

namespace {

std::vector<Ident> idents(std::vector<std::string> names) {
  std::vector<Ident> out;
  for (auto& n : names) out.push_back(Ident{std::move(n), {}});
  return out;
}

}  // namespace

Expr make_lambda(std::vector<std::string> params, Expr body) {
  Lambda lam;
  lam.params = idents(std::move(params));
  lam.expr_body = Box<Expr>(std::move(body));
  return Expr{std::move(lam), {}};
}

Expr make_block_lambda(std::vector<std::string> params, std::vector<Stmt> body) {
  Lambda lam;
  lam.params = idents(std::move(params));
  lam.block_body = std::move(body);
  return Expr{std::move(lam), {}};
}

Stmt make_expr_stmt(Expr e) { return Stmt{ExprStmt{std::move(e)}, {}}; }

Stmt make_return(std::optional<Expr> value) { return Stmt{Return{std::move(value)}, {}}; }

std::string_view to_string(ClassEffect e) {
  switch (e) {
    case ClassEffect::None: return "none";
    case ClassEffect::UIType: return "@UIType";
    case ClassEffect::PolyUIType: return "@PolyUIType";
  }
  return "none";
}

}  // namespace rxcheck::ast
