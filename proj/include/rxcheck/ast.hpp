#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rxcheck/diagnostic.hpp"
#include "rxcheck/qualifiers.hpp"

namespace rxcheck::ast {

/// Owning pointer with value semantics: copies deep-copy, == compares pointees.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }
  T* get() { return ptr_.get(); }
  const T* get() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

using Qualifier = std::variant<ThreadQual, EffectQual>;

enum class BaseKind {
  Stream,     // Observable
  Scheduler,  // Scheduler
  Named,      // any other class or interface (callbacks included)
  TypeVar,    // class or method type parameter; classified during resolution
  Void,
  Primitive,  // int, long, boolean, double
};

struct TypeRef {
  BaseKind kind = BaseKind::Named;
  std::string name;
  std::vector<TypeRef> args;
  std::optional<Qualifier> qualifier;

  const ThreadQual* thread() const { return qualifier ? std::get_if<ThreadQual>(&*qualifier) : nullptr; }
  const EffectQual* effect() const { return qualifier ? std::get_if<EffectQual>(&*qualifier) : nullptr; }

  bool operator==(const TypeRef&) const = default;
};

struct Annotation {
  std::string name;  // without '@'
  Span span;

  bool operator==(const Annotation&) const = default;
};

struct Ident {
  std::string name;
  Span span;

  bool operator==(const Ident&) const = default;
};

struct Param {
  TypeRef type;
  std::string name;
  Span span;

  bool operator==(const Param&) const = default;
};

struct Expr;
struct Stmt;
struct MethodDecl;

struct Literal {
  enum class Kind { Int, Long, Double, Bool, String, Null };
  Kind kind = Kind::Int;
  std::string text;  // as written; strings without quotes, unescaped

  bool operator==(const Literal&) const = default;
};

struct VarRef {
  std::string name;
  bool operator==(const VarRef&) const = default;
};

struct This {
  bool operator==(const This&) const = default;
};

struct FieldRef {
  Box<Expr> object;
  std::string name;
  bool operator==(const FieldRef&) const = default;
};

struct MethodCall {
  std::optional<Box<Expr>> receiver;  // absent: implicit `this`
  std::string name;
  Span name_span;
  std::vector<Expr> args;
  bool operator==(const MethodCall&) const = default;
};

/// Lambdas never carry qualifiers; their effect comes from the target type.
struct Lambda {
  std::vector<Ident> params;
  std::optional<Box<Expr>> expr_body;  // `x -> expr`
  std::vector<Stmt> block_body;        // `x -> { ... }` when expr_body is absent
  bool operator==(const Lambda&) const = default;
};

struct NewObject {
  TypeRef type;
  std::vector<Expr> args;
  bool operator==(const NewObject&) const = default;
};

/// `new @UI Consumer<T>() { ... }`
struct AnonClass {
  TypeRef type;
  std::vector<Expr> args;
  std::vector<MethodDecl> methods;
  bool operator==(const AnonClass&) const = default;
};

struct Expr {
  using Node = std::variant<Literal, VarRef, This, FieldRef, MethodCall, Lambda, NewObject, AnonClass>;
  Node node;
  Span span;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
  template <class T>
  T* as() { return std::get_if<T>(&node); }

  bool operator==(const Expr&) const = default;
};

struct LocalDecl {
  TypeRef type;
  Ident name;
  Expr init;
  bool operator==(const LocalDecl&) const = default;
};

struct ExprStmt {
  Expr expr;
  bool operator==(const ExprStmt&) const = default;
};

struct Assign {
  Expr target;  // VarRef or FieldRef
  Expr value;
  bool operator==(const Assign&) const = default;
};

struct Return {
  std::optional<Expr> value;
  bool operator==(const Return&) const = default;
};

struct If {
  Expr cond;
  std::vector<Stmt> then_body;
  std::optional<std::vector<Stmt>> else_body;
  bool operator==(const If&) const = default;
};

struct Block {
  std::vector<Stmt> body;
  bool operator==(const Block&) const = default;
};

struct Stmt {
  using Node = std::variant<LocalDecl, ExprStmt, Assign, Return, If, Block>;
  Node node;
  Span span;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }

  bool operator==(const Stmt&) const = default;
};

struct FieldDecl {
  std::vector<std::string> modifiers;
  TypeRef type;
  Ident name;
  std::optional<Expr> init;
  bool operator==(const FieldDecl&) const = default;
};

struct MethodDecl {
  std::vector<std::string> modifiers;
  std::vector<Annotation> annotations;  // method-level annotations as written
  std::vector<std::string> type_params;
  TypeRef return_type;
  Ident name;
  std::optional<Param> receiver;  // explicit `this` parameter
  std::vector<Param> params;
  std::optional<std::vector<Stmt>> body;

  std::optional<EffectQual> effect;  // filled by resolution

  bool is_static() const;
  bool operator==(const MethodDecl&) const = default;
};

enum class ClassEffect { None, UIType, PolyUIType };

struct ClassDecl {
  std::vector<std::string> modifiers;
  std::vector<Annotation> annotations;
  bool is_interface = false;
  Ident name;
  std::vector<std::string> type_params;
  std::optional<TypeRef> superclass;
  std::vector<TypeRef> interfaces;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  std::optional<std::string> enclosing;  // nested classes are flattened into their package

  ClassEffect class_effect = ClassEffect::None;  // filled by resolution

  bool operator==(const ClassDecl&) const = default;
};

struct PackageDecl {
  std::string name;  // "" for the default package
  std::vector<Annotation> annotations;
  Span span;
  std::vector<ClassDecl> classes;

  bool ui_package = false;  // filled by resolution

  bool operator==(const PackageDecl&) const = default;
};

struct Program {
  std::vector<PackageDecl> packages;

  bool operator==(const Program&) const = default;
};

/// Clears every span in the tree, so that == compares structure only.
void strip_spans(Program& program);

// Builders used by the program enumerator and tests.
TypeRef named_type(std::string name, std::vector<TypeRef> args = {});
TypeRef stream_type(std::optional<ThreadQual> qual, TypeRef element);
TypeRef scheduler_type(std::optional<ThreadQual> qual);
TypeRef primitive_type(std::string name);
TypeRef void_type();

Expr make_var(std::string name);
Expr make_literal(Literal::Kind kind, std::string text);
Expr make_field(Expr object, std::string name);
Expr make_call(std::optional<Expr> receiver, std::string name, std::vector<Expr> args);
Expr make_lambda(std::vector<std::string> params, Expr body);
Expr make_block_lambda(std::vector<std::string> params, std::vector<Stmt> body);
Stmt make_expr_stmt(Expr e);
Stmt make_return(std::optional<Expr> value);

std::string_view to_string(ClassEffect e);

}  // namespace rxcheck::ast
