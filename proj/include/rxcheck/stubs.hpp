#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rxcheck/ast.hpp"
#include "rxcheck/diagnostic.hpp"
#include "rxcheck/qualifiers.hpp"

namespace rxcheck {

/// A fully defaulted method signature. Every stream/scheduler position carries
/// a thread qualifier; callback positions carry an effect qualifier. All
/// polymorphic qualifiers in one signature denote the same variable.
struct MethodSig {
  std::string owner;
  std::string name;
  EffectQual effect = EffectQual::Safe;
  ast::TypeRef receiver;
  std::vector<ast::TypeRef> params;
  std::vector<std::string> param_names;
  ast::TypeRef return_type;
  bool is_static = false;
  std::vector<std::string> type_params;  // method-level
  ast::ClassEffect owner_annotation = ast::ClassEffect::None;
  Span span;  // declaration site

  std::size_t arity() const { return params.size(); }
};

/// Compares everything but declaration spans and parameter names.
bool same_signature(const MethodSig& a, const MethodSig& b);

/// Canonical one-line rendering, e.g.
/// `@SafeEffect boolean ScrollView#post(ScrollView this, @UI Runnable) in @UIType`.
std::string format_signature(const MethodSig& sig);
std::string format_type(const ast::TypeRef& t);

/// Machine-checkable signature invariants; empty when the signature is valid.
std::vector<std::string> signature_problems(const MethodSig& sig);

struct StubClass {
  std::string name;
  bool is_interface = false;
  ast::ClassEffect annotation = ast::ClassEffect::None;
  std::optional<std::string> superclass;
  std::vector<std::string> interfaces;
  std::vector<std::string> type_params;
  Span span;

  bool same_shape(const StubClass& other) const;
};

struct MethodKey {
  std::string owner;
  std::string name;
  std::size_t arity = 0;

  auto operator<=>(const MethodKey&) const = default;
};

/// Trusted library model. Immutable once handed to the checker.
class StubEnv {
 public:
  const MethodSig* lookup(std::string_view owner, std::string_view name, std::size_t arity) const;
  const StubClass* find_class(std::string_view name) const;

  /// Inserts or replaces.
  void put_method(MethodSig sig);
  void put_class(StubClass cls);

  const std::map<MethodKey, MethodSig>& methods() const { return methods_; }
  const std::map<std::string, StubClass, std::less<>>& classes() const { return classes_; }

  /// Classes marked @UIType or @PolyUIType.
  std::vector<std::string> annotated_classes() const;

  /// Structural equality; spans and parameter names are ignored.
  friend bool operator==(const StubEnv& a, const StubEnv& b);

 private:
  std::map<MethodKey, MethodSig> methods_;
  std::map<std::string, StubClass, std::less<>> classes_;
};

/// Result of parsing one stub file.
struct StubFile {
  std::vector<StubClass> classes;
  std::vector<MethodSig> methods;
};

/// The built-in Rx and Android model.
StubEnv builtin_env();

struct MergeResult {
  StubEnv env;
  std::vector<Diagnostic> diagnostics;  // stub.conflict within `extra`
};

/// User stubs shadow `env` on exact (owner, name, arity) matches.
MergeResult merge(const StubEnv& env, const std::vector<MethodSig>& extra);
MergeResult merge(const StubEnv& env, const StubFile& extra);

}  // namespace rxcheck
