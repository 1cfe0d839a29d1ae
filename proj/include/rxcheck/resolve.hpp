#pragma once

#include <string_view>
#include <vector>

#include "rxcheck/ast.hpp"
#include "rxcheck/diagnostic.hpp"
#include "rxcheck/stubs.hpp"

namespace rxcheck {

/// A program whose every method has an effect and whose every stream,
/// scheduler and polymorphic-callback type position carries a qualifier.
struct ResolvedProgram {
  ast::Program program;

  const ast::ClassDecl* find_class(std::string_view name) const;
  const ast::PackageDecl* package_of(const ast::ClassDecl& cls) const;

  bool operator==(const ResolvedProgram&) const = default;
};

struct ResolveResult {
  ResolvedProgram resolved;
  std::vector<Diagnostic> diagnostics;  // annot.conflict
};

/// Applies defaults. Running it again on its own output changes nothing.
ResolveResult resolve_annotations(const ast::Program& program, const StubEnv& stubs);

/// Qualifier a type position gets when nothing is written: @AnyThread for
/// streams and schedulers (recursively), @AlwaysSafe for instances of
/// @PolyUIType classes. `is_type_param` and `is_poly_class` classify names.
template <class IsTypeParam, class IsPolyClass>
void apply_type_defaults(ast::TypeRef& t, const IsTypeParam& is_type_param, const IsPolyClass& is_poly_class) {
  if (t.kind == ast::BaseKind::Named && is_type_param(t.name)) t.kind = ast::BaseKind::TypeVar;
  if (!t.qualifier) {
    if (t.kind == ast::BaseKind::Stream || t.kind == ast::BaseKind::Scheduler) {
      t.qualifier = ThreadQual::Any;
    } else if (t.kind == ast::BaseKind::Named && is_poly_class(t.name)) {
      t.qualifier = EffectQual::Safe;
    }
  }
  for (auto& a : t.args) apply_type_defaults(a, is_type_param, is_poly_class);
}

}  // namespace rxcheck
