#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rxcheck/ast.hpp"
#include "rxcheck/diagnostic.hpp"
#include "rxcheck/stubs.hpp"

namespace rxcheck {

struct SourceFile {
  std::string path;
  std::string text;
};

struct ParseResult {
  std::optional<ast::Program> program;  // absent iff diagnostics is non-empty
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
};

/// Parses MiniRx sources (.mrx). Files sharing a package name are merged into
/// one PackageDecl; classes without a package go to the default package "".
ParseResult parse_program(const std::vector<SourceFile>& sources);

struct StubParseResult {
  std::optional<StubFile> stubs;
  std::vector<Diagnostic> diagnostics;  // stub.parse.error / stub.conflict

  bool ok() const { return stubs.has_value(); }
};

/// Parses an annotation stub file (.astub) into defaulted signatures.
/// Class names are looked up in the file itself first, then in `context`
/// (normally the built-in model) when classifying callback types.
StubParseResult parse_stub_file(std::string_view text, std::string_view path = "<stub>",
                                const StubEnv* context = nullptr);

/// Renders a program back to MiniRx syntax. Re-parsing the output yields a
/// structurally identical AST.
std::string print_program(const ast::Program& program);

}  // namespace rxcheck
