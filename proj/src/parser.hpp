#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rxcheck/ast.hpp"
#include "rxcheck/diagnostic.hpp"

namespace rxcheck::detail {

enum class ParseMode { Source, Stub };

struct FileParse {
  std::vector<ast::PackageDecl> packages;  // in file order; may repeat a name
  std::vector<Diagnostic> diagnostics;     // parse.error only
};

/// Parses one file. Syntax errors are reported as parse.error; stub callers remap.
FileParse parse_file(std::string_view text, const std::string& path, ParseMode mode);

}  // namespace rxcheck::detail
