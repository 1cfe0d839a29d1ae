#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rxcheck/diagnostic.hpp"
#include "rxcheck/stubs.hpp"

namespace rxcheck {

enum class CliMode { Check, Soundness, DumpTrace };
enum class OutputFormat { Text, Json };

struct CliConfig {
  CliMode mode = CliMode::Check;
  std::vector<std::string> sources;
  std::vector<std::string> stubs;
  OutputFormat format = OutputFormat::Text;
  int depth = 3;
  bool strict_any_subscribe = true;
  bool builtin_stubs = true;  // cleared by RXCHECK_NO_BUILTIN_STUBS=1
};

inline constexpr int kExitAccepted = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitUsage = 2;

/// Largest accepted --depth; 6 already means ~3.6M programs.
inline constexpr int kMaxDepth = 5;

/// Builtins (unless disabled) followed by each stub file in order. On
/// failure the stub diagnostics are returned and the env is absent.
struct EnvLoad {
  std::optional<StubEnv> env;
  std::vector<Diagnostic> diagnostics;
  std::string io_error;
};
EnvLoad load_env(const CliConfig& cfg);

/// Full driver; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rxcheck
