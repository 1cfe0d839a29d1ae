#include "rxcheck/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "rxcheck/frontend.hpp"
#include "rxcheck/oracle.hpp"
#include "rxcheck/resolve.hpp"
#include "rxcheck/typesys.hpp"

namespace rxcheck {

namespace {

using json = nlohmann::ordered_json;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

void emit(const std::vector<Diagnostic>& diags, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Json) {
    out << to_json(diags);
    return;
  }
  for (const auto& d : diags) out << format_text(d) << '\n';
}

struct Loaded {
  std::optional<ResolvedProgram> program;
  std::vector<Diagnostic> diagnostics;
};

// nullopt on IO failure (already reported)
std::optional<Loaded> load_program(const CliConfig& cfg, const StubEnv& env, std::ostream& err) {
  std::vector<SourceFile> files;
  for (const auto& path : cfg.sources) {
    auto text = read_file(path);
    if (!text) {
      err << "rxcheck: cannot read " << path << '\n';
      return std::nullopt;
    }
    files.push_back(SourceFile{path, std::move(*text)});
  }
  Loaded out;
  ParseResult parsed = parse_program(files);
  if (!parsed.ok()) {
    out.diagnostics = std::move(parsed.diagnostics);
    return out;
  }
  ResolveResult resolved = resolve_annotations(*parsed.program, env);
  out.diagnostics = std::move(resolved.diagnostics);
  out.program = std::move(resolved.resolved);
  return out;
}

int run_check(const CliConfig& cfg, const StubEnv& env, std::ostream& out, std::ostream& err) {
  auto loaded = load_program(cfg, env, err);
  if (!loaded) return kExitUsage;
  std::vector<Diagnostic> diags = std::move(loaded->diagnostics);
  if (loaded->program) {
    CheckResult checked = check_program(*loaded->program, env, CheckOptions{cfg.strict_any_subscribe});
    diags.insert(diags.end(), checked.diagnostics.begin(), checked.diagnostics.end());
  }
  sort_diagnostics(diags);
  emit(diags, cfg.format, out);
  return diags.empty() ? kExitAccepted : kExitDiagnostics;
}

std::string_view source_name(SourceThread s) {
  switch (s) {
    case SourceThread::UI: return "UI";
    case SourceThread::Comp: return "Comp";
    case SourceThread::Unknown: return "Unknown";
  }
  return "?";
}

int run_dump_trace(const CliConfig& cfg, const StubEnv& env, std::ostream& out, std::ostream& err) {
  auto loaded = load_program(cfg, env, err);
  if (!loaded) return kExitUsage;
  if (!loaded->program) {
    emit(loaded->diagnostics, cfg.format, out);
    return kExitDiagnostics;
  }
  LowerResult lowered = lower(*loaded->program, env);
  bool violated = false;
  json doc = json::array();
  std::ostringstream text;
  for (const auto& d : lowered.diagnostics) text << format_text(d) << '\n';
  for (const auto& ir : lowered.pipelines) {
    text << "pipeline " << ir.span.file << ':' << ir.span.line << ':' << ir.span.col
         << " source=" << source_name(ir.source) << '\n';
    json pj{{"file", ir.span.file}, {"line", ir.span.line}, {"col", ir.span.col},
            {"source", source_name(ir.source)}, {"resolutions", json::array()}};
    for (const auto& res : all_resolutions(ir)) {
      const Trace trace = run(ir, res);
      violated = violated || !trace.ok();
      std::string choices;
      json jc = json::array();
      for (RunThread t : res.choices) {
        choices += ' ';
        choices += to_string(t);
        jc.push_back(to_string(t));
      }
      text << "resolution" << (choices.empty() ? " none" : choices) << '\n' << format_trace(trace);
      json steps = json::array();
      for (const auto& s : trace.steps) {
        steps.push_back({{"index", s.index}, {"op", to_string(s.op)}, {"runsOn", to_string(s.runs_on)},
                         {"emitsOn", to_string(s.emits_on)}, {"violation", s.violation}});
      }
      pj["resolutions"].push_back({{"choices", jc}, {"steps", steps}});
    }
    doc.push_back(std::move(pj));
  }
  if (cfg.format == OutputFormat::Json) {
    out << json{{"unsupported", json::parse(to_json(lowered.diagnostics))}, {"pipelines", doc}}.dump(2) << '\n';
  } else {
    out << text.str();
  }
  return violated || !lowered.diagnostics.empty() ? kExitDiagnostics : kExitAccepted;
}

int run_soundness_mode(const CliConfig& cfg, const StubEnv& env, std::ostream& out) {
  const SoundnessReport report =
      run_soundness(static_cast<std::size_t>(cfg.depth), env, CheckOptions{cfg.strict_any_subscribe});
  if (cfg.format == OutputFormat::Json) {
    json doc{{"programs", report.programs},
             {"accepted", report.accepted},
             {"rejected", report.rejected},
             {"unsound", report.unsound},
             {"falsePositiveRate", report.false_positive_rate()},
             {"witnesses", report.witnesses}};
    out << doc.dump(2) << '\n';
  } else {
    out << report.format();
  }
  return report.unsound == 0 ? kExitAccepted : kExitDiagnostics;
}

}  // namespace

EnvLoad load_env(const CliConfig& cfg) {
  EnvLoad result;
  StubEnv env = cfg.builtin_stubs ? builtin_env() : StubEnv{};
  for (const auto& path : cfg.stubs) {
    auto text = read_file(path);
    if (!text) {
      result.io_error = "cannot read " + path;
      return result;
    }
    StubParseResult parsed = parse_stub_file(*text, path, &env);
    if (!parsed.ok()) {
      result.diagnostics = std::move(parsed.diagnostics);
      return result;
    }
    MergeResult merged = merge(env, *parsed.stubs);
    if (!merged.diagnostics.empty()) {
      result.diagnostics = std::move(merged.diagnostics);
      return result;
    }
    env = std::move(merged.env);
  }
  result.env = std::move(env);
  return result;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  if (const char* v = std::getenv("RXCHECK_NO_BUILTIN_STUBS"); v && std::string_view(v) == "1") {
    cfg.builtin_stubs = false;
  }

  CLI::App app{"Refinement typechecker for UI-thread safety of stream chains", "rxcheck"};
  app.require_subcommand(1, 1);
  std::string format = "text";
  bool lenient = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--stubs", cfg.stubs, "Annotation stub file (repeatable)")->type_size(1)->allow_extra_args(false);
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_flag("--lenient-any-subscribe", lenient, "Admit UI callbacks on @AnyThread streams");
  };
  CLI::App* check = app.add_subcommand("check", "Typecheck MiniRx sources");
  add_common(check);
  check->add_option("sources", cfg.sources, "MiniRx source files");
  CLI::App* sound = app.add_subcommand("soundness", "Check generated programs against the runtime model");
  add_common(sound);
  sound->add_option("--depth", cfg.depth, "Maximum chain length");
  CLI::App* trace = app.add_subcommand("dump-trace", "Print runtime traces of every chain");
  add_common(trace);
  trace->add_option("sources", cfg.sources, "MiniRx source files");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitAccepted;
  } catch (const CLI::ParseError& e) {
    err << "rxcheck: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  cfg.format = format == "json" ? OutputFormat::Json : OutputFormat::Text;
  cfg.strict_any_subscribe = !lenient;
  if (sound->parsed()) {
    cfg.mode = CliMode::Soundness;
  } else if (trace->parsed()) {
    cfg.mode = CliMode::DumpTrace;
  }

  if (cfg.mode != CliMode::Soundness && cfg.sources.empty()) {
    err << "rxcheck: no input files\n" << (cfg.mode == CliMode::Check ? check : trace)->help();
    return kExitUsage;
  }
  if (cfg.mode == CliMode::Soundness && (cfg.depth < 0 || cfg.depth > kMaxDepth)) {
    err << "rxcheck: --depth must be between 0 and " << kMaxDepth << '\n';
    return kExitUsage;
  }

  EnvLoad env = load_env(cfg);
  if (!env.env) {
    if (!env.io_error.empty()) err << "rxcheck: " << env.io_error << '\n';
    for (const auto& d : env.diagnostics) err << format_text(d) << '\n';
    return kExitUsage;
  }

  switch (cfg.mode) {
    case CliMode::Check: return run_check(cfg, *env.env, out, err);
    case CliMode::DumpTrace: return run_dump_trace(cfg, *env.env, out, err);
    case CliMode::Soundness: return run_soundness_mode(cfg, *env.env, out);
  }
  return kExitUsage;
}

}  // namespace rxcheck
