#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rxcheck/ast.hpp"
#include "rxcheck/diagnostic.hpp"
#include "rxcheck/resolve.hpp"
#include "rxcheck/stubs.hpp"
#include "rxcheck/typesys.hpp"

namespace rxcheck {

// Runtime model of stream pipelines. The operator semantics below are fixed
// here and do not consult stubs: this is what the stubs are checked against.

enum class RunThread { UI, Comp };
enum class SourceThread { UI, Comp, Unknown };

enum class StageOp { Filter, Map, Take, Delay, ObserveOn, SwitchMap, OnErrorReturn, Subscribe };

std::string_view to_string(StageOp op);
std::string_view to_string(RunThread t);
std::optional<StageOp> stage_op_from_name(std::string_view name);

struct Stage {
  StageOp op = StageOp::Filter;
  bool ui_callback = false;               // some callback of this stage touches the UI
  std::optional<RunThread> scheduler;     // observeOn only; absent means either thread
  const ast::Expr* call = nullptr;        // into the lowered program
  Span span;
};

struct PipelineIR {
  SourceThread source = SourceThread::Unknown;
  std::vector<Stage> stages;  // non-empty, ends with Subscribe
  Span span;
};

/// One thread per nondeterministic point, in order: the source (if
/// Unknown), then each switchMap and each observeOn without a fixed thread.
struct Resolution {
  std::vector<RunThread> choices;
  bool operator==(const Resolution&) const = default;
};

std::size_t choice_points(const PipelineIR& ir);
std::vector<Resolution> all_resolutions(const PipelineIR& ir);

struct TraceStep {
  std::size_t index = 0;
  StageOp op = StageOp::Filter;
  RunThread runs_on = RunThread::UI;  // where the stage's callbacks execute
  RunThread emits_on = RunThread::UI; // thread of the stream it produces
  bool violation = false;
};

struct Trace {
  std::vector<TraceStep> steps;
  std::vector<std::pair<std::size_t, std::string>> violations;

  bool ok() const { return violations.empty(); }
};

/// Precondition: res.choices.size() == choice_points(ir).
Trace run(const PipelineIR& ir, const Resolution& res);

/// `stage <i> <operator> thread=<UI|Comp> [VIOLATION]`, one line per stage.
std::string format_trace(const Trace& trace);

struct LowerResult {
  std::vector<PipelineIR> pipelines;
  std::vector<Diagnostic> diagnostics;  // oracle.unsupported
};

/// One pipeline per statement-level chain ending in subscribe.
LowerResult lower(const ResolvedProgram& p, const StubEnv& env);

enum class VerdictKind { SoundAccept, SoundReject, Unsound };
std::string_view to_string(VerdictKind v);

struct Witness {
  PipelineIR ir;
  Resolution resolution;
  Trace trace;
};

struct Verdict {
  VerdictKind kind = VerdictKind::SoundAccept;
  std::vector<Diagnostic> diagnostics;  // from the checker
  std::optional<Witness> witness;       // first violating run, if any
  bool any_runtime_violation = false;
  std::size_t unsupported_chains = 0;
};

Verdict check_soundness(const ResolvedProgram& p, const StubEnv& env, const CheckOptions& options = {});

/// Operators the enumerator chains together.
enum class GenOp {
  Filter,
  Map,
  Take,
  Delay,
  ObserveOnUI,
  ObserveOnComp,
  SwitchMap,
  OnErrorReturnSafe,
  OnErrorReturnUI,
};
inline constexpr std::size_t kGenOpCount = 9;

struct GeneratedProgram {
  std::size_t index = 0;
  ThreadQual source = ThreadQual::Any;
  std::vector<GenOp> ops;
  bool ui_subscriber = false;
  std::string text;            // MiniRx source
  ResolvedProgram program;

  std::string describe() const;
};

/// Deterministic enumeration over chain length 0..max_len, then operator
/// sequence, then source qualifier (UI, Comp, Any), then subscriber (safe, UI).
class ProgramEnumerator {
 public:
  ProgramEnumerator(std::size_t max_len, const StubEnv& env);

  /// Programs this enumerator yields in total.
  std::size_t total() const { return total_; }

  std::optional<GeneratedProgram> next();

 private:
  std::size_t max_len_;
  const StubEnv& env_;
  std::size_t total_ = 0;
  std::size_t produced_ = 0;
};

/// 6 * sum(9^k, k = 0..max_len)
std::size_t expected_program_count(std::size_t max_len);

/// Text of one generated program.
std::string generated_source(ThreadQual source, const std::vector<GenOp>& ops, bool ui_subscriber);

struct SoundnessReport {
  std::size_t programs = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t unsound = 0;
  std::size_t false_positives = 0;  // rejected, yet no run violates
  std::size_t unsupported = 0;
  std::vector<std::string> witnesses;

  double false_positive_rate() const {
    return rejected == 0 ? 0.0 : static_cast<double>(false_positives) / static_cast<double>(rejected);
  }
  std::string format() const;
};

SoundnessReport run_soundness(std::size_t depth, const StubEnv& env, const CheckOptions& options = {});

}  // namespace rxcheck
