#include <doctest.h>

#include <set>

#include "rxcheck/oracle.hpp"
#include "support.hpp"

using namespace rxcheck;
using namespace rxcheck::ast;

namespace {

PipelineIR lower_one(const std::string& rel) {
  const ResolvedProgram p = rxtest::resolve_text(rxtest::slurp(rel));
  LowerResult r = lower(p, rxtest::builtin());
  REQUIRE(r.diagnostics.empty());
  REQUIRE(r.pipelines.size() == 1);
  PipelineIR ir = r.pipelines.front();
  for (auto& s : ir.stages) s.call = nullptr;  // `p` dies here
  return ir;
}

std::vector<std::pair<StageOp, bool>> shape(const PipelineIR& ir) {
  std::vector<std::pair<StageOp, bool>> out;
  for (const auto& s : ir.stages) out.emplace_back(s.op, s.ui_callback);
  return out;
}

Stage stage(StageOp op, bool ui = false, std::optional<RunThread> scheduler = std::nullopt) {
  Stage s;
  s.op = op;
  s.ui_callback = ui;
  s.scheduler = scheduler;
  return s;
}

ThreadQual as_qual(RunThread t) { return t == RunThread::UI ? ThreadQual::UI : ThreadQual::Comp; }

void check_inference_rescan(const ResolvedProgram& p, const CheckResult& r) {
  for (const auto& name : rxtest::ui_calls_in_safe_lambdas(p, r)) FAIL_CHECK("safe lambda calls " << name);
}

}  // namespace

TEST_CASE("lowering the motivating example") {
  PipelineIR ir = lower_one("testdata/delayed_ui.mrx");
  CHECK(ir.source == SourceThread::Unknown);
  CHECK(shape(ir) == std::vector<std::pair<StageOp, bool>>{{StageOp::Filter, false},
                                                          {StageOp::ObserveOn, false},
                                                          {StageOp::Delay, false},
                                                          {StageOp::Subscribe, true}});
  CHECK(ir.stages[1].scheduler == RunThread::UI);
  for (const auto& res : all_resolutions(ir)) {
    Trace t = run(ir, res);
    REQUIRE(t.violations.size() == 1);
    CHECK(t.violations[0].first == 3);
  }
  for (const auto& res : all_resolutions(lower_one("testdata/delayed_ui_fixed.mrx"))) {
    CHECK(run(lower_one("testdata/delayed_ui_fixed.mrx"), res).ok());
  }
}

TEST_CASE("lowering the error-handler example") {
  PipelineIR ir = lower_one("testdata/error_handler.mrx");
  CHECK(shape(ir) == std::vector<std::pair<StageOp, bool>>{
                         {StageOp::OnErrorReturn, true}, {StageOp::ObserveOn, false}, {StageOp::Subscribe, false}});
  REQUIRE(choice_points(ir) == 1);
  Trace comp = run(ir, Resolution{{RunThread::Comp}});
  REQUIRE(comp.violations.size() == 1);
  CHECK(comp.violations[0].first == 0);
  CHECK(run(ir, Resolution{{RunThread::UI}}).ok());

  PipelineIR fixed = lower_one("testdata/error_handler_fixed.mrx");
  for (const auto& res : all_resolutions(fixed)) CHECK(run(fixed, res).ok());
}

TEST_CASE("programs without chains lower to nothing") {
  const ResolvedProgram p = rxtest::resolve_text(rxtest::slurp("testdata/effect_override.mrx"));
  LowerResult r = lower(p, rxtest::builtin());
  CHECK(r.pipelines.empty());
  CHECK(r.diagnostics.empty());
}

TEST_CASE("nested callbacks only schedule work") {
  PipelineIR ir = lower_one("testdata/nested_lambda.mrx");
  REQUIRE(ir.stages.size() == 1);
  CHECK_FALSE(ir.stages[0].ui_callback);
}

TEST_CASE("UI work reached through helper methods") {
  const ResolvedProgram p = rxtest::resolve_text(
      "class S { @CompThread Observable<String> s; TextView label;\n"
      "  void show(String x) { label.setText(x); }\n"
      "  void f() { s.subscribe(x -> { show(x); }); } }\n");
  LowerResult r = lower(p, rxtest::builtin());
  REQUIRE(r.pipelines.size() == 1);
  CHECK(r.pipelines[0].stages[0].ui_callback);
  CHECK(r.pipelines[0].source == SourceThread::Comp);
}

TEST_CASE("unmodeled operators are reported") {
  auto parsed = parse_stub_file("class Observable<T> { @PolyThread Observable<T> distinct(@PolyThread Observable<T> this); }",
                                "x.astub", &rxtest::builtin());
  REQUIRE(parsed.ok());
  const StubEnv env = merge(rxtest::builtin(), *parsed.stubs).env;
  const ResolvedProgram p =
      rxtest::resolve_text("class S { Observable<String> s; void f() { s.distinct().subscribe(x -> { }); } }", env);
  LowerResult r = lower(p, env);
  CHECK(r.pipelines.empty());
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].code == codes::kOracleUnsupported);
  CHECK(check_soundness(p, env).unsupported_chains == 1);
}

TEST_CASE("run semantics per operator") {
  for (RunThread in : {RunThread::UI, RunThread::Comp}) {
    PipelineIR ir;
    ir.source = in == RunThread::UI ? SourceThread::UI : SourceThread::Comp;
    ir.stages = {stage(StageOp::Filter, true), stage(StageOp::Map), stage(StageOp::Take),
                 stage(StageOp::OnErrorReturn), stage(StageOp::Subscribe, true)};
    Trace t = run(ir, Resolution{});
    for (const auto& s : t.steps) {
      CHECK(s.runs_on == in);
      CHECK(s.emits_on == in);
    }
    CHECK(t.ok() == (in == RunThread::UI));
    if (in == RunThread::Comp) CHECK(t.violations.size() == 2);
  }
  PipelineIR moves;
  moves.source = SourceThread::UI;
  moves.stages = {stage(StageOp::Delay), stage(StageOp::ObserveOn, false, RunThread::UI), stage(StageOp::SwitchMap, true),
                  stage(StageOp::Subscribe)};
  REQUIRE(choice_points(moves) == 1);
  Trace t = run(moves, Resolution{{RunThread::Comp}});
  CHECK(t.steps[0].emits_on == RunThread::Comp);
  CHECK(t.steps[1].emits_on == RunThread::UI);
  // the mapper runs on the incoming thread; the inner stream picks its own
  CHECK(t.steps[2].runs_on == RunThread::UI);
  CHECK(t.steps[2].emits_on == RunThread::Comp);
  CHECK(t.steps[3].runs_on == RunThread::Comp);
  CHECK(t.ok());
  CHECK(run(moves, Resolution{{RunThread::Comp}}).steps.size() == 4);
}

TEST_CASE("resolutions enumerate every choice") {
  PipelineIR ir;
  ir.source = SourceThread::Unknown;
  ir.stages = {stage(StageOp::ObserveOn), stage(StageOp::SwitchMap), stage(StageOp::Subscribe)};
  CHECK(choice_points(ir) == 3);
  auto all = all_resolutions(ir);
  CHECK(all.size() == 8);
  std::set<std::vector<RunThread>> distinct;
  for (const auto& r : all) {
    CHECK(r.choices.size() == 3);
    distinct.insert(r.choices);
  }
  CHECK(distinct.size() == 8);
}

TEST_CASE("trace text") {
  PipelineIR ir;
  ir.source = SourceThread::UI;
  ir.stages = {stage(StageOp::Delay), stage(StageOp::Subscribe, true)};
  CHECK(format_trace(run(ir, Resolution{})) == "stage 0 delay thread=Comp\nstage 1 subscribe thread=Comp VIOLATION\n");
}

TEST_CASE("run is deterministic") {
  PipelineIR ir = lower_one("testdata/delayed_ui.mrx");
  for (const auto& res : all_resolutions(ir)) {
    CHECK(format_trace(run(ir, res)) == format_trace(run(ir, res)));
  }
}

TEST_CASE("verdicts on the corpus") {
  auto verdict = [](const char* rel) {
    const ResolvedProgram p = rxtest::resolve_text(rxtest::slurp(rel));
    return check_soundness(p, rxtest::builtin());
  };
  Verdict delayed = verdict("testdata/delayed_ui.mrx");
  CHECK(delayed.kind == VerdictKind::SoundReject);
  REQUIRE(delayed.diagnostics.size() == 1);
  CHECK(delayed.diagnostics[0].code == codes::kThreadViolation);
  CHECK(delayed.any_runtime_violation);
  CHECK(verdict("testdata/delayed_ui_fixed.mrx").kind == VerdictKind::SoundAccept);
  CHECK(verdict("testdata/error_handler.mrx").kind == VerdictKind::SoundReject);
  CHECK(verdict("testdata/error_handler_fixed.mrx").kind == VerdictKind::SoundAccept);
  CHECK(verdict("testdata/nested_lambda.mrx").kind == VerdictKind::SoundAccept);
}

TEST_CASE("enumeration counts") {
  CHECK(expected_program_count(0) == 6);
  CHECK(expected_program_count(1) == 60);
  CHECK(expected_program_count(2) == 546);
  CHECK(expected_program_count(3) == 4920);
  for (std::size_t len : {0U, 1U, 2U}) {
    ProgramEnumerator gen(len, rxtest::builtin());
    CHECK(gen.total() == expected_program_count(len));
    std::set<std::string> texts;
    std::size_t n = 0;
    while (auto g = gen.next()) {
      CHECK(g->index == n);
      CHECK(g->ops.size() <= len);
      texts.insert(g->text);
      ++n;
    }
    CHECK(n == expected_program_count(len));
    CHECK(texts.size() == n);
  }
}

TEST_CASE("enumeration is deterministic") {
  ProgramEnumerator a(2, rxtest::builtin());
  ProgramEnumerator b(2, rxtest::builtin());
  while (auto x = a.next()) {
    auto y = b.next();
    REQUIRE(y);
    CHECK(x->text == y->text);
    CHECK(x->program == y->program);
  }
  CHECK_FALSE(b.next());
}

TEST_CASE("enumeration order") {
  ProgramEnumerator gen(1, rxtest::builtin());
  auto first = gen.next();
  REQUIRE(first);
  CHECK(first->ops.empty());
  CHECK(first->source == ThreadQual::UI);
  CHECK_FALSE(first->ui_subscriber);
  CHECK(first->describe() == "@UIThread source.subscribe(safe)");
  for (int i = 0; i < 6; ++i) first = gen.next();
  REQUIRE(first);
  CHECK(first->ops == std::vector<GenOp>{GenOp::Filter});
  CHECK(first->describe() == "@UIThread source.filter.subscribe(safe)");
}

TEST_CASE("generated programs cover every operator") {
  const std::string text = generated_source(ThreadQual::Any,
                                            {GenOp::Filter, GenOp::Map, GenOp::Take, GenOp::Delay, GenOp::ObserveOnUI,
                                             GenOp::ObserveOnComp, GenOp::SwitchMap, GenOp::OnErrorReturnSafe,
                                             GenOp::OnErrorReturnUI},
                                            true);
  const ResolvedProgram p = rxtest::resolve_text(text);
  LowerResult r = lower(p, rxtest::builtin());
  CHECK(r.diagnostics.empty());
  REQUIRE(r.pipelines.size() == 1);
  std::vector<StageOp> ops;
  for (const auto& s : r.pipelines[0].stages) ops.push_back(s.op);
  CHECK(ops == std::vector<StageOp>{StageOp::Filter, StageOp::Map, StageOp::Take, StageOp::Delay, StageOp::ObserveOn,
                                    StageOp::ObserveOn, StageOp::SwitchMap, StageOp::OnErrorReturn,
                                    StageOp::OnErrorReturn, StageOp::Subscribe});
  CHECK_FALSE(r.pipelines[0].stages[7].ui_callback);
  CHECK(r.pipelines[0].stages[8].ui_callback);
  CHECK(r.pipelines[0].stages[9].ui_callback);
  CHECK(r.pipelines[0].source == SourceThread::Unknown);
}

TEST_CASE("no unsound verdicts up to three operators") {
  const SoundnessReport report = run_soundness(3, rxtest::builtin());
  CHECK(report.programs == 4920);
  CHECK(report.unsound == 0);
  CHECK(report.accepted + report.rejected == report.programs);
  CHECK(report.witnesses.empty());
  CHECK(report.format().rfind("programs: 4920\n", 0) == 0);
}

TEST_CASE("static thread bounds every runtime thread") {
  ProgramEnumerator gen(3, rxtest::builtin());
  std::size_t checked_stages = 0;
  while (auto g = gen.next()) {
    const CheckResult cr = check_program(g->program, rxtest::builtin());
    if (!cr.accepted()) continue;
    LowerResult lowered = lower(g->program, rxtest::builtin());
    for (const auto& ir : lowered.pipelines) {
      for (const auto& res : all_resolutions(ir)) {
        const Trace t = run(ir, res);
        for (std::size_t i = 0; i + 1 < ir.stages.size(); ++i) {
          auto it = cr.call_types.find(ir.stages[i].call);
          REQUIRE(it != cr.call_types.end());
          REQUIRE(it->second.thread());
          const ThreadQual bound = *it->second.thread();
          if (!thread_leq(as_qual(t.steps[i].emits_on), bound)) {
            FAIL_CHECK(g->describe() << " stage " << i << " ran on " << to_string(t.steps[i].emits_on)
                                     << " above " << annotation_name(bound));
          }
          ++checked_stages;
        }
      }
    }
  }
  CHECK(checked_stages > 0);
}

TEST_CASE("runtime operator semantics agree with the stub table") {
  const StubEnv& env = rxtest::builtin();
  for (RunThread in : {RunThread::UI, RunThread::Comp}) {
    const ValueType recv = ValueType::of(stream_type(as_qual(in), named_type("Item")));
    auto bound = [&](const char* name, std::vector<ValueType> args) {
      const MethodSig* sig = env.lookup("Observable", name, args.size());
      REQUIRE(sig);
      return *instantiate_call(*sig, recv, args).result.thread();
    };
    auto runtime = [&](Stage s) {
      PipelineIR ir;
      ir.source = in == RunThread::UI ? SourceThread::UI : SourceThread::Comp;
      ir.stages = {s, stage(StageOp::Subscribe)};
      std::vector<RunThread> out;
      for (const auto& res : all_resolutions(ir)) out.push_back(run(ir, res).steps[0].emits_on);
      return out;
    };
    const ValueType unknown = ValueType::unknown();
    const std::vector<std::pair<Stage, ThreadQual>> cases = {
        {stage(StageOp::Filter), bound("filter", {unknown})},
        {stage(StageOp::Map), bound("map", {unknown})},
        {stage(StageOp::Take), bound("take", {ValueType::of(primitive_type("int"))})},
        {stage(StageOp::OnErrorReturn), bound("onErrorReturn", {unknown})},
        {stage(StageOp::Delay), bound("delay", {ValueType::of(primitive_type("long")), unknown})},
        {stage(StageOp::SwitchMap), bound("switchMap", {unknown})},
        {stage(StageOp::ObserveOn, false, RunThread::UI),
         bound("observeOn", {ValueType::of(scheduler_type(ThreadQual::UI))})},
        {stage(StageOp::ObserveOn, false, RunThread::Comp),
         bound("observeOn", {ValueType::of(scheduler_type(ThreadQual::Comp))})},
        {stage(StageOp::ObserveOn), bound("observeOn", {ValueType::of(scheduler_type(ThreadQual::Any))})},
    };
    for (const auto& [s, q] : cases) {
      CAPTURE(to_string(s.op));
      for (RunThread t : runtime(s)) CHECK(thread_leq(as_qual(t), q));
    }
  }
}

TEST_CASE("inferred-safe lambdas make no UI calls") {
  for (const char* f : {"testdata/delayed_ui.mrx", "testdata/delayed_ui_fixed.mrx", "testdata/error_handler.mrx",
                        "testdata/error_handler_fixed.mrx", "testdata/nested_lambda.mrx"}) {
    auto a = rxtest::analyze_file(f);
    REQUIRE(a.program);
    check_inference_rescan(*a.program, a.check);
  }
  ProgramEnumerator gen(3, rxtest::builtin());
  std::size_t safe_lambdas = 0;
  while (auto g = gen.next()) {
    const CheckResult cr = check_program(g->program, rxtest::builtin());
    check_inference_rescan(g->program, cr);
    for (const auto& l : cr.lambdas) safe_lambdas += l.effect == EffectQual::Safe;
  }
  CHECK(safe_lambdas > 0);
}

TEST_CASE("a thread-preserving delay model is caught") {
  const StubEnv broken = rxtest::env_with("testdata/mutants/delay_preserving.astub");
  const SoundnessReport report = run_soundness(1, broken);
  CHECK(report.unsound > 0);
  REQUIRE_FALSE(report.witnesses.empty());
  CHECK(report.witnesses[0].rfind("UNSOUND ", 0) == 0);
  CHECK(report.witnesses[0].find("VIOLATION") != std::string::npos);
}

TEST_CASE("the lenient subscribe rule is unsound") {
  const SoundnessReport report = run_soundness(0, rxtest::builtin(), CheckOptions{false});
  CHECK(report.unsound > 0);
  CHECK(run_soundness(0, rxtest::builtin()).unsound == 0);
}

TEST_CASE("the re-scan sees UI calls in safe lambdas") {
  // the filter predicate is safe by its target, and the checker rejects the call
  auto a = rxtest::analyze(
      "class S { Observable<String> s; TextView label;\n"
      "  void f() { s.filter(x -> { label.setText(x); return true; }).subscribe(x -> { }); } }\n");
  REQUIRE(a.program);
  CHECK(rxtest::ui_calls_in_safe_lambdas(*a.program, a.check) == std::vector<std::string>{"setText"});
}
