// One PASS/FAIL line per acceptance criterion; exit status is the verdict.
#include <array>
#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "rxcheck/cli.hpp"
#include "rxcheck/oracle.hpp"
#include "support.hpp"

using namespace rxcheck;
using namespace rxcheck::ast;

namespace {

// Collects failed expectations of one criterion.
struct Probe {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str() + err.str()};
}

bool contains(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

void delayed_ui(Probe& p) {
  auto bad = rxtest::analyze_file("testdata/delayed_ui.mrx");
  p.expect(bad.diagnostics.size() == 1, "delayed ui: exactly one diagnostic");
  if (!bad.diagnostics.empty()) {
    const Diagnostic& d = bad.diagnostics[0];
    p.expect(d.code == codes::kThreadViolation, "delayed ui: code rx.thread.violation");
    p.expect(contains(d.message, "Subscribing a callback with @UIEffect"), "delayed ui: message phrasing");
    p.expect(contains(d.message, "@CompThread"), "delayed ui: message names @CompThread");
  }
  p.expect(rxtest::analyze_file("testdata/delayed_ui_fixed.mrx").diagnostics.empty(), "fixed variant: no diagnostics");
  // and through the driver
  const CliRun r = cli({"check", rxtest::source_path("testdata/delayed_ui.mrx")});
  p.expect(r.code == kExitDiagnostics && contains(r.out, "[rx.thread.violation]"), "cli: exit 1 with violation");
  p.expect(cli({"check", rxtest::source_path("testdata/delayed_ui_fixed.mrx")}).code == kExitAccepted, "cli: fixed exit 0");
}

bool span_is(const Span& s, int line, int col, int end_col) {
  return s.line == line && s.col == col && s.end_line == line && s.end_col == end_col;
}

void effect_override(Probe& p) {
  auto a = rxtest::analyze_file("testdata/effect_override.mrx");
  p.expect(a.diagnostics.size() == 2, "exactly two diagnostics");
  if (a.diagnostics.size() != 2) return;
  p.expect(a.diagnostics[0].code == codes::kEffectTransitivity, "first is effect.transitivity");
  p.expect(span_is(a.diagnostics[0].span, 8, 28, 32), "transitivity span covers foo() in B#baz");
  p.expect(a.diagnostics[1].code == codes::kEffectInheritance, "second is effect.inheritance");
  p.expect(span_is(a.diagnostics[1].span, 10, 18, 20), "inheritance span covers B#bar");
}

void error_handler(Probe& p) {
  auto a = rxtest::analyze_file("testdata/error_handler.mrx");
  p.expect(a.diagnostics.size() == 1, "one diagnostic");
  if (!a.diagnostics.empty()) {
    p.expect(a.diagnostics[0].code == codes::kThreadViolation, "code rx.thread.violation");
    p.expect(contains(a.diagnostics[0].message, "onErrorReturn"), "names the error handler");
  }
  p.expect(rxtest::analyze_file("testdata/error_handler_fixed.mrx").diagnostics.empty(), "observeOn first: no diagnostics");
}

void lattices(Probe& p) {
  constexpr std::array threads{ThreadQual::Bottom, ThreadQual::Comp, ThreadQual::UI, ThreadQual::Any};
  constexpr std::array effects{EffectQual::Safe, EffectQual::PolyUI, EffectQual::UI};
  auto laws = [&](const auto& all, auto leq, auto join, const char* name) {
    std::size_t pairs = 0;
    for (auto a : all) {
      p.expect(leq(a, a), std::string(name) + ": reflexive");
      for (auto b : all) {
        ++pairs;
        if (leq(a, b) && leq(b, a)) p.expect(a == b, std::string(name) + ": antisymmetric");
        const auto j = join(a, b);
        p.expect(leq(a, j) && leq(b, j), std::string(name) + ": join is an upper bound");
        p.expect(j == join(b, a), std::string(name) + ": join commutes");
        p.expect(leq(a, b) == (j == b), std::string(name) + ": leq agrees with join");
        for (auto c : all) {
          if (leq(a, b) && leq(b, c)) p.expect(leq(a, c), std::string(name) + ": transitive");
          if (leq(a, c) && leq(b, c)) p.expect(leq(j, c), std::string(name) + ": join is least");
          p.expect(join(join(a, b), c) == join(a, join(b, c)), std::string(name) + ": join associates");
        }
      }
    }
    p.expect(pairs <= 25, std::string(name) + ": case budget");
  };
  laws(threads, thread_leq, thread_join, "thread");
  laws(effects, effect_leq, effect_join, "effect");
}

void soundness(Probe& p) {
  const CliRun r = cli({"soundness", "--depth", "3"});
  p.expect(r.code == kExitAccepted, "depth 3 exits 0");
  p.expect(contains(r.out, "programs: 4920\n"), "depth 3 covers 4920 programs");
  p.expect(contains(r.out, "unsound: 0\n"), "zero UNSOUND verdicts");
  const CliRun m = cli({"soundness", "--depth", "3", "--stubs",
                        rxtest::source_path("testdata/mutants/delay_preserving.astub")});
  p.expect(m.code != kExitAccepted, "mutated delay exits nonzero");
  p.expect(contains(m.out, "\nUNSOUND "), "mutated delay yields a witness");
}

void chain_table(Probe& p) {
  const StubEnv& env = rxtest::builtin();
  auto out = [&](const char* name, ThreadQual in, std::vector<ValueType> args) -> std::optional<ThreadQual> {
    const MethodSig* sig = env.lookup("Observable", name, args.size());
    if (!sig) return std::nullopt;
    CallTyping ct = instantiate_call(*sig, ValueType::of(stream_type(in, named_type("Item"))), args);
    if (!ct.result.thread()) return std::nullopt;
    return *ct.result.thread();
  };
  const ValueType any = ValueType::unknown();
  for (ThreadQual in : {ThreadQual::Bottom, ThreadQual::Comp, ThreadQual::UI, ThreadQual::Any}) {
    const std::string at = " on " + std::string(annotation_name(in));
    p.expect(out("delay", in, {ValueType::of(primitive_type("long")), any}) == ThreadQual::Comp, "delay" + at);
    p.expect(out("filter", in, {any}) == in, "filter" + at);
    p.expect(out("map", in, {any}) == in, "map" + at);
    p.expect(out("take", in, {ValueType::of(primitive_type("int"))}) == in, "take" + at);
    p.expect(out("onErrorReturn", in, {any}) == in, "onErrorReturn" + at);
    p.expect(out("switchMap", in, {any}) == ThreadQual::Any, "switchMap" + at);
    for (ThreadQual s : {ThreadQual::Comp, ThreadQual::UI, ThreadQual::Any}) {
      p.expect(out("observeOn", in, {ValueType::of(scheduler_type(s))}) == s,
               "observeOn(" + std::string(annotation_name(s)) + ")" + at);
    }
  }
}

void inference(Probe& p) {
  auto only = [&](const rxtest::Analysis& a, EffectQual e, const char* what) {
    p.expect(a.check.lambdas.size() == 1 && a.check.lambdas[0].effect == e, what);
  };
  only(rxtest::analyze("class S { @UIThread Observable<String> s; TextView label;\n"
                       "  void f() { s.subscribe(x -> { label.setText(x); }); } }\n"),
       EffectQual::UI, "UI body infers @UIEffect");
  only(rxtest::analyze("class S { Observable<String> s;\n  void f() { s.subscribe(x -> { }); } }\n"), EffectQual::Safe,
       "empty body infers @SafeEffect");
  auto nested = rxtest::analyze_file("testdata/nested_lambda.mrx");
  p.expect(nested.check.lambdas.size() == 2 && nested.check.lambdas[0].effect == EffectQual::Safe &&
               nested.check.lambdas[1].effect == EffectQual::UI,
           "nested lambda: outer safe, inner UI");
  p.expect(nested.diagnostics.empty(), "nested lambda program is accepted");

  ProgramEnumerator gen(3, rxtest::builtin());
  while (auto g = gen.next()) {
    const CheckResult cr = check_program(g->program, rxtest::builtin());
    for (const auto& name : rxtest::ui_calls_in_safe_lambdas(g->program, cr)) {
      p.expect(false, "re-scan: safe lambda calls " + name + " in " + g->describe());
    }
  }
}

struct Criterion {
  int id;
  const char* title;
  double budget_ms;  // 0: untimed
  std::function<void(Probe&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "motivating example regression", 1000, delayed_ui},
      {2, "transitivity and inheritance regression", 0, effect_override},
      {3, "error-handler regression", 0, error_handler},
      {4, "qualifier lattice laws", 1000, lattices},
      {5, "soundness fuzz and delay mutation", 60000, soundness},
      {6, "chain typing table", 0, chain_table},
      {7, "lambda inference and re-scan", 0, inference},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Probe probe;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(probe);
    } catch (const std::exception& e) {
      probe.failures.push_back(std::string("exception: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_ms > 0 && ms > c.budget_ms) {
      probe.failures.push_back("took " + std::to_string(ms) + " ms, budget " + std::to_string(c.budget_ms) + " ms");
    }
    const bool ok = probe.failures.empty();
    failed += ok ? 0 : 1;
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.1f ms", ms);
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " (" << timing << ")\n";
    for (const auto& f : probe.failures) std::cout << "    " << f << '\n';
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
