#include "rxcheck/oracle.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "rxcheck/frontend.hpp"
#include "world.hpp"

namespace rxcheck {

using namespace ast;
using detail::World;

std::string_view to_string(StageOp op) {
  switch (op) {
    case StageOp::Filter: return "filter";
    case StageOp::Map: return "map";
    case StageOp::Take: return "take";
    case StageOp::Delay: return "delay";
    case StageOp::ObserveOn: return "observeOn";
    case StageOp::SwitchMap: return "switchMap";
    case StageOp::OnErrorReturn: return "onErrorReturn";
    case StageOp::Subscribe: return "subscribe";
  }
  return "?";
}

std::string_view to_string(RunThread t) { return t == RunThread::UI ? "UI" : "Comp"; }

std::optional<StageOp> stage_op_from_name(std::string_view name) {
  for (StageOp op : {StageOp::Filter, StageOp::Map, StageOp::Take, StageOp::Delay, StageOp::ObserveOn,
                     StageOp::SwitchMap, StageOp::OnErrorReturn, StageOp::Subscribe}) {
    if (to_string(op) == name) return op;
  }
  return std::nullopt;
}

std::string_view to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::SoundAccept: return "SoundAccept";
    case VerdictKind::SoundReject: return "SoundReject";
    case VerdictKind::Unsound: return "UNSOUND";
  }
  return "?";
}

std::size_t choice_points(const PipelineIR& ir) {
  std::size_t n = ir.source == SourceThread::Unknown ? 1 : 0;
  for (const auto& s : ir.stages) {
    if (s.op == StageOp::SwitchMap || (s.op == StageOp::ObserveOn && !s.scheduler)) ++n;
  }
  return n;
}

std::vector<Resolution> all_resolutions(const PipelineIR& ir) {
  const std::size_t n = choice_points(ir);
  std::vector<Resolution> out;
  for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
    Resolution r;
    for (std::size_t i = 0; i < n; ++i) r.choices.push_back((bits >> (n - 1 - i)) & 1U ? RunThread::Comp : RunThread::UI);
    out.push_back(std::move(r));
  }
  return out;
}

Trace run(const PipelineIR& ir, const Resolution& res) {
  std::size_t next = 0;
  auto choose = [&] { return next < res.choices.size() ? res.choices[next++] : RunThread::Comp; };
  RunThread thread = ir.source == SourceThread::UI     ? RunThread::UI
                     : ir.source == SourceThread::Comp ? RunThread::Comp
                                                       : choose();
  Trace trace;
  for (std::size_t i = 0; i < ir.stages.size(); ++i) {
    const Stage& s = ir.stages[i];
    TraceStep step;
    step.index = i;
    step.op = s.op;
    step.runs_on = thread;
    switch (s.op) {
      case StageOp::Delay: step.emits_on = RunThread::Comp; break;
      case StageOp::ObserveOn: step.emits_on = s.scheduler ? *s.scheduler : choose(); break;
      case StageOp::SwitchMap: step.emits_on = choose(); break;
      default: step.emits_on = thread; break;
    }
    step.violation = s.ui_callback && step.runs_on == RunThread::Comp;
    if (step.violation) {
      trace.violations.emplace_back(i, "UI-effectful " + std::string(to_string(s.op)) +
                                           " callback ran on a computation thread");
    }
    trace.steps.push_back(step);
    thread = step.emits_on;
  }
  return trace;
}

std::string format_trace(const Trace& trace) {
  std::string out;
  for (const auto& s : trace.steps) {
    const bool moves = s.op == StageOp::Delay || s.op == StageOp::ObserveOn;
    out += "stage " + std::to_string(s.index) + " " + std::string(to_string(s.op)) +
           " thread=" + std::string(to_string(moves ? s.emits_on : s.runs_on));
    if (s.violation) out += " VIOLATION";
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lowering

namespace {

using Locals = std::map<std::string, std::optional<TypeRef>>;

/// Static type of an expression by plain name resolution.
class Namer {
 public:
  explicit Namer(const World& w) : world_(w) {}

  std::optional<TypeRef> type_of(const Expr& e, const ClassDecl* cls, const Locals& locals) const {
    if (const auto* v = e.as<VarRef>()) {
      if (auto it = locals.find(v->name); it != locals.end()) return it->second;
      if (cls) {
        if (auto f = world_.find_field(cls->name.name, v->name)) return f;
      }
      if (world_.class_exists(v->name)) return class_ref(v->name);
      return std::nullopt;
    }
    if (const auto* f = e.as<FieldRef>()) {
      auto obj = type_of(*f->object, cls, locals);
      if (!obj) return std::nullopt;
      if (auto t = world_.find_field(class_name(*obj), f->name)) return t;
      if (is_class_ref(*obj)) return named_type(class_name(*obj));
      return std::nullopt;
    }
    if (e.as<This>() && cls) return world_.implicit_receiver(cls->name.name);
    if (const auto* c = e.as<MethodCall>()) {
      const World::Found found = resolve(*c, cls, locals);
      if (found.sig) return found.sig->return_type;
      return std::nullopt;
    }
    if (const auto* l = e.as<Literal>(); l && l->kind == Literal::Kind::String) return named_type("String");
    if (const auto* n = e.as<NewObject>()) return n->type;
    if (const auto* a = e.as<AnonClass>()) return a->type;
    return std::nullopt;
  }

  World::Found resolve(const MethodCall& c, const ClassDecl* cls, const Locals& locals) const {
    std::string owner;
    if (!c.receiver) {
      if (cls) owner = cls->name.name;
    } else if (auto t = type_of(**c.receiver, cls, locals)) {
      owner = class_name(*t);
    }
    if (owner.empty()) return {};
    return world_.find_method(owner, c.name, c.args.size());
  }

  static std::string class_name(const TypeRef& t) {
    if (t.kind == BaseKind::Stream) return "Observable";
    if (t.kind == BaseKind::Scheduler) return "Scheduler";
    if (is_class_ref(t)) return t.name.substr(1);
    return t.name;
  }

 private:
  // class names used as static receivers are marked with a leading '.'
  static TypeRef class_ref(const std::string& name) { return named_type("." + name); }
  static bool is_class_ref(const TypeRef& t) { return !t.name.empty() && t.name[0] == '.'; }

  const World& world_;
};

/// Decides whether running a callback touches the UI. A call counts when it
/// reaches a method whose declared effect is UI; other user methods are
/// followed into their bodies. Nested lambdas and anonymous classes are only
/// created, not run, so their bodies are skipped.
class UiScan {
 public:
  UiScan(const World& w, const StubEnv& env, const ResolvedProgram& p) : world_(w), namer_(w), env_(env), program_(p) {}

  bool callback(const Expr& arg, const ClassDecl* cls, const Locals& locals) {
    if (const auto* lam = arg.as<Lambda>()) {
      Locals inner = locals;
      for (const auto& p : lam->params) inner[p.name] = std::nullopt;
      if (lam->expr_body) return expr(**lam->expr_body, cls, inner);
      return body(lam->block_body, cls, inner);
    }
    if (const auto* anon = arg.as<AnonClass>()) {
      for (const auto& m : anon->methods) {
        if (!m.body) continue;
        Locals inner = locals;
        for (const auto& p : m.params) inner[p.name] = p.type;
        if (body(*m.body, cls, inner)) return true;
      }
      return false;
    }
    auto t = namer_.type_of(arg, cls, locals);
    if (!t) return false;
    if (const auto* q = t->effect(); q && *q == EffectQual::UI) return true;
    if (const ClassDecl* target = world_.user_class(Namer::class_name(*t))) {
      for (const auto& m : target->methods) {
        if (method(*target, m)) return true;
      }
    }
    return false;
  }

 private:
  bool body(const std::vector<Stmt>& stmts, const ClassDecl* cls, Locals locals) {
    for (const auto& s : stmts) {
      if (stmt(s, cls, locals)) return true;
    }
    return false;
  }

  bool stmt(const Stmt& s, const ClassDecl* cls, Locals& locals) {
    if (const auto* d = s.as<LocalDecl>()) {
      const bool ui = expr(d->init, cls, locals);
      locals[d->name.name] = d->type;
      return ui;
    }
    if (const auto* e = s.as<ExprStmt>()) return expr(e->expr, cls, locals);
    if (const auto* a = s.as<Assign>()) return expr(a->target, cls, locals) || expr(a->value, cls, locals);
    if (const auto* r = s.as<Return>()) return r->value && expr(*r->value, cls, locals);
    if (const auto* i = s.as<If>()) {
      return expr(i->cond, cls, locals) || body(i->then_body, cls, locals) ||
             (i->else_body && body(*i->else_body, cls, locals));
    }
    if (const auto* b = s.as<Block>()) return body(b->body, cls, locals);
    return false;
  }

  bool expr(const Expr& e, const ClassDecl* cls, Locals& locals) {
    if (const auto* f = e.as<FieldRef>()) return expr(*f->object, cls, locals);
    if (const auto* n = e.as<NewObject>()) return any_arg(n->args, cls, locals);
    if (const auto* a = e.as<AnonClass>()) return any_arg(a->args, cls, locals);
    const auto* c = e.as<MethodCall>();
    if (!c) return false;
    if (c->receiver && expr(**c->receiver, cls, locals)) return true;
    if (any_arg(c->args, cls, locals)) return true;
    return call(*c, cls, locals);
  }

  bool any_arg(const std::vector<Expr>& args, const ClassDecl* cls, Locals& locals) {
    for (const auto& a : args) {
      if (expr(a, cls, locals)) return true;
    }
    return false;
  }

  bool call(const MethodCall& c, const ClassDecl* cls, const Locals& locals) {
    std::optional<TypeRef> recv;
    bool owner_known = !c.receiver && cls;
    if (c.receiver) {
      recv = namer_.type_of(**c.receiver, cls, locals);
      owner_known = recv.has_value();
    }
    if (owner_known) {
      const World::Found found = namer_.resolve(c, cls, locals);
      if (found.sig) return effectful(found, recv);
    }
    return by_name(c.name, c.args.size());
  }

  bool effectful(const World::Found& found, const std::optional<TypeRef>& recv) {
    const MethodSig& sig = *found.sig;
    if (sig.effect == EffectQual::UI) return true;
    if (sig.effect == EffectQual::PolyUI) {
      if (recv) {
        if (const auto* q = recv->effect()) return *q == EffectQual::UI;
      }
    }
    if (found.decl) {
      if (const ClassDecl* owner = world_.user_class(sig.owner)) return method(*owner, *found.decl);
    }
    return false;
  }

  // receiver type unknown: any same-named UI method counts
  bool by_name(const std::string& name, std::size_t arity) {
    for (const auto& [key, sig] : env_.methods()) {
      if (key.name == name && key.arity == arity && sig.effect == EffectQual::UI) return true;
    }
    for (const auto& pkg : program_.program.packages) {
      for (const auto& cls : pkg.classes) {
        for (const auto& m : cls.methods) {
          if (m.name.name == name && m.params.size() == arity && method(cls, m)) return true;
        }
      }
    }
    return false;
  }

  bool method(const ClassDecl& cls, const MethodDecl& m) {
    if (m.effect == EffectQual::UI) return true;
    if (!m.body) return false;
    if (auto it = memo_.find(&m); it != memo_.end()) return it->second;
    if (!active_.insert(&m).second) return false;
    Locals locals;
    for (const auto& p : m.params) locals[p.name] = p.type;
    const bool ui = body(*m.body, &cls, locals);
    active_.erase(&m);
    memo_[&m] = ui;
    return ui;
  }

  const World& world_;
  Namer namer_;
  const StubEnv& env_;
  const ResolvedProgram& program_;
  std::map<const MethodDecl*, bool> memo_;
  std::set<const MethodDecl*> active_;
};

class Lowerer {
 public:
  Lowerer(const ResolvedProgram& p, const StubEnv& env) : program_(p), env_(env), world_(p, env), namer_(world_),
                                                           scan_(world_, env, p) {}

  LowerResult run() {
    for (const auto& pkg : program_.program.packages) {
      for (const auto& cls : pkg.classes) {
        for (const auto& m : cls.methods) {
          if (!m.body) continue;
          Locals locals;
          for (const auto& p : m.params) locals[p.name] = p.type;
          stmts(*m.body, cls, locals);
        }
      }
    }
    sort_diagnostics(out_.diagnostics);
    return std::move(out_);
  }

 private:
  void stmts(const std::vector<Stmt>& body, const ClassDecl& cls, Locals locals) {
    for (const auto& s : body) {
      if (const auto* d = s.as<LocalDecl>()) {
        locals[d->name.name] = d->type;
      } else if (const auto* e = s.as<ExprStmt>()) {
        if (const auto* c = e->expr.as<MethodCall>(); c && c->name == "subscribe" && c->receiver) {
          chain(e->expr, cls, locals);
        }
      } else if (const auto* i = s.as<If>()) {
        stmts(i->then_body, cls, locals);
        if (i->else_body) stmts(*i->else_body, cls, locals);
      } else if (const auto* b = s.as<Block>()) {
        stmts(b->body, cls, locals);
      }
    }
  }

  void chain(const Expr& top, const ClassDecl& cls, const Locals& locals) {
    std::vector<const Expr*> calls;
    const Expr* cur = &top;
    while (const auto* c = cur->as<MethodCall>()) {
      if (!c->receiver) break;
      if (!stage_op_from_name(c->name)) {
        if (env_.lookup("Observable", c->name, c->args.size())) {
          out_.diagnostics.push_back(make_diagnostic(
              codes::kOracleUnsupported, cover(c->name_span, cur->span),
              "operator " + c->name + " has no runtime model; this chain is not simulated"));
          return;
        }
        break;
      }
      calls.push_back(cur);
      cur = &**c->receiver;
    }
    PipelineIR ir;
    ir.span = top.span;
    ir.source = source_thread(*cur, cls, locals);
    for (auto it = calls.rbegin(); it != calls.rend(); ++it) {
      const auto& c = *(*it)->as<MethodCall>();
      Stage s;
      s.op = *stage_op_from_name(c.name);
      s.call = *it;
      s.span = cover(c.name_span, (*it)->span);
      for (const auto& a : c.args) s.ui_callback = s.ui_callback || scan_.callback(a, &cls, locals);
      if (s.op == StageOp::ObserveOn && !c.args.empty()) s.scheduler = fixed_thread(c.args[0], cls, locals);
      if (s.op == StageOp::ObserveOn || s.op == StageOp::Delay || s.op == StageOp::Take) s.ui_callback = false;
      ir.stages.push_back(std::move(s));
    }
    out_.pipelines.push_back(std::move(ir));
  }

  std::optional<RunThread> fixed_thread(const Expr& e, const ClassDecl& cls, const Locals& locals) const {
    auto t = namer_.type_of(e, &cls, locals);
    if (!t) return std::nullopt;
    const ThreadQual* q = t->thread();
    if (!q) return std::nullopt;
    if (*q == ThreadQual::UI) return RunThread::UI;
    if (*q == ThreadQual::Comp) return RunThread::Comp;
    return std::nullopt;
  }

  SourceThread source_thread(const Expr& e, const ClassDecl& cls, const Locals& locals) const {
    auto t = namer_.type_of(e, &cls, locals);
    if (!t) return SourceThread::Unknown;
    const ThreadQual* q = t->thread();
    if (!q) return SourceThread::Unknown;
    switch (*q) {
      case ThreadQual::UI: return SourceThread::UI;
      case ThreadQual::Comp: return SourceThread::Comp;
      // never emits, so no callback can run off the UI thread
      case ThreadQual::Bottom: return SourceThread::UI;
      default: return SourceThread::Unknown;
    }
  }

  const ResolvedProgram& program_;
  const StubEnv& env_;
  World world_;
  Namer namer_;
  UiScan scan_;
  LowerResult out_;
};

}  // namespace

LowerResult lower(const ResolvedProgram& p, const StubEnv& env) { return Lowerer(p, env).run(); }

Verdict check_soundness(const ResolvedProgram& p, const StubEnv& env, const CheckOptions& options) {
  Verdict v;
  CheckResult checked = check_program(p, env, options);
  LowerResult lowered = lower(p, env);
  v.diagnostics = std::move(checked.diagnostics);
  v.unsupported_chains = lowered.diagnostics.size();
  for (const auto& ir : lowered.pipelines) {
    for (const auto& res : all_resolutions(ir)) {
      Trace t = run(ir, res);
      if (t.ok()) continue;
      v.any_runtime_violation = true;
      if (!v.witness) v.witness = Witness{ir, res, std::move(t)};
    }
  }
  if (!v.diagnostics.empty()) {
    v.kind = VerdictKind::SoundReject;
  } else {
    v.kind = v.any_runtime_violation ? VerdictKind::Unsound : VerdictKind::SoundAccept;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Program generation

namespace {

Expr op_call(Expr recv, GenOp op) {
  auto label_call = [](const char* text) {
    return make_expr_stmt(make_call(make_var("label"), "setText", {make_literal(Literal::Kind::String, text)}));
  };
  switch (op) {
    case GenOp::Filter:
      return make_call(std::move(recv), "filter", {make_lambda({"x"}, make_literal(Literal::Kind::Bool, "true"))});
    case GenOp::Map: return make_call(std::move(recv), "map", {make_lambda({"x"}, make_var("x"))});
    case GenOp::Take: return make_call(std::move(recv), "take", {make_literal(Literal::Kind::Int, "3")});
    case GenOp::Delay:
      return make_call(std::move(recv), "delay",
                       {make_literal(Literal::Kind::Int, "100"), make_field(make_var("TimeUnit"), "MILLISECONDS")});
    case GenOp::ObserveOnUI:
      return make_call(std::move(recv), "observeOn", {make_call(make_var("AndroidSchedulers"), "mainThread", {})});
    case GenOp::ObserveOnComp:
      return make_call(std::move(recv), "observeOn", {make_call(make_var("Schedulers"), "computation", {})});
    case GenOp::SwitchMap: return make_call(std::move(recv), "switchMap", {make_lambda({"x"}, make_var("inner"))});
    case GenOp::OnErrorReturnSafe:
      return make_call(std::move(recv), "onErrorReturn", {make_lambda({"e"}, make_var("fallback"))});
    case GenOp::OnErrorReturnUI:
      return make_call(std::move(recv), "onErrorReturn",
                       {make_block_lambda({"e"}, {label_call("error"), make_return(make_var("fallback"))})});
  }
  return recv;
}

std::string_view op_label(GenOp op) {
  switch (op) {
    case GenOp::Filter: return "filter";
    case GenOp::Map: return "map";
    case GenOp::Take: return "take";
    case GenOp::Delay: return "delay";
    case GenOp::ObserveOnUI: return "observeOn(UI)";
    case GenOp::ObserveOnComp: return "observeOn(Comp)";
    case GenOp::SwitchMap: return "switchMap";
    case GenOp::OnErrorReturnSafe: return "onErrorReturn(safe)";
    case GenOp::OnErrorReturnUI: return "onErrorReturn(UI)";
  }
  return "?";
}

FieldDecl field(TypeRef type, std::string name) {
  FieldDecl f;
  f.type = std::move(type);
  f.name = Ident{std::move(name), {}};
  return f;
}

}  // namespace

std::string generated_source(ThreadQual source, const std::vector<GenOp>& ops, bool ui_subscriber) {
  ClassDecl item;
  item.name = Ident{"Item", {}};

  ClassDecl gen;
  gen.name = Ident{"Generated", {}};
  gen.fields.push_back(field(stream_type(source, named_type("Item")), "source"));
  gen.fields.push_back(field(stream_type(std::nullopt, named_type("Item")), "inner"));
  gen.fields.push_back(field(named_type("Item"), "fallback"));
  gen.fields.push_back(field(named_type("TextView"), "label"));

  Expr chain = make_var("source");
  for (GenOp op : ops) chain = op_call(std::move(chain), op);
  std::vector<Stmt> on_next;
  if (ui_subscriber) {
    on_next.push_back(
        make_expr_stmt(make_call(make_var("label"), "setText", {make_literal(Literal::Kind::String, "item")})));
  }
  chain = make_call(std::move(chain), "subscribe", {make_block_lambda({"x"}, std::move(on_next))});

  MethodDecl run_method;
  run_method.return_type = void_type();
  run_method.name = Ident{"run", {}};
  run_method.body = std::vector<Stmt>{};
  run_method.body->push_back(make_expr_stmt(std::move(chain)));
  gen.methods.push_back(std::move(run_method));

  Program p;
  p.packages.emplace_back();
  p.packages[0].classes.push_back(std::move(item));
  p.packages[0].classes.push_back(std::move(gen));
  return print_program(p);
}

std::string GeneratedProgram::describe() const {
  std::string out = std::string(annotation_name(source)) + " source";
  for (GenOp op : ops) out += "." + std::string(op_label(op));
  out += ui_subscriber ? ".subscribe(UI)" : ".subscribe(safe)";
  return out;
}

std::size_t expected_program_count(std::size_t max_len) {
  std::size_t total = 0;
  std::size_t block = 1;
  for (std::size_t len = 0; len <= max_len; ++len) {
    total += 6 * block;
    block *= kGenOpCount;
  }
  return total;
}

ProgramEnumerator::ProgramEnumerator(std::size_t max_len, const StubEnv& env)
    : max_len_(max_len), env_(env), total_(expected_program_count(max_len)) {}

std::optional<GeneratedProgram> ProgramEnumerator::next() {
  if (produced_ >= total_) return std::nullopt;
  static constexpr ThreadQual kSources[] = {ThreadQual::UI, ThreadQual::Comp, ThreadQual::Any};

  GeneratedProgram g;
  g.index = produced_;
  std::size_t idx = produced_++;
  std::size_t len = 0;
  std::size_t block = 6;
  while (idx >= block && len < max_len_) {
    idx -= block;
    block *= kGenOpCount;
    ++len;
  }
  std::size_t seq = idx / 6;
  const std::size_t rest = idx % 6;
  g.ops.assign(len, GenOp::Filter);
  for (std::size_t i = len; i-- > 0;) {
    g.ops[i] = static_cast<GenOp>(seq % kGenOpCount);
    seq /= kGenOpCount;
  }
  g.source = kSources[rest / 2];
  g.ui_subscriber = rest % 2 == 1;
  g.text = generated_source(g.source, g.ops, g.ui_subscriber);

  ParseResult parsed = parse_program({SourceFile{"generated_" + std::to_string(g.index) + ".mrx", g.text}});
  if (!parsed.ok()) {
    throw std::logic_error("generated program does not parse: " + format_text(parsed.diagnostics.front()));
  }
  ResolveResult resolved = resolve_annotations(*parsed.program, env_);
  if (!resolved.diagnostics.empty()) {
    throw std::logic_error("generated program does not resolve: " + format_text(resolved.diagnostics.front()));
  }
  g.program = std::move(resolved.resolved);
  return g;
}

std::string SoundnessReport::format() const {
  char rate[32];
  std::snprintf(rate, sizeof rate, "%.4f", false_positive_rate());
  std::ostringstream os;
  os << "programs: " << programs << '\n'
     << "accepted: " << accepted << '\n'
     << "rejected: " << rejected << '\n'
     << "unsound: " << unsound << '\n'
     << "false-positive-rate: " << rate << '\n';
  for (const auto& w : witnesses) os << w;
  return os.str();
}

SoundnessReport run_soundness(std::size_t depth, const StubEnv& env, const CheckOptions& options) {
  SoundnessReport report;
  ProgramEnumerator gen(depth, env);
  while (auto g = gen.next()) {
    ++report.programs;
    const Verdict v = check_soundness(g->program, env, options);
    report.unsupported += v.unsupported_chains;
    switch (v.kind) {
      case VerdictKind::SoundAccept: ++report.accepted; break;
      case VerdictKind::SoundReject:
        ++report.rejected;
        if (!v.any_runtime_violation) ++report.false_positives;
        break;
      case VerdictKind::Unsound: {
        ++report.accepted;
        ++report.unsound;
        std::string w = "UNSOUND #" + std::to_string(g->index) + " " + g->describe() + "\n";
        w += "  choices:";
        for (RunThread t : v.witness->resolution.choices) w += " " + std::string(to_string(t));
        if (v.witness->resolution.choices.empty()) w += " none";
        w += '\n';
        std::istringstream lines(format_trace(v.witness->trace));
        for (std::string line; std::getline(lines, line);) w += "  " + line + '\n';
        report.witnesses.push_back(std::move(w));
        break;
      }
    }
  }
  return report;
}

}  // namespace rxcheck
