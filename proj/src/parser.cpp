#include "parser.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "lexer.hpp"
#include "rxcheck/frontend.hpp"

namespace rxcheck::detail {

using namespace ast;

namespace {

bool is_modifier(std::string_view w) {
  return w == "public" || w == "private" || w == "protected" || w == "static" || w == "final" ||
         w == "abstract";
}

bool is_primitive(std::string_view w) { return w == "int" || w == "long" || w == "boolean" || w == "double"; }

enum class AnnoKind { MethodEffect, Override, Class, Package, ThreadUse, EffectUse, Unknown };

AnnoKind classify(std::string_view name) {
  if (effect_from_method_annotation(name)) return AnnoKind::MethodEffect;
  if (name == "Override") return AnnoKind::Override;
  if (name == "UIType" || name == "PolyUIType") return AnnoKind::Class;
  if (name == "UIPackage") return AnnoKind::Package;
  if (thread_from_annotation(name)) return AnnoKind::ThreadUse;
  if (effect_from_type_use(name)) return AnnoKind::EffectUse;
  return AnnoKind::Unknown;
}

struct Prefix {
  std::vector<Annotation> annotations;
  std::vector<std::string> modifiers;
  Span start;
  bool empty() const { return annotations.empty() && modifiers.empty(); }
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, ParseMode mode) : toks_(std::move(tokens)), mode_(mode) {}

  FileParse run() {
    FileParse out;
    try {
      parse_file_body(out);
    } catch (const SyntaxError& e) {
      diags_.push_back(make_diagnostic(codes::kParseError, e.span, e.what()));
    }
    out.diagnostics = std::move(diags_);
    return out;
  }

 private:
  // --- token helpers -------------------------------------------------------
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::Punct && t.text == p;
  }
  bool is_kw(std::string_view k, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == Tok::Keyword && t.text == k;
  }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    last_ = t.span;
    return t;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::End ? "end of file" : "'" + t.text + "'";
    throw SyntaxError(t.span, msg + " (found " + found + ")");
  }
  const Token& expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    return advance();
  }
  void expect_kw(std::string_view k) {
    if (!is_kw(k)) fail("expected '" + std::string(k) + "'");
    advance();
  }
  Ident expect_ident(const std::string& what) {
    if (peek().kind != Tok::Ident) fail("expected " + what);
    const Token& t = advance();
    return Ident{t.text, t.span};
  }

  // --- annotations ---------------------------------------------------------
  Annotation parse_annotation() {
    const Token& at = expect_punct("@");
    Span start = at.span;
    if (peek().kind != Tok::Ident) fail("expected annotation name");
    const Token& name = advance();
    Annotation a{name.text, cover(start, name.span)};
    AnnoKind kind = classify(a.name);
    if (kind == AnnoKind::Unknown) throw SyntaxError(a.span, "unknown annotation @" + a.name);
    if (mode_ == ParseMode::Source && a.name == "BottomThread") {
      throw SyntaxError(a.span, "@BottomThread is internal to the checker and may only appear in stub files");
    }
    return a;
  }

  Prefix parse_prefix() {
    Prefix p;
    p.start = peek().span;
    for (;;) {
      if (is_punct("@")) {
        p.annotations.push_back(parse_annotation());
      } else if (peek().kind == Tok::Keyword && is_modifier(peek().text)) {
        p.modifiers.push_back(advance().text);
      } else {
        return p;
      }
    }
  }

  std::vector<Annotation> parse_type_annotations() {
    std::vector<Annotation> out;
    while (is_punct("@")) out.push_back(parse_annotation());
    return out;
  }

  static void apply_type_use(TypeRef& type, const std::vector<Annotation>& annos) {
    for (const auto& a : annos) {
      const AnnoKind kind = classify(a.name);
      const bool thread_base = type.kind == BaseKind::Stream || type.kind == BaseKind::Scheduler;
      std::optional<Qualifier> q;
      if (kind == AnnoKind::ThreadUse) {
        if (!thread_base) throw SyntaxError(a.span, "@" + a.name + " applies only to Observable or Scheduler types");
        q = *thread_from_annotation(a.name);
      } else if (kind == AnnoKind::EffectUse) {
        if (type.kind != BaseKind::Named) {
          throw SyntaxError(a.span, "@" + a.name + " applies only to callback or class types");
        }
        q = *effect_from_type_use(a.name);
      } else {
        throw SyntaxError(a.span, "@" + a.name + " is not a type qualifier");
      }
      if (type.qualifier) throw SyntaxError(a.span, "type already carries a qualifier");
      type.qualifier = q;
    }
  }

  // --- types ---------------------------------------------------------------
  bool at_type_start() const {
    return peek().kind == Tok::Ident || (peek().kind == Tok::Keyword && (is_primitive(peek().text) || is_kw("void")));
  }

  TypeRef parse_type(bool allow_void) {
    auto annos = parse_type_annotations();
    TypeRef t;
    if (peek().kind == Tok::Keyword && is_primitive(peek().text)) {
      t = primitive_type(advance().text);
    } else if (is_kw("void")) {
      if (!allow_void) fail("'void' is not allowed here");
      advance();
      t = void_type();
    } else if (peek().kind == Tok::Ident) {
      std::string name = advance().text;
      if (name == "Observable") {
        t.kind = BaseKind::Stream;
      } else if (name == "Scheduler") {
        t.kind = BaseKind::Scheduler;
      } else {
        t.kind = BaseKind::Named;
      }
      t.name = std::move(name);
      if (is_punct("<")) {
        advance();
        t.args.push_back(parse_type(false));
        while (is_punct(",")) {
          advance();
          t.args.push_back(parse_type(false));
        }
        expect_punct(">");
      }
    } else {
      fail("expected a type");
    }
    apply_type_use(t, annos);
    return t;
  }

  std::vector<std::string> parse_type_params() {
    std::vector<std::string> out;
    expect_punct("<");
    out.push_back(expect_ident("type parameter").name);
    while (is_punct(",")) {
      advance();
      out.push_back(expect_ident("type parameter").name);
    }
    expect_punct(">");
    return out;
  }

  // --- file structure ------------------------------------------------------
  void parse_file_body(FileParse& out) {
    std::optional<std::size_t> current;
    auto package_for_class = [&]() -> PackageDecl& {
      if (!current) {
        out.packages.push_back(PackageDecl{});
        current = out.packages.size() - 1;
      }
      return out.packages[*current];
    };
    while (!at_end()) {
      Prefix pre = parse_prefix();
      if (is_kw("package")) {
        if (!pre.modifiers.empty()) fail("modifiers are not allowed on a package declaration");
        for (const auto& a : pre.annotations) {
          if (classify(a.name) != AnnoKind::Package) {
            throw SyntaxError(a.span, "@" + a.name + " is not a package annotation");
          }
        }
        Span start = pre.annotations.empty() ? peek().span : pre.annotations.front().span;
        advance();
        std::string name = expect_ident("package name").name;
        while (is_punct(".")) {
          advance();
          name += "." + expect_ident("package name").name;
        }
        expect_punct(";");
        PackageDecl pkg;
        pkg.name = std::move(name);
        pkg.annotations = std::move(pre.annotations);
        pkg.span = cover(start, last_);
        out.packages.push_back(std::move(pkg));
        current = out.packages.size() - 1;
      } else if (is_kw("class") || is_kw("interface")) {
        PackageDecl& pkg = package_for_class();
        std::vector<ClassDecl> classes;
        parse_class(std::move(pre), std::nullopt, classes);
        // parse_class may invalidate `pkg` only if out.packages grows; it does not.
        for (auto& c : classes) pkg.classes.push_back(std::move(c));
      } else {
        fail("expected 'package', 'class' or 'interface'");
      }
    }
  }

  /// Appends nested classes first, then the class itself.
  void parse_class(Prefix pre, const std::optional<std::string>& enclosing, std::vector<ClassDecl>& out) {
    ClassDecl cls;
    for (const auto& a : pre.annotations) {
      if (classify(a.name) != AnnoKind::Class) throw SyntaxError(a.span, "@" + a.name + " is not a class annotation");
    }
    cls.annotations = std::move(pre.annotations);
    cls.modifiers = std::move(pre.modifiers);
    cls.is_interface = is_kw("interface");
    advance();
    cls.name = expect_ident("class name");
    cls.enclosing = enclosing;
    if (is_punct("<")) cls.type_params = parse_type_params();
    if (is_kw("extends")) {
      advance();
      cls.superclass = parse_type(false);
      if (cls.superclass->kind != BaseKind::Named && cls.superclass->kind != BaseKind::Stream) {
        fail("expected a class name after 'extends'");
      }
    }
    if (is_kw("implements")) {
      advance();
      cls.interfaces.push_back(parse_type(false));
      while (is_punct(",")) {
        advance();
        cls.interfaces.push_back(parse_type(false));
      }
    }
    expect_punct("{");
    while (!is_punct("}")) {
      if (at_end()) fail("expected '}' to close class " + cls.name.name);
      const std::size_t member_start = pos_;
      try {
        parse_member(cls, out);
      } catch (const SyntaxError& e) {
        diags_.push_back(make_diagnostic(codes::kParseError, e.span, e.what()));
        recover_member(member_start);
      }
    }
    expect_punct("}");
    out.push_back(std::move(cls));
  }

  // Skips from the start of a broken member to its end: a ';' at depth 0, the
  // '}' that closes its body, or the class's own closing '}' (not consumed).
  void recover_member(std::size_t member_start) {
    pos_ = member_start;
    int depth = 0;
    while (!at_end()) {
      if (is_punct("{")) {
        ++depth;
      } else if (is_punct("}")) {
        if (depth == 0) return;
        if (--depth == 0) {
          advance();
          return;
        }
      } else if (is_punct(";") && depth == 0) {
        advance();
        return;
      }
      advance();
    }
  }

  void parse_member(ClassDecl& cls, std::vector<ClassDecl>& out) {
    Prefix pre = parse_prefix();
    if (is_kw("class") || is_kw("interface")) {
      parse_class(std::move(pre), cls.name.name, out);
      return;
    }
    std::vector<std::string> type_params;
    if (is_punct("<")) {
      type_params = parse_type_params();
      auto more = parse_type_annotations();
      pre.annotations.insert(pre.annotations.end(), more.begin(), more.end());
    }
    if (!at_type_start()) fail("expected a field or method declaration");
    TypeRef type = parse_type(true);
    Ident name = expect_ident("member name");
    if (is_punct("(")) {
      cls.methods.push_back(finish_method(std::move(pre), std::move(type_params), std::move(type), std::move(name)));
      return;
    }
    if (!type_params.empty()) fail("type parameters on a field");
    if (type.kind == BaseKind::Void) throw SyntaxError(name.span, "field of type void");
    FieldDecl field;
    field.modifiers = std::move(pre.modifiers);
    for (const auto& a : pre.annotations) {
      const AnnoKind k = classify(a.name);
      if (k != AnnoKind::ThreadUse && k != AnnoKind::EffectUse) {
        throw SyntaxError(a.span, "@" + a.name + " is not allowed on a field");
      }
    }
    apply_type_use(type, pre.annotations);
    field.type = std::move(type);
    field.name = std::move(name);
    if (is_punct("=")) {
      advance();
      field.init = parse_expr();
    }
    expect_punct(";");
    cls.fields.push_back(std::move(field));
  }

  MethodDecl finish_method(Prefix pre, std::vector<std::string> type_params, TypeRef ret, Ident name) {
    MethodDecl m;
    m.modifiers = std::move(pre.modifiers);
    m.type_params = std::move(type_params);
    std::vector<Annotation> type_use;
    for (auto& a : pre.annotations) {
      const AnnoKind k = classify(a.name);
      if (k == AnnoKind::MethodEffect || k == AnnoKind::Override) {
        m.annotations.push_back(std::move(a));
      } else if (k == AnnoKind::ThreadUse || k == AnnoKind::EffectUse) {
        type_use.push_back(std::move(a));
      } else {
        throw SyntaxError(a.span, "@" + a.name + " is not allowed on a method");
      }
    }
    apply_type_use(ret, type_use);
    m.return_type = std::move(ret);
    m.name = std::move(name);
    expect_punct("(");
    if (!is_punct(")")) {
      do {
        if (is_punct(",")) advance();
        TypeRef pt = parse_type(false);
        if (is_kw("this")) {
          const Token& t = advance();
          if (m.receiver || !m.params.empty()) throw SyntaxError(t.span, "the receiver must be the first parameter");
          m.receiver = Param{std::move(pt), "this", t.span};
          continue;
        }
        Ident pn = expect_ident("parameter name");
        m.params.push_back(Param{std::move(pt), std::move(pn.name), pn.span});
      } while (is_punct(","));
    }
    expect_punct(")");
    if (is_punct(";")) {
      advance();
    } else if (is_punct("{")) {
      m.body = parse_block();
    } else {
      fail("expected method body or ';'");
    }
    return m;
  }

  // --- statements ----------------------------------------------------------
  std::vector<Stmt> parse_block() {
    expect_punct("{");
    std::vector<Stmt> body;
    while (!is_punct("}")) {
      if (at_end()) fail("expected '}'");
      body.push_back(parse_stmt());
    }
    expect_punct("}");
    return body;
  }

  std::vector<Stmt> parse_branch() {
    if (is_punct("{")) return parse_block();
    std::vector<Stmt> one;
    one.push_back(parse_stmt());
    return one;
  }

  bool at_local_decl() const {
    if (is_punct("@")) return true;
    if (peek().kind == Tok::Keyword && is_primitive(peek().text)) return true;
    if (peek().kind == Tok::Ident) {
      return peek(1).kind == Tok::Ident || (peek(1).kind == Tok::Punct && peek(1).text == "<");
    }
    return false;
  }

  Stmt parse_stmt() {
    const Span start = peek().span;
    if (is_punct("{")) {
      auto body = parse_block();
      return Stmt{Block{std::move(body)}, cover(start, last_)};
    }
    if (is_kw("return")) {
      advance();
      Return r;
      if (!is_punct(";")) r.value = parse_expr();
      expect_punct(";");
      return Stmt{std::move(r), cover(start, last_)};
    }
    if (is_kw("if")) {
      advance();
      expect_punct("(");
      Expr cond = parse_expr();
      expect_punct(")");
      If node{std::move(cond), parse_branch(), std::nullopt};
      if (is_kw("else")) {
        advance();
        node.else_body = parse_branch();
      }
      return Stmt{std::move(node), cover(start, last_)};
    }
    if (at_local_decl()) {
      TypeRef type = parse_type(false);
      Ident name = expect_ident("variable name");
      expect_punct("=");
      Expr init = parse_expr();
      expect_punct(";");
      return Stmt{LocalDecl{std::move(type), std::move(name), std::move(init)}, cover(start, last_)};
    }
    Expr e = parse_expr();
    if (is_punct("=")) {
      if (!e.as<VarRef>() && !e.as<FieldRef>()) fail("left side of '=' must be a variable or field");
      advance();
      Expr value = parse_expr();
      expect_punct(";");
      return Stmt{Assign{std::move(e), std::move(value)}, cover(start, last_)};
    }
    expect_punct(";");
    return Stmt{ExprStmt{std::move(e)}, cover(start, last_)};
  }

  // --- expressions ---------------------------------------------------------
  std::vector<Expr> parse_args() {
    expect_punct("(");
    std::vector<Expr> args;
    if (!is_punct(")")) {
      args.push_back(parse_expr());
      while (is_punct(",")) {
        advance();
        args.push_back(parse_expr());
      }
    }
    expect_punct(")");
    return args;
  }

  bool paren_lambda_ahead() const {
    // '(' [ident {',' ident}] ')' '->'
    std::size_t i = 1;
    if (!(peek(i).kind == Tok::Punct && peek(i).text == ")")) {
      for (;;) {
        if (peek(i).kind != Tok::Ident) return false;
        ++i;
        if (peek(i).kind == Tok::Punct && peek(i).text == ",") {
          ++i;
          continue;
        }
        break;
      }
      if (!(peek(i).kind == Tok::Punct && peek(i).text == ")")) return false;
    }
    return peek(i + 1).kind == Tok::Punct && peek(i + 1).text == "->";
  }

  Expr parse_lambda_rest(std::vector<Ident> params, const Span& start) {
    expect_punct("->");
    Lambda lam;
    lam.params = std::move(params);
    if (is_punct("{")) {
      lam.block_body = parse_block();
    } else {
      lam.expr_body = Box<Expr>(parse_expr());
    }
    return Expr{std::move(lam), cover(start, last_)};
  }

  Expr parse_expr() {
    Expr e = parse_primary();
    while (is_punct(".")) {
      advance();
      Ident name = expect_ident("member name after '.'");
      if (is_punct("(")) {
        MethodCall call;
        call.name = std::move(name.name);
        call.name_span = name.span;
        call.args = parse_args();
        Span span = cover(e.span, last_);
        call.receiver = Box<Expr>(std::move(e));
        e = Expr{std::move(call), span};
      } else {
        Span span = cover(e.span, name.span);
        e = Expr{FieldRef{Box<Expr>(std::move(e)), std::move(name.name)}, span};
      }
    }
    return e;
  }

  Expr parse_primary() {
    const Token& t = peek();
    const Span start = t.span;
    switch (t.kind) {
      case Tok::Int: advance(); return Expr{Literal{Literal::Kind::Int, t.text}, start};
      case Tok::Long: advance(); return Expr{Literal{Literal::Kind::Long, t.text}, start};
      case Tok::Double: advance(); return Expr{Literal{Literal::Kind::Double, t.text}, start};
      case Tok::String: advance(); return Expr{Literal{Literal::Kind::String, t.text}, start};
      default: break;
    }
    if (is_kw("true") || is_kw("false")) return Expr{Literal{Literal::Kind::Bool, advance().text}, start};
    if (is_kw("null")) {
      advance();
      return Expr{Literal{Literal::Kind::Null, "null"}, start};
    }
    if (is_kw("this")) {
      advance();
      return Expr{This{}, start};
    }
    if (is_kw("new")) return parse_new();
    if (t.kind == Tok::Ident) {
      if (is_punct("->", 1)) {
        Ident p = expect_ident("lambda parameter");
        return parse_lambda_rest({std::move(p)}, start);
      }
      Ident name = expect_ident("expression");
      if (is_punct("(")) {
        MethodCall call;
        call.name = std::move(name.name);
        call.name_span = name.span;
        call.args = parse_args();
        return Expr{std::move(call), cover(start, last_)};
      }
      return Expr{VarRef{std::move(name.name)}, start};
    }
    if (is_punct("(")) {
      if (paren_lambda_ahead()) {
        advance();
        std::vector<Ident> params;
        if (!is_punct(")")) {
          params.push_back(expect_ident("lambda parameter"));
          while (is_punct(",")) {
            advance();
            params.push_back(expect_ident("lambda parameter"));
          }
        }
        expect_punct(")");
        return parse_lambda_rest(std::move(params), start);
      }
      advance();
      Expr inner = parse_expr();
      expect_punct(")");
      return inner;
    }
    fail("expected an expression");
  }

  Expr parse_new() {
    const Span start = peek().span;
    expect_kw("new");
    TypeRef type = parse_type(false);
    if (type.kind == BaseKind::Primitive) fail("cannot instantiate a primitive type");
    std::vector<Expr> args = parse_args();
    if (!is_punct("{")) return Expr{NewObject{std::move(type), std::move(args)}, cover(start, last_)};
    AnonClass anon{std::move(type), std::move(args), {}};
    expect_punct("{");
    while (!is_punct("}")) {
      if (at_end()) fail("expected '}' to close anonymous class");
      Prefix pre = parse_prefix();
      std::vector<std::string> tps;
      if (is_punct("<")) tps = parse_type_params();
      TypeRef ret = parse_type(true);
      Ident name = expect_ident("method name");
      if (!is_punct("(")) fail("anonymous classes may only declare methods");
      anon.methods.push_back(finish_method(std::move(pre), std::move(tps), std::move(ret), std::move(name)));
    }
    expect_punct("}");
    return Expr{std::move(anon), cover(start, last_)};
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Span last_;
  ParseMode mode_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

FileParse parse_file(std::string_view text, const std::string& path, ParseMode mode) {
  std::vector<Token> tokens;
  try {
    tokens = lex(text, path);
  } catch (const SyntaxError& e) {
    FileParse out;
    out.diagnostics.push_back(make_diagnostic(codes::kParseError, e.span, e.what()));
    return out;
  }
  return Parser(std::move(tokens), mode).run();
}

}  // namespace rxcheck::detail

namespace rxcheck {

namespace {

std::string method_key(const ast::MethodDecl& m) { return m.name.name + "/" + std::to_string(m.params.size()); }

void check_duplicates(const ast::Program& program, std::vector<Diagnostic>& diags) {
  for (const auto& pkg : program.packages) {
    std::map<std::string, const ast::ClassDecl*> seen;
    for (const auto& cls : pkg.classes) {
      auto [it, inserted] = seen.emplace(cls.name.name, &cls);
      if (!inserted) {
        Diagnostic d = make_diagnostic(codes::kParseDuplicate, cls.name.span,
                                       "duplicate class " + cls.name.name +
                                           (pkg.name.empty() ? "" : " in package " + pkg.name));
        d.related.push_back(RelatedInfo{it->second->name.span, "previous declaration"});
        diags.push_back(std::move(d));
      }
      std::map<std::string, const ast::MethodDecl*> methods;
      for (const auto& m : cls.methods) {
        auto [mit, fresh] = methods.emplace(method_key(m), &m);
        if (!fresh) {
          Diagnostic d = make_diagnostic(codes::kParseDuplicate, m.name.span,
                                         "duplicate method " + cls.name.name + "#" + m.name.name + " with " +
                                             std::to_string(m.params.size()) + " parameter(s)");
          d.related.push_back(RelatedInfo{mit->second->name.span, "previous declaration"});
          diags.push_back(std::move(d));
        }
      }
      std::set<std::string> fields;
      for (const auto& f : cls.fields) {
        if (!fields.insert(f.name.name).second) {
          diags.push_back(make_diagnostic(codes::kParseDuplicate, f.name.span,
                                          "duplicate field " + cls.name.name + "." + f.name.name));
        }
      }
    }
  }
}

}  // namespace

ParseResult parse_program(const std::vector<SourceFile>& sources) {
  ParseResult result;
  ast::Program program;
  for (const auto& src : sources) {
    detail::FileParse file = detail::parse_file(src.text, src.path, detail::ParseMode::Source);
    for (auto& d : file.diagnostics) result.diagnostics.push_back(std::move(d));
    for (auto& pkg : file.packages) {
      auto it = std::find_if(program.packages.begin(), program.packages.end(),
                             [&](const ast::PackageDecl& p) { return p.name == pkg.name; });
      if (it == program.packages.end()) {
        // the default package is kept first so that printing preserves order
        if (pkg.name.empty()) {
          program.packages.insert(program.packages.begin(), std::move(pkg));
        } else {
          program.packages.push_back(std::move(pkg));
        }
        continue;
      }
      for (auto& a : pkg.annotations) it->annotations.push_back(std::move(a));
      for (auto& c : pkg.classes) it->classes.push_back(std::move(c));
    }
  }
  if (result.diagnostics.empty()) check_duplicates(program, result.diagnostics);
  sort_diagnostics(result.diagnostics);
  if (result.diagnostics.empty()) result.program = std::move(program);
  return result;
}

}  // namespace rxcheck
