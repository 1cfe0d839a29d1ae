#include <sstream>

#include "rxcheck/frontend.hpp"
#include "rxcheck/stubs.hpp"

namespace rxcheck {

using namespace ast;

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

class Printer {
 public:
  explicit Printer(const Program& p) : program_(p) {}

  std::string run() {
    for (const auto& pkg : program_.packages) {
      if (!pkg.name.empty()) {
        for (const auto& a : pkg.annotations) os_ << '@' << a.name << ' ';
        os_ << "package " << pkg.name << ";\n\n";
      }
      for (const auto& cls : pkg.classes) {
        if (!cls.enclosing) print_class(pkg, cls);
      }
    }
    return os_.str();
  }

 private:
  void indent() { os_ << std::string(depth_ * 2, ' '); }

  void print_modifiers(const std::vector<std::string>& mods) {
    for (const auto& m : mods) os_ << m << ' ';
  }

  void print_class(const PackageDecl& pkg, const ClassDecl& cls) {
    indent();
    for (const auto& a : cls.annotations) os_ << '@' << a.name << ' ';
    print_modifiers(cls.modifiers);
    os_ << (cls.is_interface ? "interface " : "class ") << cls.name.name;
    print_type_params(cls.type_params);
    if (cls.superclass) os_ << " extends " << format_type(*cls.superclass);
    for (std::size_t i = 0; i < cls.interfaces.size(); ++i) {
      os_ << (i ? ", " : " implements ") << format_type(cls.interfaces[i]);
    }
    os_ << " {\n";
    ++depth_;
    for (const auto& nested : pkg.classes) {
      if (nested.enclosing == cls.name.name) print_class(pkg, nested);
    }
    for (const auto& f : cls.fields) {
      indent();
      print_modifiers(f.modifiers);
      os_ << format_type(f.type) << ' ' << f.name.name;
      if (f.init) {
        os_ << " = ";
        print_expr(*f.init);
      }
      os_ << ";\n";
    }
    for (const auto& m : cls.methods) print_method(m);
    --depth_;
    indent();
    os_ << "}\n";
    if (depth_ == 0) os_ << '\n';
  }

  void print_type_params(const std::vector<std::string>& tps) {
    if (tps.empty()) return;
    os_ << '<';
    for (std::size_t i = 0; i < tps.size(); ++i) os_ << (i ? ", " : "") << tps[i];
    os_ << '>';
  }

  void print_method(const MethodDecl& m) {
    indent();
    for (const auto& a : m.annotations) os_ << '@' << a.name << ' ';
    print_modifiers(m.modifiers);
    if (!m.type_params.empty()) {
      print_type_params(m.type_params);
      os_ << ' ';
    }
    os_ << format_type(m.return_type) << ' ' << m.name.name << '(';
    bool first = true;
    if (m.receiver) {
      os_ << format_type(m.receiver->type) << " this";
      first = false;
    }
    for (const auto& p : m.params) {
      if (!first) os_ << ", ";
      os_ << format_type(p.type) << ' ' << p.name;
      first = false;
    }
    os_ << ')';
    if (!m.body) {
      os_ << ";\n";
      return;
    }
    os_ << ' ';
    print_block(*m.body);
    os_ << '\n';
  }

  void print_block(const std::vector<Stmt>& body) {
    os_ << "{\n";
    ++depth_;
    for (const auto& s : body) print_stmt(s);
    --depth_;
    indent();
    os_ << '}';
  }

  void print_stmt(const Stmt& s) {
    indent();
    std::visit([&](const auto& n) { stmt(n); }, s.node);
    os_ << '\n';
  }

  void stmt(const LocalDecl& d) {
    os_ << format_type(d.type) << ' ' << d.name.name << " = ";
    print_expr(d.init);
    os_ << ';';
  }
  void stmt(const ExprStmt& e) {
    print_expr(e.expr);
    os_ << ';';
  }
  void stmt(const Assign& a) {
    print_expr(a.target);
    os_ << " = ";
    print_expr(a.value);
    os_ << ';';
  }
  void stmt(const Return& r) {
    os_ << "return";
    if (r.value) {
      os_ << ' ';
      print_expr(*r.value);
    }
    os_ << ';';
  }
  void stmt(const If& i) {
    os_ << "if (";
    print_expr(i.cond);
    os_ << ") ";
    print_block(i.then_body);
    if (i.else_body) {
      os_ << " else ";
      print_block(*i.else_body);
    }
  }
  void stmt(const Block& b) { print_block(b.body); }

  void print_target(const Expr& e) {
    const bool wrap = e.as<Lambda>() != nullptr;
    if (wrap) os_ << '(';
    print_expr(e);
    if (wrap) os_ << ')';
  }

  void print_args(const std::vector<Expr>& args) {
    os_ << '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) os_ << ", ";
      print_expr(args[i]);
    }
    os_ << ')';
  }

  void print_expr(const Expr& e) {
    std::visit([&](const auto& n) { expr(n); }, e.node);
  }

  void expr(const Literal& l) {
    switch (l.kind) {
      case Literal::Kind::String: os_ << '"' << escape(l.text) << '"'; break;
      case Literal::Kind::Long: os_ << l.text << 'L'; break;
      default: os_ << l.text;
    }
  }
  void expr(const VarRef& v) { os_ << v.name; }
  void expr(const This&) { os_ << "this"; }
  void expr(const FieldRef& f) {
    print_target(*f.object);
    os_ << '.' << f.name;
  }
  void expr(const MethodCall& c) {
    if (c.receiver) {
      print_target(**c.receiver);
      os_ << '.';
    }
    os_ << c.name;
    print_args(c.args);
  }
  void expr(const Lambda& l) {
    if (l.params.size() == 1) {
      os_ << l.params[0].name;
    } else {
      os_ << '(';
      for (std::size_t i = 0; i < l.params.size(); ++i) os_ << (i ? ", " : "") << l.params[i].name;
      os_ << ')';
    }
    os_ << " -> ";
    if (l.expr_body) {
      print_expr(**l.expr_body);
    } else {
      print_block(l.block_body);
    }
  }
  void expr(const NewObject& n) {
    os_ << "new " << format_type(n.type);
    print_args(n.args);
  }
  void expr(const AnonClass& a) {
    os_ << "new " << format_type(a.type);
    print_args(a.args);
    os_ << " {\n";
    ++depth_;
    for (const auto& m : a.methods) print_method(m);
    --depth_;
    indent();
    os_ << '}';
  }

  const Program& program_;
  std::ostringstream os_;
  int depth_ = 0;
};

}  // namespace

std::string print_program(const Program& program) { return Printer(program).run(); }

}  // namespace rxcheck
