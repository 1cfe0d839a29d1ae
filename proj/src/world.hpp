#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rxcheck/resolve.hpp"
#include "rxcheck/stubs.hpp"

namespace rxcheck::detail {

using namespace ast;

/// Uniform view of user and library classes.
class World {
 public:
  World(const ResolvedProgram& p, const StubEnv& env) : env_(env) {
    for (const auto& pkg : p.program.packages) {
      for (const auto& cls : pkg.classes) {
        user_.try_emplace(cls.name.name, &cls);
        for (const auto& m : cls.methods) sigs_.emplace(&m, make_sig(cls, m));
      }
    }
  }

  const ClassDecl* user_class(const std::string& name) const {
    auto it = user_.find(name);
    return it == user_.end() ? nullptr : it->second;
  }

  bool class_exists(const std::string& name) const {
    return user_class(name) != nullptr || env_.find_class(name) != nullptr;
  }

  ClassEffect annotation(const std::string& name) const {
    if (const auto* c = user_class(name)) return c->class_effect;
    if (const auto* c = env_.find_class(name)) return c->annotation;
    return ClassEffect::None;
  }

  std::vector<std::string> type_params(const std::string& name) const {
    if (const auto* c = user_class(name)) return c->type_params;
    if (const auto* c = env_.find_class(name)) return c->type_params;
    return {};
  }

  std::vector<std::string> supertypes(const std::string& name) const {
    std::vector<std::string> out;
    if (const auto* c = user_class(name)) {
      if (c->superclass) out.push_back(c->superclass->name);
      for (const auto& i : c->interfaces) out.push_back(i.name);
    } else if (const auto* s = env_.find_class(name)) {
      if (s->superclass) out.push_back(*s->superclass);
      for (const auto& i : s->interfaces) out.push_back(i);
    }
    return out;
  }

  const MethodSig& sig_of(const MethodDecl& m) const { return sigs_.at(&m); }

  struct Found {
    const MethodSig* sig = nullptr;
    const MethodDecl* decl = nullptr;  // user methods only
  };

  /// Searches `owner`, then its supertypes breadth-first. `skip_self` finds
  /// the overridden method instead.
  Found find_method(const std::string& owner, const std::string& name, std::size_t arity,
                    bool skip_self = false) const {
    std::vector<std::string> queue{owner};
    std::set<std::string> seen;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      const std::string cur = queue[i];
      if (!seen.insert(cur).second) continue;
      if (!(skip_self && i == 0)) {
        if (const auto* c = user_class(cur)) {
          for (const auto& m : c->methods) {
            if (m.name.name == name && m.params.size() == arity) return Found{&sigs_.at(&m), &m};
          }
        } else if (const MethodSig* s = env_.lookup(cur, name, arity)) {
          return Found{s, nullptr};
        }
      }
      for (auto& sup : supertypes(cur)) queue.push_back(std::move(sup));
    }
    if (owner != "Object" && !seen.count("Object")) {
      if (const MethodSig* s = env_.lookup("Object", name, arity)) return Found{s, nullptr};
    }
    return {};
  }

  std::optional<TypeRef> find_field(const std::string& owner, const std::string& name, bool* is_static = nullptr) const {
    std::vector<std::string> queue{owner};
    std::set<std::string> seen;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      if (!seen.insert(queue[i]).second) continue;
      if (const auto* c = user_class(queue[i])) {
        for (const auto& f : c->fields) {
          if (f.name.name == name) {
            if (is_static) {
              *is_static = std::find(f.modifiers.begin(), f.modifiers.end(), "static") != f.modifiers.end();
            }
            return f.type;
          }
        }
      }
      for (auto& sup : supertypes(queue[i])) queue.push_back(std::move(sup));
    }
    return std::nullopt;
  }

  bool is_subclass(const std::string& sub, const std::string& super) const {
    if (sub == super || super == "Object") return true;
    std::vector<std::string> queue{sub};
    std::set<std::string> seen;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      if (queue[i] == super) return true;
      if (!seen.insert(queue[i]).second) continue;
      for (auto& s : supertypes(queue[i])) queue.push_back(std::move(s));
    }
    return false;
  }

  /// Single abstract method of a functional interface.
  const MethodSig* sam(const std::string& iface) const {
    if (const auto* c = user_class(iface)) {
      if (!c->is_interface || c->methods.size() != 1) return nullptr;
      return &sigs_.at(&c->methods.front());
    }
    const StubClass* s = env_.find_class(iface);
    if (!s || !s->is_interface) return nullptr;
    const MethodSig* found = nullptr;
    for (const auto& [key, sig] : env_.methods()) {
      if (key.owner != iface) continue;
      if (found) return nullptr;
      found = &sig;
    }
    return found;
  }

  TypeRef implicit_receiver(const std::string& owner) const {
    std::vector<TypeRef> args;
    for (const auto& tp : type_params(owner)) args.push_back(TypeRef{BaseKind::TypeVar, tp, {}, std::nullopt});
    TypeRef t = named_type(owner, std::move(args));
    if (annotation(owner) == ClassEffect::PolyUIType) t.qualifier = EffectQual::PolyUI;
    return t;
  }

 private:
  MethodSig make_sig(const ClassDecl& cls, const MethodDecl& m) const {
    MethodSig sig;
    sig.owner = cls.name.name;
    sig.name = m.name.name;
    sig.effect = m.effect.value_or(EffectQual::Safe);
    std::vector<TypeRef> args;
    for (const auto& tp : cls.type_params) args.push_back(TypeRef{BaseKind::TypeVar, tp, {}, std::nullopt});
    if (m.receiver) {
      sig.receiver = m.receiver->type;
    } else {
      sig.receiver = named_type(cls.name.name, std::move(args));
      if (cls.class_effect == ClassEffect::PolyUIType) sig.receiver.qualifier = EffectQual::PolyUI;
    }
    for (const auto& p : m.params) {
      sig.params.push_back(p.type);
      sig.param_names.push_back(p.name);
    }
    sig.return_type = m.return_type;
    sig.is_static = m.is_static();
    sig.type_params = m.type_params;
    sig.owner_annotation = cls.class_effect;
    sig.span = m.name.span;
    return sig;
  }

  const StubEnv& env_;
  std::map<std::string, const ClassDecl*> user_;
  std::map<const MethodDecl*, MethodSig> sigs_;
};

}  // namespace rxcheck::detail
