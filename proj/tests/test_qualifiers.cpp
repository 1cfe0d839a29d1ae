#include <doctest.h>

#include <array>

#include "rxcheck/qualifiers.hpp"

using namespace rxcheck;

namespace {

constexpr std::array kThreads{ThreadQual::Bottom, ThreadQual::Comp, ThreadQual::UI, ThreadQual::Any};
constexpr std::array kEffects{EffectQual::Safe, EffectQual::PolyUI, EffectQual::UI};

}  // namespace

TEST_CASE("thread order is a partial order") {
  for (auto a : kThreads) {
    CHECK(thread_leq(a, a));
    for (auto b : kThreads) {
      if (thread_leq(a, b) && thread_leq(b, a)) CHECK(a == b);
      for (auto c : kThreads) {
        if (thread_leq(a, b) && thread_leq(b, c)) CHECK(thread_leq(a, c));
      }
    }
  }
}

TEST_CASE("thread order is the diamond") {
  CHECK(thread_leq(ThreadQual::Bottom, ThreadQual::Comp));
  CHECK(thread_leq(ThreadQual::Bottom, ThreadQual::UI));
  CHECK(thread_leq(ThreadQual::Comp, ThreadQual::Any));
  CHECK(thread_leq(ThreadQual::UI, ThreadQual::Any));
  CHECK_FALSE(thread_leq(ThreadQual::UI, ThreadQual::Comp));
  CHECK_FALSE(thread_leq(ThreadQual::Comp, ThreadQual::UI));
  CHECK_FALSE(thread_leq(ThreadQual::Any, ThreadQual::UI));
  CHECK(thread_join(ThreadQual::UI, ThreadQual::Comp) == ThreadQual::Any);
  CHECK(thread_meet(ThreadQual::UI, ThreadQual::Comp) == ThreadQual::Bottom);
}

TEST_CASE("thread join is the least upper bound") {
  for (auto a : kThreads) {
    for (auto b : kThreads) {
      const ThreadQual j = thread_join(a, b);
      CHECK(thread_leq(a, j));
      CHECK(thread_leq(b, j));
      CHECK(j == thread_join(b, a));
      for (auto u : kThreads) {
        if (thread_leq(a, u) && thread_leq(b, u)) CHECK(thread_leq(j, u));
      }
      CHECK(thread_join(a, a) == a);
      for (auto c : kThreads) CHECK(thread_join(thread_join(a, b), c) == thread_join(a, thread_join(b, c)));
      // absorption with meet
      CHECK(thread_join(a, thread_meet(a, b)) == a);
      CHECK(thread_meet(a, thread_join(a, b)) == a);
    }
  }
}

TEST_CASE("thread meet is the greatest lower bound") {
  for (auto a : kThreads) {
    for (auto b : kThreads) {
      const ThreadQual m = thread_meet(a, b);
      CHECK(thread_leq(m, a));
      CHECK(thread_leq(m, b));
      for (auto l : kThreads) {
        if (thread_leq(l, a) && thread_leq(l, b)) CHECK(thread_leq(l, m));
      }
    }
  }
}

TEST_CASE("leq agrees with join") {
  for (auto a : kThreads) {
    for (auto b : kThreads) CHECK(thread_leq(a, b) == (thread_join(a, b) == b));
  }
  for (auto a : kEffects) {
    for (auto b : kEffects) CHECK(effect_leq(a, b) == (effect_join(a, b) == b));
  }
}

TEST_CASE("effect order is total with lub") {
  CHECK(effect_leq(EffectQual::Safe, EffectQual::PolyUI));
  CHECK(effect_leq(EffectQual::PolyUI, EffectQual::UI));
  CHECK_FALSE(effect_leq(EffectQual::UI, EffectQual::Safe));
  for (auto a : kEffects) {
    CHECK(effect_leq(a, a));
    for (auto b : kEffects) {
      CHECK((effect_leq(a, b) || effect_leq(b, a)));
      if (effect_leq(a, b) && effect_leq(b, a)) CHECK(a == b);
      const EffectQual j = effect_join(a, b);
      CHECK(effect_leq(a, j));
      CHECK(effect_leq(b, j));
      CHECK(j == effect_join(b, a));
      for (auto u : kEffects) {
        if (effect_leq(a, u) && effect_leq(b, u)) CHECK(effect_leq(j, u));
      }
      for (auto c : kEffects) {
        if (effect_leq(a, b) && effect_leq(b, c)) CHECK(effect_leq(a, c));
        CHECK(effect_join(effect_join(a, b), c) == effect_join(a, effect_join(b, c)));
      }
    }
  }
}

TEST_CASE("poly thread is outside the order") {
  CHECK_THROWS_AS((void)thread_leq(ThreadQual::Poly, ThreadQual::Any), std::invalid_argument);
  CHECK_THROWS_AS((void)thread_join(ThreadQual::UI, ThreadQual::Poly), std::invalid_argument);
  CHECK_FALSE(is_concrete(ThreadQual::Poly));
  CHECK_FALSE(is_concrete(EffectQual::PolyUI));
}

TEST_CASE("instantiation substitutes the binding") {
  const PolyBinding b{ThreadQual::UI, EffectQual::UI};
  CHECK(instantiate(ThreadQual::Poly, b) == ThreadQual::UI);
  CHECK(instantiate(ThreadQual::Comp, b) == ThreadQual::Comp);
  CHECK(instantiate(EffectQual::PolyUI, b) == EffectQual::UI);
  CHECK(instantiate(EffectQual::Safe, b) == EffectQual::Safe);
  CHECK(instantiate(EffectQual::PolyUI, PolyBinding{ThreadQual::Comp, EffectQual::Safe}) == EffectQual::Safe);
}

TEST_CASE("instantiating without a binding throws") {
  CHECK_THROWS_AS((void)instantiate(ThreadQual::Poly, PolyBinding{}), UnboundPolyQualifier);
  CHECK_THROWS_AS((void)instantiate(EffectQual::PolyUI, PolyBinding{ThreadQual::UI, std::nullopt}),
                  UnboundPolyQualifier);
  CHECK_NOTHROW((void)instantiate(ThreadQual::Any, PolyBinding{}));
}

TEST_CASE("annotation spellings round trip") {
  for (auto q : {ThreadQual::Bottom, ThreadQual::Comp, ThreadQual::UI, ThreadQual::Any, ThreadQual::Poly}) {
    std::string_view name = annotation_name(q);
    REQUIRE(name.size() > 1);
    CHECK(thread_from_annotation(name.substr(1)) == q);
  }
  for (auto q : kEffects) {
    CHECK(effect_from_method_annotation(annotation_name(q).substr(1)) == q);
    CHECK(effect_from_type_use(type_use_name(q).substr(1)) == q);
  }
  CHECK(annotation_name(ThreadQual::Comp) == "@CompThread");
  CHECK(annotation_name(EffectQual::UI) == "@UIEffect");
  CHECK(type_use_name(EffectQual::Safe) == "@AlwaysSafe");
  CHECK_FALSE(thread_from_annotation("MainThread").has_value());
}
