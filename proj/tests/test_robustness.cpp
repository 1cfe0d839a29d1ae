#include <doctest.h>

#include <random>
#include <sstream>

#include "rxcheck/cli.hpp"
#include "rxcheck/oracle.hpp"
#include "support.hpp"

using namespace rxcheck;

namespace {

// Parse, resolve, check and lower; none of it may throw.
void pipeline(const std::string& text) {
  auto a = rxtest::analyze(text);
  if (a.program) {
    (void)lower(*a.program, rxtest::builtin());
    (void)check_soundness(*a.program, rxtest::builtin());
    (void)print_program(a.program->program);
  }
}

const char* const kCorpus[] = {"testdata/delayed_ui.mrx", "testdata/effect_override.mrx", "testdata/error_handler.mrx",
                               "testdata/nested_lambda.mrx"};

}  // namespace

TEST_CASE("every prefix of the corpus is handled") {
  for (const char* f : kCorpus) {
    const std::string text = rxtest::slurp(f);
    for (std::size_t n = 0; n <= text.size(); ++n) {
      CAPTURE(n);
      CHECK_NOTHROW(pipeline(text.substr(0, n)));
    }
  }
}

TEST_CASE("random byte edits are handled") {
  std::mt19937 rng(20240501);
  const std::string alphabet = "{}();,.<>@=-\"/*x1 \n\tL";
  for (const char* f : kCorpus) {
    const std::string text = rxtest::slurp(f);
    for (int round = 0; round < 300; ++round) {
      std::string t = text;
      const int edits = 1 + static_cast<int>(rng() % 4);
      for (int e = 0; e < edits && !t.empty(); ++e) {
        const std::size_t at = rng() % t.size();
        switch (rng() % 3) {
          case 0: t.erase(at, 1); break;
          case 1: t.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
          default: t[at] = alphabet[rng() % alphabet.size()]; break;
        }
      }
      CAPTURE(t);
      CHECK_NOTHROW(pipeline(t));
    }
  }
}

TEST_CASE("stub parser survives prefixes") {
  const std::string text = rxtest::slurp("stubs/builtin.astub");
  for (std::size_t n = 0; n <= text.size(); n += 7) {
    CHECK_NOTHROW((void)parse_stub_file(text.substr(0, n), "cut.astub"));
  }
}
