#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rxcheck/diagnostic.hpp"

namespace rxcheck::detail {

enum class Tok { Ident, Keyword, Int, Long, Double, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier/keyword/punct text, literal value (strings unescaped)
  Span span;
};

struct SyntaxError : std::runtime_error {
  Span span;
  SyntaxError(Span s, const std::string& what) : std::runtime_error(what), span(std::move(s)) {}
};

/// Tokenizes MiniRx/stub text; `//` and `/* */` comments are dropped.
/// Throws SyntaxError on malformed input.
std::vector<Token> lex(std::string_view text, const std::string& path);

bool is_keyword(std::string_view word);

}  // namespace rxcheck::detail
