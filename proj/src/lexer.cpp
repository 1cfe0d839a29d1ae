#include "lexer.hpp"

#include <array>
#include <cctype>

namespace rxcheck::detail {

namespace {

constexpr std::array<std::string_view, 24> kKeywords = {
    "package", "class",  "interface", "extends", "implements", "return",  "if",     "else",
    "new",     "this",   "true",      "false",   "null",       "void",    "int",    "long",
    "boolean", "double", "public",    "private", "protected",  "static",  "final", "abstract"};

class Lexer {
 public:
  Lexer(std::string_view text, const std::string& path) : text_(text), path_(path) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (at_end()) {
        out.push_back(Token{Tok::End, "", span_here(0)});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  Span span_here(int width) const { return Span{path_, line_, col_, line_, col_ + (width > 0 ? width - 1 : 0)}; }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(span_here(1), msg); }

  void skip_trivia() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        Span start = span_here(2);
        advance();
        advance();
        while (!(peek() == '*' && peek(1) == '/')) {
          if (at_end()) throw SyntaxError(start, "unterminated block comment");
          advance();
        }
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  Token finish(Tok kind, std::string text, int start_line, int start_col) const {
    // end position is the character before the cursor
    return Token{kind, std::move(text), Span{path_, start_line, start_col, line_, col_ - 1}};
  }

  Token next() {
    const int sl = line_;
    const int sc = col_;
    const char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::string word;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '$') word += advance();
      const Tok kind = is_keyword(word) ? Tok::Keyword : Tok::Ident;
      return finish(kind, std::move(word), sl, sc);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      while (std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
      if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        num += advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) num += advance();
        return finish(Tok::Double, std::move(num), sl, sc);
      }
      if (peek() == 'L' || peek() == 'l') {
        advance();
        return finish(Tok::Long, std::move(num), sl, sc);
      }
      if (std::isalpha(static_cast<unsigned char>(peek()))) fail("malformed number literal");
      return finish(Tok::Int, std::move(num), sl, sc);
    }
    if (c == '"') {
      advance();
      std::string value;
      for (;;) {
        if (at_end() || peek() == '\n') throw SyntaxError(Span{path_, sl, sc, sl, sc}, "unterminated string literal");
        char ch = advance();
        if (ch == '"') break;
        if (ch == '\\') {
          if (at_end()) fail("unterminated escape");
          char esc = advance();
          switch (esc) {
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            default: fail(std::string("unknown escape '\\") + esc + "'");
          }
        } else {
          value += ch;
        }
      }
      return finish(Tok::String, std::move(value), sl, sc);
    }
    if (c == '-' && peek(1) == '>') {
      advance();
      advance();
      return finish(Tok::Punct, "->", sl, sc);
    }
    switch (c) {
      case '{': case '}': case '(': case ')': case '<': case '>': case ',':
      case ';': case '.': case '=': case '@':
        advance();
        return finish(Tok::Punct, std::string(1, c), sl, sc);
      default:
        break;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  const std::string& path_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

std::vector<Token> lex(std::string_view text, const std::string& path) { return Lexer(text, path).run(); }

}  // namespace rxcheck::detail
