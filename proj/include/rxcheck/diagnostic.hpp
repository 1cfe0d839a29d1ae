#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace rxcheck {

/// 1-based line/column range. Columns are byte offsets within the line; the
/// end position is inclusive of the last character.
struct Span {
  std::string file;
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;

  auto operator<=>(const Span&) const = default;
};

/// Smallest span covering both inputs (which must share a file).
Span cover(const Span& first, const Span& last);

struct RelatedInfo {
  Span span;
  std::string message;

  bool operator==(const RelatedInfo&) const = default;
};

struct Diagnostic {
  std::string code;
  Span span;
  std::string message;
  std::vector<RelatedInfo> related;

  bool operator==(const Diagnostic&) const = default;
};

// Stable diagnostic codes.
namespace codes {
inline constexpr std::string_view kParseError = "parse.error";
inline constexpr std::string_view kParseDuplicate = "parse.duplicate";
inline constexpr std::string_view kStubParseError = "stub.parse.error";
inline constexpr std::string_view kStubConflict = "stub.conflict";
inline constexpr std::string_view kAnnotConflict = "annot.conflict";
inline constexpr std::string_view kUnknownMethod = "resolve.unknown.method";
inline constexpr std::string_view kTypeArgument = "type.argument";
inline constexpr std::string_view kPolyUnbound = "type.poly.unbound";
inline constexpr std::string_view kUnknownInterface = "infer.unknown.interface";
inline constexpr std::string_view kEffectTransitivity = "effect.transitivity";
inline constexpr std::string_view kEffectInheritance = "effect.inheritance";
inline constexpr std::string_view kEffectPolyReceiver = "effect.poly.receiver";
inline constexpr std::string_view kThreadViolation = "rx.thread.violation";
inline constexpr std::string_view kOracleUnsupported = "oracle.unsupported";
}  // namespace codes

Diagnostic make_diagnostic(std::string_view code, Span span, std::string message);

/// Orders by (file, start position, code); message breaks remaining ties.
void sort_diagnostics(std::vector<Diagnostic>& diags);

/// `<file>:<line>:<col>: error: [<code>] <message>`
std::string format_text(const Diagnostic& d);

/// JSON array of {code, file, line, col, endLine, endCol, message, related[]},
/// newline-terminated.
std::string to_json(const std::vector<Diagnostic>& diags);

/// Inverse of to_json. Throws std::invalid_argument on malformed input.
std::vector<Diagnostic> diagnostics_from_json(std::string_view text);

}  // namespace rxcheck
