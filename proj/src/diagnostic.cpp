#include "rxcheck/diagnostic.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

namespace rxcheck {

using nlohmann::json;

Span cover(const Span& first, const Span& last) {
  Span out = first;
  if (std::tie(last.end_line, last.end_col) > std::tie(out.end_line, out.end_col)) {
    out.end_line = last.end_line;
    out.end_col = last.end_col;
  }
  return out;
}

Diagnostic make_diagnostic(std::string_view code, Span span, std::string message) {
  return Diagnostic{std::string(code), std::move(span), std::move(message), {}};
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.span.file, a.span.line, a.span.col, a.code, a.message) <
           std::tie(b.span.file, b.span.line, b.span.col, b.code, b.message);
  });
}

std::string format_text(const Diagnostic& d) {
  return d.span.file + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col) +
         ": error: [" + d.code + "] " + d.message;
}

namespace {

json span_fields(const Span& s) {
  return json{{"file", s.file},
              {"line", s.line},
              {"col", s.col},
              {"endLine", s.end_line},
              {"endCol", s.end_col}};
}

Span span_from(const json& j) {
  Span s;
  s.file = j.at("file").get<std::string>();
  s.line = j.at("line").get<int>();
  s.col = j.at("col").get<int>();
  s.end_line = j.at("endLine").get<int>();
  s.end_col = j.at("endCol").get<int>();
  return s;
}

}  // namespace

std::string to_json(const std::vector<Diagnostic>& diags) {
  json out = json::array();
  for (const auto& d : diags) {
    json entry = span_fields(d.span);
    entry["code"] = d.code;
    entry["message"] = d.message;
    json related = json::array();
    for (const auto& r : d.related) {
      json rel = span_fields(r.span);
      rel["message"] = r.message;
      related.push_back(std::move(rel));
    }
    entry["related"] = std::move(related);
    out.push_back(std::move(entry));
  }
  return out.dump(2) + "\n";
}

std::vector<Diagnostic> diagnostics_from_json(std::string_view text) {
  std::vector<Diagnostic> out;
  try {
    const json doc = json::parse(text);
    if (!doc.is_array()) throw std::invalid_argument("diagnostic JSON must be an array");
    for (const auto& entry : doc) {
      Diagnostic d;
      d.code = entry.at("code").get<std::string>();
      d.span = span_from(entry);
      d.message = entry.at("message").get<std::string>();
      for (const auto& rel : entry.at("related")) {
        d.related.push_back(RelatedInfo{span_from(rel), rel.at("message").get<std::string>()});
      }
      out.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed diagnostic JSON: ") + e.what());
  }
  return out;
}

}  // namespace rxcheck
