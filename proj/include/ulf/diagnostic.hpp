#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ulf/expr.hpp"

namespace ulf {

enum class Severity { Error, Warning, Note };

inline std::string_view severityName(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
  }
  return "?";
}

// A located finding. Parse diagnostics carry a character offset; semantic
// diagnostics carry a tree path.
struct Diagnostic {
  Path path;
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::optional<Expr> suggestion;
  std::optional<std::size_t> offset;
};

inline bool hasErrors(const std::vector<Diagnostic>& ds) {
  for (auto& d : ds)
    if (d.severity == Severity::Error) return true;
  return false;
}

inline std::size_t errorCount(const std::vector<Diagnostic>& ds) {
  std::size_t n = 0;
  for (auto& d : ds) n += d.severity == Severity::Error;
  return n;
}

inline std::string pathString(const Path& p) {
  std::string s = "[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(p[i]);
  }
  return s + "]";
}

// Thrown by operations whose failure is a single located diagnostic
// (macro arity, model evaluation, unsupported scoping requests).
class DiagnosticError : public std::runtime_error {
 public:
  explicit DiagnosticError(Diagnostic d)
      : std::runtime_error(d.code + ": " + d.message), diag_(std::move(d)) {}
  const Diagnostic& diagnostic() const { return diag_; }
  const std::string& code() const { return diag_.code; }

 private:
  Diagnostic diag_;
};

[[noreturn]] inline void fail(std::string code, std::string message,
                              Path path = {}) {
  Diagnostic d;
  d.path = std::move(path);
  d.code = std::move(code);
  d.message = std::move(message);
  throw DiagnosticError(std::move(d));
}

}  // namespace ulf
