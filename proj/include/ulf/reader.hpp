#pragma once

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ulf/diagnostic.hpp"
#include "ulf/expr.hpp"

namespace ulf {

struct ParseResult {
  std::optional<Expr> expr;
  std::vector<Diagnostic> errors;
  bool ok() const { return expr.has_value() && errors.empty(); }
};

struct ParseAllResult {
  std::vector<Expr> exprs;
  std::vector<Diagnostic> errors;
  bool ok() const { return errors.empty(); }
};

namespace detail {

inline Diagnostic parseError(std::string code, std::string msg,
                             std::size_t offset) {
  Diagnostic d;
  d.code = std::move(code);
  d.message = std::move(msg);
  d.offset = offset;
  return d;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : src_(text) {}

  // Skips blanks and ';' comments; true if input remains.
  bool more() {
    skip();
    return pos_ < src_.size();
  }

  std::optional<Expr> read(std::vector<Diagnostic>& errs) {
    skip();
    if (pos_ >= src_.size()) {
      errs.push_back(parseError("UnexpectedEnd", "expected an expression", pos_));
      return std::nullopt;
    }
    char c = src_[pos_];
    if (c == '(' || c == '[') return readList(errs);
    if (c == ')' || c == ']') {
      errs.push_back(parseError("UnbalancedBracket",
                                std::string("unmatched '") + c + "'", pos_));
      return std::nullopt;
    }
    if (c == '|') return readName(errs);
    if (c == '{') return readElided(errs);
    return readSymbol(errs);
  }

  std::size_t pos() const { return pos_; }

 private:
  static bool isDelim(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' ||
           c == ')' || c == '[' || c == ']' || c == ';';
  }

  void skip() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::optional<Expr> readList(std::vector<Diagnostic>& errs) {
    std::size_t open = pos_;
    char closer = src_[pos_] == '(' ? ')' : ']';
    ++pos_;
    std::vector<Expr> kids;
    for (;;) {
      skip();
      if (pos_ >= src_.size()) {
        errs.push_back(parseError("UnbalancedBracket", "unclosed bracket", open));
        return std::nullopt;
      }
      char c = src_[pos_];
      if (c == ')' || c == ']') {
        if (c != closer) {
          errs.push_back(parseError("UnbalancedBracket",
                                    "mismatched closing bracket", pos_));
          return std::nullopt;
        }
        ++pos_;
        break;
      }
      auto e = read(errs);
      if (!e) return std::nullopt;
      kids.push_back(std::move(*e));
    }
    if (kids.empty()) {
      errs.push_back(parseError("EmptyList", "empty list", open));
      return std::nullopt;
    }
    return Expr::list(std::move(kids));
  }

  // Optional ".tag" directly after a closing bar or brace.
  bool readTag(std::optional<Tag>& out, std::vector<Diagnostic>& errs) {
    if (pos_ >= src_.size() || src_[pos_] != '.') return true;
    std::size_t start = ++pos_;
    while (pos_ < src_.size() && !isDelim(src_[pos_])) ++pos_;
    auto name = lower(src_.substr(start, pos_ - start));
    auto t = tagFromName(name);
    if (!t) {
      errs.push_back(parseError("UnknownTag", "unknown tag '." + name + "'", start));
      return false;
    }
    out = t;
    return true;
  }

  std::optional<Expr> readName(std::vector<Diagnostic>& errs) {
    std::size_t open = pos_++;
    auto close = src_.find('|', pos_);
    if (close == std::string_view::npos) {
      errs.push_back(parseError("StrayBar", "unterminated name", open));
      return std::nullopt;
    }
    std::string text(src_.substr(pos_, close - pos_));
    if (text.empty()) {
      errs.push_back(parseError("StrayBar", "empty name", open));
      return std::nullopt;
    }
    pos_ = close + 1;
    std::optional<Tag> tag;
    if (!readTag(tag, errs)) return std::nullopt;
    if (pos_ < src_.size() && !isDelim(src_[pos_])) {
      errs.push_back(parseError("StrayBar", "text directly after name", pos_));
      return std::nullopt;
    }
    return Expr::name(std::move(text), tag);
  }

  std::optional<Expr> readElided(std::vector<Diagnostic>& errs) {
    std::size_t open = pos_++;
    auto close = src_.find('}', pos_);
    if (close == std::string_view::npos) {
      errs.push_back(parseError("UnbalancedBracket", "unclosed brace", open));
      return std::nullopt;
    }
    std::string stem = lower(src_.substr(pos_, close - pos_));
    pos_ = close + 1;
    std::optional<Tag> tag;
    if (!readTag(tag, errs)) return std::nullopt;
    if (!tag) {
      errs.push_back(parseError("UnknownTag", "elided atom needs a tag", open));
      return std::nullopt;
    }
    return Expr::elided(std::move(stem), *tag);
  }

  std::optional<Expr> readSymbol(std::vector<Diagnostic>& errs) {
    std::size_t start = pos_;
    while (pos_ < src_.size() && !isDelim(src_[pos_])) {
      if (src_[pos_] == '|') {
        errs.push_back(parseError("StrayBar", "bar inside symbol", pos_));
        return std::nullopt;
      }
      ++pos_;
    }
    std::string_view tok = src_.substr(start, pos_ - start);
    if (tok == "?" || tok == "!") return Expr::punct(std::string(tok));
    if (tok == "*h" || tok == "*p") return Expr::hole(std::string(tok));
    if (tok == "lambda") return Expr::keyword("λ");
    if (isKeyword(tok)) return Expr::keyword(std::string(tok));
    auto dot = tok.rfind('.');
    if (dot != std::string_view::npos) {
      auto tagText = lower(tok.substr(dot + 1));
      auto tag = tagFromName(tagText);
      if (!tag || dot == 0) {
        errs.push_back(parseError("UnknownTag", "unknown tag '." + tagText + "'",
                                  start + dot + 1));
        return std::nullopt;
      }
      return Expr::lex(lower(tok.substr(0, dot)), *tag);
    }
    return Expr::var(std::string(tok));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses exactly one expression.
inline ParseResult parse(std::string_view text) {
  ParseResult r;
  detail::Reader rd(text);
  auto e = rd.read(r.errors);
  if (!e) return r;
  if (rd.more()) {
    r.errors.push_back(detail::parseError(
        "TrailingInput", "unexpected text after expression", rd.pos()));
    return r;
  }
  r.expr = std::move(e);
  return r;
}

// Parses a sequence of top-level expressions; stops at the first error.
inline ParseAllResult parseAll(std::string_view text) {
  ParseAllResult r;
  detail::Reader rd(text);
  while (rd.more()) {
    auto e = rd.read(r.errors);
    if (!e) break;
    r.exprs.push_back(std::move(*e));
  }
  return r;
}

// Parses or throws; for literals in code and tests.
inline Expr parseOrThrow(std::string_view text) {
  auto r = parse(text);
  if (!r.ok()) throw DiagnosticError(r.errors.front());
  return std::move(*r.expr);
}

inline void print(const Expr& e, std::string& out) {
  switch (e.kind) {
    case NodeKind::Lex:
      out += e.text;
      out += '.';
      out += tagName(*e.tag);
      break;
    case NodeKind::Name:
      out += '|';
      out += e.text;
      out += '|';
      if (e.tag) {
        out += '.';
        out += tagName(*e.tag);
      }
      break;
    case NodeKind::Elided:
      out += '{';
      out += e.text;
      out += "}.";
      out += tagName(*e.tag);
      break;
    case NodeKind::List:
      out += '(';
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (i) out += ' ';
        print(e[i], out);
      }
      out += ')';
      break;
    default:
      out += e.text;
  }
}

inline std::string print(const Expr& e) {
  std::string s;
  print(e, s);
  return s;
}

// Depth-first pre-order traversal; the visitor sees (node, path).
template <typename Visitor>
Visitor walk(const Expr& e, Visitor visitor) {
  Path path;
  auto go = [&](auto& self, const Expr& node) -> void {
    visitor(node, static_cast<const Path&>(path));
    for (std::size_t i = 0; i < node.size(); ++i) {
      path.push_back(i);
      self(self, node[i]);
      path.pop_back();
    }
  };
  go(go, e);
  return visitor;
}

// Bottom-up rebuild: children are transformed before their parent.
template <typename Fn>
Expr rewriteBottomUp(const Expr& e, Fn&& fn) {
  Expr copy = e;
  for (auto& c : copy.children) c = rewriteBottomUp(c, fn);
  return fn(std::move(copy));
}

}  // namespace ulf
