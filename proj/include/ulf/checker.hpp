#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ulf/diagnostic.hpp"
#include "ulf/reader.hpp"
#include "ulf/types.hpp"

namespace ulf {

struct CheckOptions {
  CheckMode mode = CheckMode::Raw;
  // Accept any well-typed constituent, not only full sentences.
  bool fragment = false;
  bool suggestions = true;
};

struct CheckResult {
  SemType type;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !hasErrors(diagnostics); }
};

// One correction strategy. Either wraps a constituent under a keyword or
// changes the tag of its head lexeme.
struct CatalogRule {
  std::string name;
  std::vector<std::string> codes;
  enum class Action { Wrap, Retag } action = Action::Wrap;
  std::string keyword;
  Tag from = Tag::V, to = Tag::N;
};

using Catalog = std::vector<CatalogRule>;

inline constexpr std::string_view kDefaultCatalog = R"(; Suggestion catalog, tried in order.
; name          codes                  action
insert-mod-n    MissingShifter,NoFit   wrap mod-n
insert-mod-a    MissingShifter,NoFit   wrap mod-a
insert-nnp      MissingShifter,NoFit   wrap nnp
wrap-to         NoFit                  wrap to
wrap-ka         NoFit                  wrap ka
insert-adv-a    NoFit                  wrap adv-a
wrap-that       NoFit                  wrap that
wrap-k          NoFit                  wrap k
insert-adv-e    NoFit                  wrap adv-e
insert-adv-s    NoFit                  wrap adv-s
insert-adv-f    NoFit                  wrap adv-f
retag-v-n       NoFit                  retag v n
retag-a-n       NoFit                  retag a n
)";

inline Catalog parseCatalog(std::string_view text) {
  Catalog out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    auto semi = line.find(';');
    if (semi != std::string::npos) line.erase(semi);
    std::istringstream ls(line);
    CatalogRule r;
    std::string codes, action;
    if (!(ls >> r.name)) continue;
    if (!(ls >> codes >> action))
      fail("BadCatalog", "incomplete rule on line " + std::to_string(lineNo));
    std::istringstream cs(codes);
    for (std::string c; std::getline(cs, c, ',');) r.codes.push_back(c);
    if (action == "wrap") {
      r.action = CatalogRule::Action::Wrap;
      if (!(ls >> r.keyword) || !isKeyword(r.keyword))
        fail("BadCatalog", "wrap needs a keyword on line " + std::to_string(lineNo));
    } else if (action == "retag") {
      std::string f, t;
      ls >> f >> t;
      auto ft = tagFromName(f), tt = tagFromName(t);
      if (!ft || !tt) fail("BadCatalog", "retag needs two tags on line " + std::to_string(lineNo));
      r.action = CatalogRule::Action::Retag;
      r.from = *ft;
      r.to = *tt;
    } else {
      fail("BadCatalog", "unknown action '" + action + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline const Catalog& defaultCatalog() {
  static const Catalog c = parseCatalog(kDefaultCatalog);
  return c;
}

inline Catalog loadCatalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("BadCatalog", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parseCatalog(ss.str());
}

namespace detail {

inline bool acceptedTop(const SemType& t, bool fragment) {
  if (isSentential(t)) return true;
  if (!fragment) return false;
  using K = SemType::Kind;
  return !(t.is(K::Error) || t.is(K::Coord) || t.is(K::Macro));
}

inline std::vector<Diagnostic> rawCheck(const Expr& e, const CheckOptions& opts,
                                        SemType* typeOut = nullptr) {
  auto r = inferType(e, opts.mode);
  std::vector<Diagnostic> out;
  for (auto& d : r.diagnostics) {
    bool dup = false;
    for (auto& o : out)
      dup |= o.path == d.path && o.code == d.code && o.severity == d.severity;
    if (!dup) out.push_back(d);
  }
  if (!hasErrors(out) && !acceptedTop(r.type, opts.fragment)) {
    Diagnostic d;
    d.code = "NotSentence";
    d.message = "formula has type " + toString(r.type) + ", not a sentence";
    out.push_back(std::move(d));
  }
  if (typeOut) *typeOut = r.type;
  return out;
}

// Head lexeme of a constituent: the leaf itself, or the first leaf down
// the leftmost spine.
inline Expr* headLeaf(Expr& e) {
  Expr* cur = &e;
  while (cur->isList()) {
    if (cur->children.empty()) return nullptr;
    cur = &cur->children[0];
  }
  return cur;
}

inline std::optional<Expr> applyRule(const CatalogRule& r, const Expr& node) {
  if (r.action == CatalogRule::Action::Wrap) {
    if (node.isList() && node.size() == 2 && node[0].isKeyword(r.keyword)) return std::nullopt;
    return Expr::list({Expr::keyword(r.keyword), node});
  }
  Expr copy = node;
  Expr* h = headLeaf(copy);
  if (!h || !(h->kind == NodeKind::Lex || h->kind == NodeKind::Elided) || h->tag != r.from)
    return std::nullopt;
  h->tag = r.to;
  return copy;
}

inline bool codeMatches(const CatalogRule& r, const std::string& code) {
  for (auto& c : r.codes)
    if (c == code) return true;
  return false;
}

}  // namespace detail

// Candidate whole-tree rewrites for one diagnostic. Sites tried: the
// diagnosed node, then its children right to left (arguments before heads). A candidate is kept only
// when it strictly lowers the error count.
inline std::vector<Expr> suggest(const Expr& expr, const Diagnostic& diag,
                                 const CheckOptions& opts = {},
                                 const Catalog& catalog = defaultCatalog()) {
  std::vector<std::pair<std::size_t, Expr>> ranked;
  const Expr* node = at(expr, diag.path);
  if (!node || diag.severity != Severity::Error) return {};
  CheckOptions quiet = opts;
  quiet.suggestions = false;
  auto baseline = errorCount(detail::rawCheck(expr, quiet));

  std::vector<Path> sites{diag.path};
  for (std::size_t i = node->size(); i-- > 0;) sites.push_back(child(diag.path, i));

  for (auto& rule : catalog) {
    if (!detail::codeMatches(rule, diag.code)) continue;
    for (auto& site : sites) {
      const Expr* target = at(expr, site);
      if (target->kind == NodeKind::Keyword || target->kind == NodeKind::Punct) continue;
      auto repl = detail::applyRule(rule, *target);
      if (!repl) continue;
      Expr cand = replaceAt(expr, site, std::move(*repl));
      auto errs = errorCount(detail::rawCheck(cand, quiet));
      if (errs >= baseline) continue;
      bool seen = false;
      for (auto& o : ranked) seen |= o.second == cand;
      if (!seen) ranked.emplace_back(errs, std::move(cand));
    }
  }
  // Fewest remaining errors first; catalog order breaks ties.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](auto& a, auto& b) { return a.first < b.first; });
  std::vector<Expr> out;
  for (auto& r : ranked) out.push_back(std::move(r.second));
  return out;
}

// Whole-formula validation. Errors carry the subtree at their path from the
// best catalog rewrite when one exists.
inline CheckResult checkTyped(const Expr& e, const CheckOptions& opts = {},
                              const Catalog& catalog = defaultCatalog()) {
  CheckResult r;
  r.diagnostics = detail::rawCheck(e, opts, &r.type);
  if (opts.suggestions) {
    for (auto& d : r.diagnostics) {
      if (d.severity != Severity::Error) continue;
      auto cands = suggest(e, d, opts, catalog);
      if (!cands.empty()) {
        if (auto n = at(cands.front(), d.path)) d.suggestion = *n;
      }
    }
  }
  // A bare PP complement most often wanted adv-a.
  for (auto& d : r.diagnostics) {
    if (d.code != "PlainPPComplement" || d.suggestion) continue;
    if (const Expr* n = at(e, d.path)) d.suggestion = Expr::list({Expr::keyword("adv-a"), *n});
  }
  return r;
}

inline std::vector<Diagnostic> check(const Expr& e, const CheckOptions& opts = {}) {
  return checkTyped(e, opts).diagnostics;
}

// Parse plus check, with parse errors reported as diagnostics.
inline CheckResult checkText(std::string_view text, const CheckOptions& opts = {}) {
  auto p = parse(text);
  if (!p.ok()) {
    CheckResult r;
    r.type = types::error();
    r.diagnostics = p.errors;
    return r;
  }
  return checkTyped(*p.expr, opts);
}

}  // namespace ulf
