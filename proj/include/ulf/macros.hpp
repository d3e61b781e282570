#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ulf/diagnostic.hpp"
#include "ulf/reader.hpp"
#include "ulf/types.hpp"

namespace ulf {

// Deterministic fresh names: x, y, z, x1, y1, z1, x2, ...
class FreshNames {
 public:
  explicit FreshNames(const Expr& avoid) {
    std::vector<std::string> syms;
    collectSymbols(avoid, syms);
    used_.insert(syms.begin(), syms.end());
  }
  FreshNames() = default;

  void reserve(const Expr& e) {
    std::vector<std::string> syms;
    collectSymbols(e, syms);
    used_.insert(syms.begin(), syms.end());
  }

  std::string next() {
    static const char* base[] = {"x", "y", "z"};
    for (int n = 0;; ++n) {
      for (auto b : base) {
        std::string cand = n == 0 ? std::string(b) : b + std::to_string(n);
        if (used_.insert(cand).second) return cand;
      }
    }
  }

 private:
  std::set<std::string> used_;
};

inline bool isLambda(const Expr& e) {
  return e.isList() && e.size() == 3 && e[0].isKeyword("λ") && e[1].kind == NodeKind::Var;
}

inline Expr lambda(std::string var, Expr body) {
  return Expr::list({Expr::keyword("λ"), Expr::var(std::move(var)), std::move(body)});
}

inline void freeVars(const Expr& e, std::set<std::string>& out,
                     std::vector<std::string>& bound) {
  if (e.kind == NodeKind::Var) {
    if (std::find(bound.begin(), bound.end(), e.text) == bound.end()) out.insert(e.text);
    return;
  }
  if (isLambda(e)) {
    bound.push_back(e[1].text);
    freeVars(e[2], out, bound);
    bound.pop_back();
    return;
  }
  for (auto& c : e.children) freeVars(c, out, bound);
}

inline std::set<std::string> freeVars(const Expr& e) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  freeVars(e, out, bound);
  return out;
}

// Capture-avoiding substitution of value for free occurrences of var.
inline Expr substitute(const Expr& body, const std::string& var, const Expr& value,
                       FreshNames& fresh) {
  if (body.kind == NodeKind::Var) return body.text == var ? value : body;
  if (body.isLeaf()) return body;
  if (isLambda(body)) {
    const auto& v = body[1].text;
    if (v == var) return body;
    auto fv = freeVars(value);
    if (fv.count(v)) {
      auto renamed = fresh.next();
      Expr inner = substitute(body[2], v, Expr::var(renamed), fresh);
      return lambda(renamed, substitute(inner, var, value, fresh));
    }
    return lambda(v, substitute(body[2], var, value, fresh));
  }
  Expr out = body;
  for (auto& c : out.children) c = substitute(c, var, value, fresh);
  return out;
}

// Structural equality up to consistent renaming of λ-bound variables.
inline bool alphaEqual(const Expr& a, const Expr& b,
                       std::vector<std::pair<std::string, std::string>>& env) {
  if (a.kind == NodeKind::Var && b.kind == NodeKind::Var) {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      if (it->first == a.text || it->second == b.text)
        return it->first == a.text && it->second == b.text;
    }
    return a.text == b.text;
  }
  if (isLambda(a) && isLambda(b)) {
    env.emplace_back(a[1].text, b[1].text);
    bool r = alphaEqual(a[2], b[2], env);
    env.pop_back();
    return r;
  }
  if (a.kind != b.kind || a.text != b.text || a.tag != b.tag || a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!alphaEqual(a[i], b[i], env)) return false;
  return true;
}

inline bool alphaEqual(const Expr& a, const Expr& b) {
  std::vector<std::pair<std::string, std::string>> env;
  return alphaEqual(a, b, env);
}

namespace detail {

inline bool isHeadedBy(const Expr& e, std::string_view k) {
  return e.isList() && e.size() >= 1 && e[0].isKeyword(k);
}

inline int countHole(const Expr& e, std::string_view hole) {
  if (e.kind == NodeKind::Hole) return e.text == hole ? 1 : 0;
  int n = 0;
  for (auto& c : e.children) n += countHole(c, hole);
  return n;
}

inline Expr fillHole(const Expr& e, std::string_view hole, const Expr& filler) {
  if (e.kind == NodeKind::Hole && e.text == hole) return filler;
  Expr out = e;
  for (auto& c : out.children) c = fillHole(c, hole, filler);
  return out;
}

// Term denoting an individual directly; safe to substitute for a λ-variable
// when it precedes a λ-predicate.
inline bool isAtomicTerm(const Expr& e) {
  return e.kind == NodeKind::Var ||
         (e.kind == NodeKind::Name && (!e.tag || e.tag == Tag::Sk)) ||
         e.hasTag(Tag::Pro) || e.hasTag(Tag::Sk);
}

class Expander {
 public:
  explicit Expander(const Expr& root) : fresh_(root) {}

  Expr run(const Expr& e, Path& path) {
    if (e.isLeaf()) {
      if (e.isKeyword("'s") || e.isKeyword("sub") || e.isKeyword("rep") ||
          e.isKeyword("n+preds") || e.isKeyword("np+preds"))
        fail("ArityError", "macro keyword '" + e.text + "' outside an application", path);
      return e;
    }
    // (NP 's) is only meaningful as the head of ((NP 's) N).
    if (e.size() == 2 && e[0].isList() && e[0].size() == 2 && e[0][1].isKeyword("'s")) {
      path.push_back(0);
      path.push_back(0);
      Expr np = run(e[0][0], path);
      path.pop_back();
      path.pop_back();
      path.push_back(1);
      Expr n = run(e[1], path);
      path.pop_back();
      return Expr::list({Expr::lex("the", Tag::D),
                         Expr::list({Expr::list({Expr::keyword("poss-by"), np}), n})});
    }
    if (e.size() == 2 && e[1].isKeyword("'s"))
      fail("ArityError", "possessive must modify a noun: ((NP 's) N)", path);

    Expr out = e;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (i == 0 && e[0].kind == NodeKind::Keyword) continue;
      path.push_back(i);
      out.children[i] = run(e[i], path);
      path.pop_back();
    }
    const Expr& head = out[0];
    if (head.isKeyword("sub") || head.isKeyword("rep")) {
      bool sub = head.isKeyword("sub");
      if (out.size() != 3) fail("ArityError", head.text + " takes exactly two arguments", path);
      const Expr& filler = sub ? out[1] : out[2];
      const Expr& body = sub ? out[2] : out[1];
      std::string hole = sub ? "*h" : "*p";
      int n = countHole(body, hole);
      if (n == 0) fail("MissingHole", "no " + hole + " in " + head.text + " body", path);
      if (n > 1) fail("MultipleHoles", "more than one " + hole + " in " + head.text + " body", path);
      return fillHole(body, hole, filler);
    }
    if (head.isKeyword("n+preds") || head.isKeyword("np+preds")) {
      bool np = head.isKeyword("np+preds");
      if (out.size() < 3) fail("ArityError", head.text + " needs a head and at least one predicate", path);
      auto v = fresh_.next();
      auto x = Expr::var(v);
      std::vector<Expr> conj;
      if (np)
        conj.push_back(Expr::list({x, Expr::keyword("="), out[1]}));
      else
        conj.push_back(Expr::list({x, out[1]}));
      conj.push_back(Expr::lex("and", Tag::Cc));
      for (std::size_t i = 2; i < out.size(); ++i) conj.push_back(Expr::list({x, out[i]}));
      Expr lam = lambda(v, Expr::list(std::move(conj)));
      if (!np) return lam;
      return Expr::list({Expr::lex("the", Tag::D), std::move(lam)});
    }
    return out;
  }

 private:
  FreshNames fresh_;
};

}  // namespace detail

// λ-abstracts the smallest sentence around each relativizer, replacing the
// relativizer by the λ-variable.
inline Expr expandRel(const Expr& e) {
  FreshNames fresh(e);
  Expr cur = e;
  for (;;) {
    bool anyRel = containsIf(cur, [](const Expr& n) { return n.hasTag(Tag::Rel); });
    if (!anyRel) return cur;
    auto typed = inferType(cur);
    if (typed.relClauses.empty()) {
      Path where;
      walk(cur, [&](const Expr& n, const Path& p) {
        if (where.empty() && n.hasTag(Tag::Rel)) where = p;
      });
      fail("RelOutsideClause", "relativizer has no enclosing sentence", where);
    }
    // Deepest clause first so nested relatives are abstracted inside out.
    Path target = typed.relClauses.front();
    for (auto& p : typed.relClauses)
      if (p.size() > target.size()) target = p;
    const Expr* clause = at(cur, target);
    auto v = fresh.next();
    Expr body = rewriteBottomUp(*clause, [&](Expr n) {
      return n.hasTag(Tag::Rel) ? Expr::var(v) : n;
    });
    cur = replaceAt(cur, target, lambda(v, std::move(body)));
  }
}

// Relativizer processing, then innermost-first expansion of sub, rep,
// n+preds, np+preds and 's. No β-reduction.
inline Expr expandAll(const Expr& e) {
  Expr rel = expandRel(e);
  detail::Expander ex(rel);
  Path path;
  return ex.run(rel, path);
}

namespace detail {

inline bool isRedex(const Expr& e) {
  if (!e.isList() || e.size() != 2) return false;
  if (isLambda(e[0])) return true;
  return isLambda(e[1]) && isAtomicTerm(e[0]);
}

inline Expr contract(const Expr& e, FreshNames& fresh) {
  const Expr& lam = isLambda(e[0]) ? e[0] : e[1];
  const Expr& arg = isLambda(e[0]) ? e[1] : e[0];
  return substitute(lam[2], lam[1].text, arg, fresh);
}

// One leftmost-outermost step; false when in normal form.
inline bool stepNormal(Expr& e, FreshNames& fresh) {
  if (isRedex(e)) {
    e = contract(e, fresh);
    return true;
  }
  for (auto& c : e.children)
    if (stepNormal(c, fresh)) return true;
  return false;
}

}  // namespace detail

// Normal-order β-reduction. Redexes are ((λ v B) A) and, for predication
// of an atomic term, (A (λ v B)).
inline Expr betaReduce(const Expr& e, std::size_t maxSteps = 10000) {
  FreshNames fresh(e);
  Expr cur = e;
  for (std::size_t i = 0; i < maxSteps; ++i)
    if (!detail::stepNormal(cur, fresh)) return cur;
  fail("NonTerminating", "β-reduction exceeded step limit");
}

}  // namespace ulf
