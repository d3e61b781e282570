#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "ulf/macros.hpp"
#include "ulf/reader.hpp"
#include "ulf/types.hpp"

namespace ulf {

// Scoped forms are plain Exprs:
//   quantifier  (δ v φ ψ)        tense  (pres φ)
//   coordination (φ and.cc ψ)    negation (not φ)
// with atomic predications as in ULF.

enum class UnscopedKind { Determiner, Tense, Coordination };

inline std::string_view unscopedKindName(UnscopedKind k) {
  switch (k) {
    case UnscopedKind::Determiner: return "determiner-phrase";
    case UnscopedKind::Tense: return "tense";
    case UnscopedKind::Coordination: return "coordination";
  }
  return "?";
}

struct Unscoped {
  Path path;
  UnscopedKind kind;
  Path clause;          // landing site
  bool island = false;  // landing site sits under that/ke/.ps
};

namespace detail {

inline bool isTenseOp(const Expr& e) {
  return e.isKeyword("pres") || e.isKeyword("past") || e.isKeyword("cf");
}

inline bool isDetHead(const Expr& e) {
  if (e.hasTag(Tag::D)) return true;
  return e.isList() && e.size() == 2 && (e[0].isKeyword("fquan") || e[0].isKeyword("nquan"));
}

inline bool isDP(const Expr& e) { return e.isList() && e.size() == 2 && isDetHead(e[0]); }

inline bool isTensed(const Expr& e) { return e.isList() && e.size() == 2 && isTenseOp(e[0]); }

inline bool isIslandOp(const Expr& e) {
  return e.isKeyword("that") || e.isKeyword("ke") || e.hasTag(Tag::Ps);
}

inline bool isCoordList(const Expr& e) {
  if (!e.isList() || e.size() < 3 || e.size() % 2 == 0) return false;
  for (std::size_t i = 1; i < e.size(); i += 2)
    if (!e[i].hasTag(Tag::Cc)) return false;
  return true;
}

inline bool isClauseType(const SemType& t) {
  return t.is(SemType::Kind::SentIntension) || t.is(SemType::Kind::Truth);
}

inline bool isCoordTerm(const Expr& e, const Typed& t) { return isCoordList(e) && isEntityLike(t.type); }

inline const std::string kPlaceholder = "%coord";

// Hands out one permutation per clause, in a fixed visiting order, so a
// single index vector identifies a whole scoping.
class ScopeChoices {
 public:
  explicit ScopeChoices(std::vector<std::size_t> digits = {}) : digits_(std::move(digits)) {}

  std::vector<std::size_t> permute(std::vector<std::size_t> base) {
    std::size_t n = base.size();
    std::size_t idx = pos_ < digits_.size() ? digits_[pos_] : 0;
    ++pos_;
    std::size_t fact = 1;
    for (std::size_t i = 2; i <= n; ++i) fact *= i;
    radices_.push_back(fact);
    // Decode idx as a Lehmer code over the default order.
    std::vector<std::size_t> out;
    for (std::size_t k = n; k > 0; --k) {
      fact /= k;
      std::size_t pick = idx / fact;
      idx %= fact;
      out.push_back(base[pick]);
      base.erase(base.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return out;
  }

  const std::vector<std::size_t>& radices() const { return radices_; }

 private:
  std::vector<std::size_t> digits_;
  std::size_t pos_ = 0;
  std::vector<std::size_t> radices_;
};

class Scoper {
 public:
  Scoper(const Expr& root, ScopeChoices& choices) : fresh_(root), choices_(choices) {}

  Expr clause(const Expr& e, const Typed& t) {
    std::vector<Element> elems;
    Expr body = floatOut(e, t, elems, true);
    // Default: tenses outermost, then surface order.
    std::vector<std::size_t> base;
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (elems[i].kind == UnscopedKind::Tense) base.push_back(i);
    for (std::size_t i = 0; i < elems.size(); ++i)
      if (elems[i].kind != UnscopedKind::Tense) base.push_back(i);
    auto order = choices_.permute(std::move(base));
    for (auto it = order.rbegin(); it != order.rend(); ++it) body = wrap(elems[*it], std::move(body));
    return body;
  }

 private:
  struct Element {
    UnscopedKind kind;
    Expr op;
    std::string var;
    Expr restrictor;
    std::vector<std::pair<Expr, Typed>> parts;
  };

  Expr restrictor(const std::string& v, const Expr& noun, const Typed& nt) {
    Expr r = Expr::list({Expr::var(v), noun});
    Typed rt{types::sent(), {Typed{types::entity(), {}}, nt}};
    return clause(r, rt);
  }

  Expr floatOut(const Expr& e, const Typed& t, std::vector<Element>& out, bool top) {
    if (e.isLeaf()) return e;
    if (!top && isClauseType(t.type)) return clause(e, t);
    if (isDP(e)) {
      auto v = fresh_.next();
      out.push_back({UnscopedKind::Determiner, e[0], v, restrictor(v, e[1], t.children[1]), {}});
      return Expr::var(v);
    }
    if (isTensed(e)) {
      out.push_back({UnscopedKind::Tense, e[0], {}, {}, {}});
      return floatOut(e[1], t.children[1], out, false);
    }
    if (isCoordTerm(e, t)) {
      Element el{UnscopedKind::Coordination, e[1], {}, {}, {}};
      for (std::size_t i = 0; i < e.size(); i += 2) {
        // Determiner coordinands scope inside their own conjunct.
        if (isDP(e[i]))
          el.parts.emplace_back(e[i], t.children[i]);
        else
          el.parts.emplace_back(floatOut(e[i], t.children[i], out, false), Typed{});
      }
      out.push_back(std::move(el));
      return Expr::var(kPlaceholder);
    }
    Expr copy = e;
    for (std::size_t i = 0; i < e.size(); ++i) copy.children[i] = floatOut(e[i], t.children[i], out, false);
    return copy;
  }

  static Expr fill(const Expr& body, const Expr& value) {
    return rewriteBottomUp(body, [&](Expr n) {
      return n.kind == NodeKind::Var && n.text == kPlaceholder ? value : n;
    });
  }

  Expr wrap(const Element& el, Expr body) {
    switch (el.kind) {
      case UnscopedKind::Determiner:
        return Expr::list({el.op, Expr::var(el.var), el.restrictor, std::move(body)});
      case UnscopedKind::Tense:
        return Expr::list({el.op, std::move(body)});
      case UnscopedKind::Coordination: {
        std::vector<Expr> conj;
        for (auto& [part, pt] : el.parts) {
          if (!conj.empty()) conj.push_back(el.op);
          if (isDP(part)) {
            auto v = fresh_.next();
            auto r = restrictor(v, part[1], pt.children[1]);
            conj.push_back(Expr::list({part[0], Expr::var(v), r, fill(body, Expr::var(v))}));
          } else {
            conj.push_back(fill(body, part));
          }
        }
        return Expr::list(std::move(conj));
      }
    }
    return body;
  }

  FreshNames fresh_;
  ScopeChoices& choices_;
};

}  // namespace detail

// Unscoped determiners, tenses and term coordinations in surface order,
// each with the clause it floats to.
inline std::vector<Unscoped> collectUnscoped(const Expr& e) {
  auto typed = inferType(e);
  std::vector<Unscoped> out;
  Path path;
  auto go = [&](auto& self, const Expr& n, const Typed& t, Path clause, bool island, bool top) -> void {
    if (n.isLeaf()) return;
    if (!top && detail::isClauseType(t.type)) {
      clause = path;
      island = false;
    }
    if (detail::isDP(n)) {
      out.push_back({path, UnscopedKind::Determiner, clause, island});
      // Material inside the restrictor scopes at the restrictor.
      clause = path;
      island = false;
    } else if (detail::isTensed(n)) {
      out.push_back({path, UnscopedKind::Tense, clause, island});
    } else if (detail::isCoordTerm(n, t)) {
      out.push_back({path, UnscopedKind::Coordination, clause, island});
    }
    bool islandHead = n.size() == 2 && detail::isIslandOp(n[0]);
    for (std::size_t i = 0; i < n.size(); ++i) {
      path.push_back(i);
      // The clause directly under an island operator is marked.
      bool childIsland = islandHead && i == 1 && detail::isClauseType(t.children[i].type);
      if (childIsland)
        self(self, n[i], t.children[i], path, true, true);
      else
        self(self, n[i], t.children[i], clause, island, false);
      path.pop_back();
    }
  };
  go(go, e, typed.tree, Path{}, false, true);
  return out;
}

struct ScopeOptions {
  std::size_t limit = 64;
  bool strict = false;  // TooManyScopings instead of truncating
};

// Every ordering of each clause's unscoped elements, deduplicated. The first
// result is the default scoping.
inline std::vector<Expr> enumerateScopings(const Expr& e, const ScopeOptions& opts = {}) {
  auto typed = inferType(e);
  auto runWith = [&](std::vector<std::size_t> digits, std::vector<std::size_t>* radices) {
    detail::ScopeChoices ch(std::move(digits));
    detail::Scoper sc(e, ch);
    Expr r = sc.clause(e, typed.tree);
    if (radices) *radices = ch.radices();
    return r;
  };
  std::vector<std::size_t> radices;
  Expr first = runWith({}, &radices);
  std::size_t total = 1;
  bool overflow = false;
  for (auto r : radices) {
    if (r && total > std::numeric_limits<std::size_t>::max() / r) overflow = true;
    total *= r;
  }
  if (opts.strict && (overflow || total > opts.limit))
    fail("TooManyScopings", "more than " + std::to_string(opts.limit) + " scopings");

  std::vector<Expr> out{first};
  std::set<std::string> seen{print(first)};
  std::vector<std::size_t> digits(radices.size(), 0);
  // Odometer over the mixed-radix choice vector, last clause fastest.
  auto advance = [&] {
    for (std::size_t i = digits.size(); i-- > 0;) {
      if (++digits[i] < radices[i]) return true;
      digits[i] = 0;
    }
    return false;
  };
  while (out.size() < opts.limit && advance()) {
    Expr cand = runWith(digits, nullptr);
    if (seen.insert(print(cand)).second) out.push_back(std::move(cand));
  }
  return out;
}

inline Expr defaultScoping(const Expr& e) {
  ScopeOptions o;
  o.limit = 1;
  return enumerateScopings(e, o).front();
}

inline bool isQuantifier(const Expr& e) {
  return e.isList() && e.size() == 4 && detail::isDetHead(e[0]) && e[1].kind == NodeKind::Var;
}

// Free variables of a scoped form; quantifiers and λ bind.
inline std::set<std::string> formFreeVars(const Expr& e) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  auto go = [&](auto& self, const Expr& n) -> void {
    if (n.kind == NodeKind::Var) {
      if (std::find(bound.begin(), bound.end(), n.text) == bound.end()) out.insert(n.text);
      return;
    }
    if (isQuantifier(n) || isLambda(n)) {
      bound.push_back(n[1].text);
      for (std::size_t i = 2; i < n.size(); ++i) self(self, n[i]);
      bound.pop_back();
      if (isQuantifier(n)) self(self, n[0]);
      return;
    }
    for (auto& c : n.children) self(self, c);
  };
  go(go, e);
  return out;
}

// True when some binder rebinds a variable already bound above it.
inline bool hasShadowing(const Expr& e) {
  std::vector<std::string> bound;
  bool found = false;
  auto go = [&](auto& self, const Expr& n) -> void {
    if (isQuantifier(n) || isLambda(n)) {
      if (std::find(bound.begin(), bound.end(), n[1].text) != bound.end()) found = true;
      bound.push_back(n[1].text);
      for (std::size_t i = 2; i < n.size(); ++i) self(self, n[i]);
      bound.pop_back();
      return;
    }
    for (auto& c : n.children) self(self, c);
  };
  go(go, e);
  return found;
}

}  // namespace ulf
