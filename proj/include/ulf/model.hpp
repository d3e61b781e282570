#pragma once

#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ulf/diagnostic.hpp"
#include "ulf/macros.hpp"
#include "ulf/reader.hpp"
#include "ulf/scoper.hpp"

namespace ulf {

using Tuple = std::vector<std::string>;
using Assignment = std::map<std::string, std::string>;

// A finite model: entities, situations ordered by part-of, a time map, and
// per-situation extensions keyed by the printed predicate.
struct FiniteModel {
  std::vector<std::string> domain;
  std::vector<std::string> situations;
  std::set<std::pair<std::string, std::string>> partOf;  // (part, whole), closed
  std::map<std::string, int> time;
  std::map<std::string, std::map<std::string, std::set<Tuple>>> extensions;
  std::map<std::string, std::string> constants;  // printed term -> entity or situation
  double mostThreshold = 0.5;

  void declare(const std::string& pred) { extensions[pred]; }
  void add(const std::string& pred, const std::string& sit, Tuple t) {
    extensions[pred][sit].insert(std::move(t));
  }
  bool declared(const std::string& pred) const { return extensions.count(pred) > 0; }
  bool holds(const std::string& pred, const std::string& sit, const Tuple& t) const {
    auto p = extensions.find(pred);
    if (p == extensions.end()) return false;
    auto s = p->second.find(sit);
    return s != p->second.end() && s->second.count(t) > 0;
  }
  bool within(const std::string& part, const std::string& whole) const {
    return part == whole || partOf.count({part, whole}) > 0;
  }
  int timeOf(const std::string& s) const {
    auto it = time.find(s);
    return it == time.end() ? 0 : it->second;
  }

  // Transitive closure of part-of. Throws BadModel on a cycle.
  void close() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& [a, b] : std::set(partOf))
        for (auto& [c, d] : std::set(partOf))
          if (b == c && a != d && partOf.insert({a, d}).second) changed = true;
    }
    for (auto& [a, b] : partOf)
      if (a == b || partOf.count({b, a})) fail("BadModel", "part-of is not antisymmetric at " + a);
  }
};

// Line format:
//   domain d1 d2 ...          situations s1 s2 ...
//   part s1 s2                (s1 is part of s2)
//   time s1 3                 const |John| d1
//   pred cake.n               (declare with empty extension)
//   ext see.v s1 d1 d2        most 0.5
// '#' starts a comment.
inline FiniteModel parseModel(std::string_view text) {
  FiniteModel m;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<std::string> w;
    for (std::string t; ls >> t;) w.push_back(t);
    if (w.empty()) continue;
    auto bad = [&] { fail("BadModel", "line " + std::to_string(lineNo) + ": " + line); };
    const auto& k = w[0];
    if (k == "domain") {
      m.domain.insert(m.domain.end(), w.begin() + 1, w.end());
    } else if (k == "situations") {
      m.situations.insert(m.situations.end(), w.begin() + 1, w.end());
    } else if (k == "part" && w.size() == 3) {
      m.partOf.insert({w[1], w[2]});
    } else if (k == "time" && w.size() == 3) {
      m.time[w[1]] = std::stoi(w[2]);
    } else if (k == "const" && w.size() == 3) {
      m.constants[w[1]] = w[2];
    } else if (k == "pred" && w.size() >= 2) {
      for (std::size_t i = 1; i < w.size(); ++i) m.declare(w[i]);
    } else if (k == "ext" && w.size() >= 3) {
      m.add(w[1], w[2], Tuple(w.begin() + 3, w.end()));
    } else if (k == "most" && w.size() == 2) {
      m.mostThreshold = std::stod(w[1]);
    } else {
      bad();
    }
  }
  if (m.situations.empty()) m.situations.push_back("s0");
  m.close();
  return m;
}

// Quantity adjectives usable under nquan (counts) and fquan (proportions).
struct QuantityRegistry {
  std::map<std::string, std::function<bool(std::size_t matched, std::size_t restr)>> numeric{
      {"few.a", [](std::size_t m, std::size_t) { return m < 5; }},
      {"several.a", [](std::size_t m, std::size_t) { return m >= 3; }},
      {"many.a", [](std::size_t m, std::size_t) { return m >= 5; }},
  };
  std::map<std::string, std::function<bool(std::size_t matched, std::size_t restr)>> fractional{
      {"few.a", [](std::size_t m, std::size_t r) { return 4 * m < r; }},
      {"many.a", [](std::size_t m, std::size_t r) { return 2 * m > r; }},
  };
};

namespace detail {

inline bool isEpisodicOp(const Expr& e) {
  return e.isKeyword("**") || e.isKeyword("*") || e.isKeyword("@");
}

inline bool isAspectOrTense(const Expr& e) {
  return isTenseOp(e) || e.isKeyword("perf") || e.isKeyword("prog");
}

inline bool isPredLeaf(const Expr& e) {
  if (e.kind != NodeKind::Lex && e.kind != NodeKind::Name) return false;
  if (!e.tag) return false;
  switch (*e.tag) {
    case Tag::V: case Tag::N: case Tag::A: case Tag::P: case Tag::PArg:
      return true;
    default:
      return false;
  }
}

class Evaluator {
 public:
  Evaluator(const FiniteModel& m, const QuantityRegistry& q) : m_(m), q_(q) {}

  bool formula(const Expr& f, const std::string& s, Assignment& u) {
    if (f.isLeaf()) fail("Unevaluable", "bare atom as formula: " + print(f));
    if (isQuantifier(f)) return quantifier(f, s, u);
    if (f.size() == 2 && isAspectOrTense(f[0])) return formula(f[1], s, u);
    if (f.size() == 2 && f[0].isKeyword("not")) return !formula(f[1], s, u);
    if (isCoordList(f)) {
      bool isOr = f[1].text == "or";
      for (std::size_t i = 0; i < f.size(); i += 2) {
        bool v = formula(f[i], s, u);
        if (isOr && v) return true;
        if (!isOr && !v) return false;
      }
      return !isOr;
    }
    if (f.size() == 3 && isEpisodicOp(f[1])) {
      std::string eta = situation(f[2], u);
      if (f[1].text == "**") return formula(f[0], eta, u);
      for (auto& other : m_.situations) {
        bool ok = f[1].text == "*" ? m_.within(other, eta) : m_.timeOf(other) == m_.timeOf(eta);
        if (ok && formula(f[0], other, u)) return true;
      }
      return false;
    }
    if (f.size() == 2 && isLambda(f[0])) return bindAndEval(f[0], term(f[1], u), s, u);
    if (f.size() == 3 && f[1].isKeyword("=")) return term(f[0], u) == term(f[2], u);
    if (f.size() >= 2) {
      Tuple args{term(f[0], u)};
      if (f.size() == 2) return predicate(f[1], args, s, u);
      // Flat predication: (t P t2 ...).
      for (std::size_t i = 2; i < f.size(); ++i) args.push_back(term(f[i], u));
      return predicate(f[1], args, s, u);
    }
    fail("Unevaluable", "not a formula: " + print(f));
  }

  std::string term(const Expr& t, const Assignment& u) {
    if (t.kind == NodeKind::Var) {
      auto it = u.find(t.text);
      if (it == u.end()) fail("UnboundVariable", "free variable " + t.text);
      return it->second;
    }
    if (t.isLeaf()) {
      auto c = m_.constants.find(print(t));
      return c == m_.constants.end() ? print(t) : c->second;
    }
    // Reified and other complex terms are opaque constants.
    std::string key = print(substituteAll(t, u));
    auto c = m_.constants.find(key);
    return c == m_.constants.end() ? key : c->second;
  }

 private:
  Expr substituteAll(const Expr& t, const Assignment& u) {
    if (t.kind == NodeKind::Var) {
      auto it = u.find(t.text);
      return it == u.end() ? t : Expr::name(it->second);
    }
    if (t.isLeaf()) {
      auto c = m_.constants.find(print(t));
      return c == m_.constants.end() ? t : Expr::name(c->second);
    }
    if (isLambda(t) || isQuantifier(t)) {
      Assignment inner = u;
      inner.erase(t[1].text);
      Expr out = t;
      for (std::size_t i = 2; i < t.size(); ++i) out.children[i] = substituteAll(t[i], inner);
      return out;
    }
    Expr out = t;
    for (auto& c : out.children) c = substituteAll(c, u);
    return out;
  }

  std::string situation(const Expr& t, const Assignment& u) {
    auto s = term(t, u);
    if (std::find(m_.situations.begin(), m_.situations.end(), s) == m_.situations.end())
      fail("UnknownSituation", "not a situation of the model: " + s);
    return s;
  }

  bool bindAndEval(const Expr& lam, const std::string& value, const std::string& s, Assignment& u) {
    auto& v = lam[1].text;
    auto saved = u.find(v) == u.end() ? std::optional<std::string>() : u[v];
    u[v] = value;
    bool r = formula(lam[2], s, u);
    if (saved)
      u[v] = *saved;
    else
      u.erase(v);
    return r;
  }

  bool predicate(const Expr& p, Tuple args, const std::string& s, Assignment& u) {
    if (isLambda(p) && args.size() == 1) return bindAndEval(p, args[0], s, u);
    if (p.isList() && p.size() == 2 && p[0].isKeyword("not")) return !predicate(p[1], args, s, u);
    std::string key;
    // ((past send.v) x y): tense and aspect on the head are transparent.
    auto head = [&]() -> const Expr* {
      if (!p.isList() || p.children.empty()) return nullptr;
      const Expr* h = &p[0];
      while (h->isList() && h->size() == 2 && isAspectOrTense((*h)[0])) h = &(*h)[1];
      return isPredLeaf(*h) ? h : nullptr;
    }();
    if (head) {
      key = print(*head);
      for (std::size_t i = 1; i < p.size(); ++i) args.push_back(term(p[i], u));
    } else {
      key = print(substituteAll(p, u));
    }
    if (!m_.declared(key)) fail("UndeclaredPredicate", "predicate not in model: " + key);
    return m_.holds(key, s, args);
  }

  bool quantifier(const Expr& f, const std::string& s, Assignment& u) {
    const auto& v = f[1].text;
    auto saved = u.find(v) == u.end() ? std::optional<std::string>() : u[v];
    std::size_t restr = 0, matched = 0;
    std::string last;
    for (auto& d : m_.domain) {
      u[v] = d;
      if (!formula(f[2], s, u)) continue;
      ++restr;
      if (formula(f[3], s, u)) {
        ++matched;
        last = d;
      }
    }
    if (saved)
      u[v] = *saved;
    else
      u.erase(v);
    const Expr& det = f[0];
    if (det.isList()) {
      const auto& table = det[0].isKeyword("nquan") ? q_.numeric : q_.fractional;
      auto it = table.find(print(det[1]));
      if (it == table.end()) fail("UndeclaredPredicate", "no quantity reading for " + print(det[1]));
      return it->second(matched, restr);
    }
    const auto& st = det.text;
    if (st == "every" || st == "all" || st == "each") return matched == restr;
    if (st == "some" || st == "a" || st == "an") return matched > 0;
    if (st == "no") return matched == 0;
    if (st == "most") return static_cast<double>(matched) > m_.mostThreshold * static_cast<double>(restr);
    if (st == "the") {
      if (restr != 1) fail("PresuppositionFailure", "the.d needs exactly one satisfier, got " + std::to_string(restr));
      return matched == 1;
    }
    fail("UndeclaredPredicate", "no satisfaction conditions for " + print(det));
  }

  const FiniteModel& m_;
  const QuantityRegistry& q_;
};

}  // namespace detail

// Truth of a scoped formula at an episode. Tense and aspect operators are
// transparent; `**`, `*` and `@` shift the evaluation episode.
inline bool evalModel(const Expr& form, const FiniteModel& model, const std::string& episode,
                      const Assignment& assignment = {}, const QuantityRegistry& quantities = {}) {
  detail::Evaluator ev(model, quantities);
  Assignment u = assignment;
  return ev.formula(form, episode, u);
}

}  // namespace ulf
