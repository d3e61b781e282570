#pragma once

#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ulf/diagnostic.hpp"
#include "ulf/reader.hpp"
#include "ulf/scoper.hpp"
#include "ulf/types.hpp"

namespace ulf {

enum class RuleClass { Implicative, Attitudinal, Counterfactual, Request, Question, Monotone };
enum class Polarity { PosEntail, NegEntail, Both };

inline std::string_view ruleClassName(RuleClass c) {
  switch (c) {
    case RuleClass::Implicative: return "implicative";
    case RuleClass::Attitudinal: return "attitudinal";
    case RuleClass::Counterfactual: return "counterfactual";
    case RuleClass::Request: return "request";
    case RuleClass::Question: return "question";
    case RuleClass::Monotone: return "monotone";
  }
  return "?";
}

// One line of the rule file:
//   class name trigger shape polarity strength template...
// Template slots: $subj $obj $comp $tcomp (complement with the premise's
// tense) $as $tense. For question rules the template is the filler for the
// questioned position.
struct LexRule {
  RuleClass cls;
  std::string name;
  std::string trigger;  // printed atom, e.g. manage.v
  std::string shape;    // to, as, that, q or -
  Polarity polarity = Polarity::PosEntail;
  std::string strength;  // entails, probably, implicates
  std::string templ;
};

struct KBFact {
  std::string relation;  // isa-member or isa-hypernym
  Expr subject;
  Expr object;
};

struct Inference {
  Expr ulf;
  RuleClass cls;
  std::string rule;
  std::string strength;
};

inline std::vector<LexRule> parseRules(std::string_view text) {
  std::vector<LexRule> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string cls, name, trig, shape, pol, strength;
    if (!(ls >> cls)) continue;
    auto bad = [&](const std::string& why) {
      fail("BadRules", "line " + std::to_string(lineNo) + ": " + why);
    };
    if (!(ls >> name >> trig >> shape >> pol >> strength)) bad("expected 7 fields");
    LexRule r;
    if (cls == "implicative") r.cls = RuleClass::Implicative;
    else if (cls == "attitudinal") r.cls = RuleClass::Attitudinal;
    else if (cls == "counterfactual") r.cls = RuleClass::Counterfactual;
    else if (cls == "request") r.cls = RuleClass::Request;
    else if (cls == "question") r.cls = RuleClass::Question;
    else bad("unknown class " + cls);
    if (pol == "pos-entail") r.polarity = Polarity::PosEntail;
    else if (pol == "neg-entail") r.polarity = Polarity::NegEntail;
    else if (pol == "both") r.polarity = Polarity::Both;
    else bad("unknown polarity " + pol);
    r.name = name;
    r.trigger = trig;
    r.shape = shape;
    r.strength = strength;
    std::getline(ls, r.templ);
    r.templ.erase(0, r.templ.find_first_not_of(" \t"));
    if (r.templ.empty()) bad("missing template");
    out.push_back(std::move(r));
  }
  return out;
}

namespace detail {

inline std::string readFile(const std::string& path, const char* code) {
  std::ifstream in(path);
  if (!in) fail(code, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline std::vector<LexRule> loadRules(const std::string& path) {
  return parseRules(detail::readFile(path, "BadRules"));
}

// Lines of "subject relation object", e.g. |France| isa-member nato_member.n.
// Hypernymy among predicates must be acyclic.
inline std::vector<KBFact> parseKB(std::string_view text) {
  std::vector<KBFact> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string s, rel, o;
    if (!(ls >> s)) continue;
    if (!(ls >> rel >> o) || (rel != "isa-member" && rel != "isa-hypernym"))
      fail("BadKB", "line " + std::to_string(lineNo) + ": " + line);
    out.push_back({rel, parseOrThrow(s), parseOrThrow(o)});
  }
  // Cycle check over predicate-to-predicate edges.
  std::map<std::string, std::vector<std::string>> up;
  for (auto& f : out)
    if (f.subject.kind != NodeKind::Name || f.subject.tag) up[print(f.subject)].push_back(print(f.object));
  std::map<std::string, int> state;
  auto dfs = [&](auto& self, const std::string& n) -> void {
    if (state[n] == 1) fail("BadKB", "cyclic hypernymy through " + n);
    if (state[n] == 2) return;
    state[n] = 1;
    for (auto& m : up[n]) self(self, m);
    state[n] = 2;
  };
  for (auto& [n, _] : up) dfs(dfs, n);
  return out;
}

inline std::vector<KBFact> loadKB(const std::string& path) {
  return parseKB(detail::readFile(path, "BadKB"));
}

namespace detail {

inline Expr negate(const Expr& e) {
  if (e.isList() && e.size() == 2 && e[0].isKeyword("not")) return e[1];
  return Expr::list({Expr::keyword("not"), e});
}

inline bool isNegation(const Expr& e) { return e.isList() && e.size() == 2 && e[0].isKeyword("not"); }

// Tense on the head verb of a VP: (quit.v X) -> ((past quit.v) X).
inline Expr applyTense(const Expr& vp, const Expr& tense) {
  if (vp.isList() && !vp.children.empty() && !vp[0].isKeyword("adv-a")) {
    Expr out = vp;
    out.children[0] = applyTense(vp[0], tense);
    return out;
  }
  return Expr::list({tense, vp});
}

inline Expr lemma(const Expr& verb) {
  if (verb.hasTag(Tag::V) && (verb.text == "were" || verb.text == "was")) return Expr::lex("be", Tag::V);
  return verb;
}

// (subj ((T verb) args...)) broken into parts.
struct Clause {
  Expr subj;
  std::optional<Expr> tense;
  Expr verb;
  std::vector<Expr> args;
};

inline std::optional<Clause> clauseParts(const Expr& s) {
  if (!s.isList() || s.size() != 2) return std::nullopt;
  Clause c;
  c.subj = s[0];
  const Expr& vp = s[1];
  Expr head = vp.isList() ? vp[0] : vp;
  if (vp.isList())
    for (std::size_t i = 1; i < vp.size(); ++i) c.args.push_back(vp[i]);
  if (head.isList() && head.size() == 2 && isTenseOp(head[0])) {
    c.tense = head[0];
    head = head[1];
  }
  if (!head.isLeaf()) return std::nullopt;
  c.verb = head;
  return c;
}

inline std::string substituteSlots(const std::string& templ, const std::map<std::string, std::string>& slots) {
  std::string out;
  for (std::size_t i = 0; i < templ.size();) {
    if (templ[i] == '$') {
      std::size_t j = i + 1;
      while (j < templ.size() && std::isalpha(static_cast<unsigned char>(templ[j]))) ++j;
      auto name = templ.substr(i + 1, j - i - 1);
      auto it = slots.find(name);
      if (it == slots.end()) fail("BadRules", "slot $" + name + " unavailable");
      out += it->second;
      i = j;
    } else {
      out += templ[i++];
    }
  }
  return out;
}

inline std::optional<Expr> complementOf(const std::vector<Expr>& args, const std::string& shape) {
  for (auto& a : args) {
    if (shape == "to" && a.isList() && a.size() == 2 && (a[0].isKeyword("to") || a[0].isKeyword("ka")))
      return a[1];
    if (shape == "that" && a.isList() && a.size() == 2 && a[0].isKeyword("that")) return a[1];
    if (shape == "as" && a.isList() && a.size() == 2 && a[0].isLeaf() && a[0].text == "as" &&
        (a[0].hasTag(Tag::PArg) || a[0].hasTag(Tag::P)))
      return a[1];
  }
  return std::nullopt;
}

inline std::optional<Expr> objectOf(const std::vector<Expr>& args) {
  for (auto& a : args) {
    if (a.isLeaf() && (a.kind == NodeKind::Name || a.hasTag(Tag::Pro) || a.kind == NodeKind::Elided)) return a;
    if (isDP(a)) return a;
  }
  return std::nullopt;
}

}  // namespace detail

// Implicative and attitudinal rules fired by the root verb; the premise may
// be wrapped in `not`.
inline std::vector<Inference> lexicalInferences(const Expr& expr, const std::vector<LexRule>& rules) {
  std::vector<Inference> out;
  bool negated = detail::isNegation(expr);
  const Expr& core = negated ? expr[1] : expr;
  auto c = detail::clauseParts(core);
  if (!c) return out;
  for (auto& r : rules) {
    if (r.cls != RuleClass::Implicative && r.cls != RuleClass::Attitudinal) continue;
    if (print(c->verb) != r.trigger) continue;
    if (negated && r.polarity == Polarity::PosEntail) continue;
    if (!negated && r.polarity == Polarity::NegEntail) continue;
    std::map<std::string, std::string> slots{{"subj", print(c->subj)}};
    if (c->tense) slots["tense"] = print(*c->tense);
    if (auto obj = detail::objectOf(c->args)) slots["obj"] = print(*obj);
    if (r.shape != "-") {
      auto comp = detail::complementOf(c->args, r.shape);
      if (!comp) continue;
      slots[r.shape == "as" ? "as" : "comp"] = print(*comp);
      if (r.shape != "as") slots["tcomp"] = print(c->tense ? detail::applyTense(*comp, *c->tense) : *comp);
    }
    Expr concl;
    try {
      concl = parseOrThrow(detail::substituteSlots(r.templ, slots));
    } catch (const DiagnosticError&) {
      continue;  // a slot the premise does not provide
    }
    out.push_back({negated ? detail::negate(concl) : concl, r.cls, r.name, r.strength});
  }
  return out;
}

// Negated cf antecedents under if.ps-type subordinators and wish-type
// verbs, with cf replaced by pres.
inline std::vector<Inference> counterfactualImplicature(const Expr& expr,
                                                        const std::vector<LexRule>& rules) {
  std::vector<Inference> out;
  auto hasCf = [](const Expr& e) { return containsIf(e, [](const Expr& n) { return n.isKeyword("cf"); }); };
  auto implicate = [&](const Expr& clause, const LexRule& r) {
    Expr flat = rewriteBottomUp(clause, [](Expr n) {
      if (n.isList() && n.size() == 2 && n[0].isKeyword("cf"))
        return Expr::list({Expr::keyword("pres"), detail::lemma(n[1])});
      return n;
    });
    out.push_back({detail::negate(flat), r.cls, r.name, r.strength});
  };
  walk(expr, [&](const Expr& n, const Path&) {
    if (!n.isList()) return;
    for (auto& r : rules) {
      if (r.cls != RuleClass::Counterfactual) continue;
      // (if.ps S)
      if (n.size() == 2 && n[0].isLeaf() && print(n[0]) == r.trigger && hasCf(n[1])) implicate(n[1], r);
      // (subj ((T wish.v) (that S)))
      if (auto c = detail::clauseParts(n); c && print(c->verb) == r.trigger) {
        if (auto comp = detail::complementOf(c->args, "that"); comp && hasCf(*comp)) implicate(*comp, r);
      }
    }
  });
  return out;
}

// Could/can/will-you requests and wh-question presuppositions.
inline std::vector<Inference> requestInference(const Expr& expr, const std::vector<LexRule>& rules) {
  std::vector<Inference> out;
  if (!expr.isList() || expr.size() != 2 || expr[1].kind != NodeKind::Punct || expr[1].text != "?") return out;
  const Expr& q = expr[0];
  // ((T aux) subj VP) flat inverted clause.
  auto inverted = [](const Expr& e) -> std::optional<std::array<Expr, 4>> {
    if (!e.isList() || e.size() != 3) return std::nullopt;
    const Expr& h = e[0];
    if (!h.isList() || h.size() != 2 || !detail::isTenseOp(h[0])) return std::nullopt;
    return std::array<Expr, 4>{h[0], h[1], e[1], e[2]};
  };
  if (auto inv = inverted(q)) {
    auto& [tense, aux, subj, vp] = *inv;
    if (!subj.hasTag(Tag::Pro) || subj.text != "you") return out;
    for (auto& r : rules) {
      if (r.cls != RuleClass::Request || print(aux) != r.trigger) continue;
      std::map<std::string, std::string> slots{{"subj", print(subj)}, {"comp", print(vp)}, {"tense", print(tense)}};
      out.push_back({parseOrThrow(detail::substituteSlots(r.templ, slots)), r.cls, r.name, r.strength});
    }
    return out;
  }
  // (sub wh (inverted clause with *h)). The template is "filler | sentence";
  // a filler of "-" drops the hole.
  if (q.isList() && q.size() == 3 && q[0].isKeyword("sub")) {
    for (auto& r : rules) {
      if (r.cls != RuleClass::Question || print(q[1]) != r.trigger) continue;
      auto bar = r.templ.find('|');
      if (bar == std::string::npos) fail("BadRules", "question rule " + r.name + " needs filler | template");
      std::string fillText = r.templ.substr(0, bar);
      fillText.erase(fillText.find_last_not_of(" \t") + 1);
      const bool drop = fillText == "-";
      Expr filler = drop ? Expr::hole("*h") : parseOrThrow(fillText);
      Expr body = rewriteBottomUp(q[2], [&](Expr n) {
        if (!n.isList()) return n.kind == NodeKind::Hole && n.text == "*h" && !drop ? filler : n;
        if (!drop) return n;
        std::vector<Expr> keep;
        for (auto& c : n.children)
          if (c.kind != NodeKind::Hole) keep.push_back(c);
        if (keep.size() == 1) return keep[0];
        return Expr::list(std::move(keep));
      });
      auto inv = inverted(body);
      if (!inv) continue;
      auto& [tense, aux, subj, vp] = *inv;
      // Do-support disappears in the declarative; other auxiliaries stay.
      Expr tcomp = aux.text == "do" ? detail::applyTense(vp, tense)
                                    : Expr::list({Expr::list({tense, aux}), vp});
      std::map<std::string, std::string> slots{
          {"subj", print(subj)}, {"comp", print(vp)}, {"tcomp", print(tcomp)}, {"tense", print(tense)}};
      std::string sentence = r.templ.substr(bar + 1);
      Expr concl;
      try {
        concl = parseOrThrow(detail::substituteSlots(sentence, slots));
      } catch (const DiagnosticError&) {
        continue;
      }
      out.push_back({concl, r.cls, r.name, r.strength});
    }
  }
  return out;
}

// Monotonicity and polarity.

enum class Mono { Up, Down, None };

inline Mono operator*(Mono a, Mono b) {
  if (a == Mono::None || b == Mono::None) return Mono::None;
  return a == b ? Mono::Up : Mono::Down;
}

namespace detail {

// (restrictor, matrix) monotonicity of each determiner.
inline std::pair<Mono, Mono> detMonotonicity(const Expr& det) {
  if (!det.hasTag(Tag::D)) return {Mono::None, Mono::None};
  const auto& s = det.text;
  if (s == "every" || s == "all" || s == "each") return {Mono::Down, Mono::Up};
  if (s == "some" || s == "a" || s == "an") return {Mono::Up, Mono::Up};
  if (s == "no") return {Mono::Down, Mono::Down};
  if (s == "the" || s == "most") return {Mono::None, Mono::Up};
  return {Mono::None, Mono::None};
}

inline bool isOpaqueOp(const Expr& e) {
  return e.isKeyword("that") || e.isKeyword("to") || e.isKeyword("ka") || e.isKeyword("ke") ||
         e.isKeyword("k") || e.isKeyword("plur") || e.hasTag(Tag::Ps) || e.isKeyword("adv-s") ||
         e.isKeyword("mod-n") || e.isKeyword("mod-a") || e.isKeyword("nnp") || e.isKeyword("fquan") ||
         e.isKeyword("nquan");
}

// DPs in a subtree that are not inside another DP or an opaque operator.
inline void topDPs(const Expr& e, std::vector<const Expr*>& out) {
  if (!e.isList()) return;
  if (isDP(e)) {
    out.push_back(&e);
    return;
  }
  if (e.size() == 2 && isOpaqueOp(e[0])) return;
  for (auto& c : e.children) topDPs(c, out);
}

}  // namespace detail

// Polarity of the node at path, reading scope from surface order: a
// determiner affects what follows it and, through its restrictor, what it
// contains.
inline Mono polarityAt(const Expr& root, const Path& path) {
  Mono pol = Mono::Up;
  const Expr* cur = &root;
  for (auto i : path) {
    if (!cur->isList()) return Mono::None;
    if (detail::isNegation(*cur) && i == 1) pol = pol * Mono::Down;
    if (cur->size() == 2 && detail::isOpaqueOp((*cur)[0])) return Mono::None;
    if (detail::isDP(*cur)) {
      if (i == 0) return Mono::None;
      pol = pol * detail::detMonotonicity((*cur)[0]).first;
    } else {
      for (std::size_t j = 0; j < i; ++j) {
        std::vector<const Expr*> dps;
        detail::topDPs((*cur)[j], dps);
        for (auto* d : dps) pol = pol * detail::detMonotonicity((*d)[0]).second;
      }
    }
    if (pol == Mono::None) return pol;
    cur = &(*cur)[i];
  }
  return pol;
}

// NLog substitution instances licensed by the KB: in upward positions a
// name becomes (a.d P) for P it belongs to, a predicate its hypernym, and
// (every.d P) a member of P; in downward positions the reverse
// specializations.
namespace detail {

inline std::vector<Expr> monotoneStep(const Expr& expr, const std::vector<KBFact>& kb) {
  std::vector<Expr> out;
  std::set<std::string> seen;
  auto emit = [&](Expr e) {
    if (seen.insert(print(e)).second) out.push_back(std::move(e));
  };
  auto isTerm = [](const Expr& e) { return e.kind == NodeKind::Name && !e.tag; };
  walk(expr, [&](const Expr& n, const Path& p) {
    auto pol = polarityAt(expr, p);
    if (pol == Mono::None) return;
    const auto key = print(n);
    for (auto& f : kb) {
      const auto subj = print(f.subject);
      const auto obj = print(f.object);
      if (pol == Mono::Up) {
        if (isTerm(n) && subj == key)
          emit(replaceAt(expr, p, Expr::list({Expr::lex("a", Tag::D), f.object})));
        else if (!isTerm(n) && n.isLeaf() && subj == key && f.relation == "isa-hypernym")
          emit(replaceAt(expr, p, f.object));
        // (every.d P) -> t for t in P
        if (detail::isDP(n) && detail::detMonotonicity(n[0]).first == Mono::Down &&
            detail::detMonotonicity(n[0]).second == Mono::Up && print(n[1]) == obj && isTerm(f.subject))
          emit(replaceAt(expr, p, f.subject));
      } else {
        if (!isTerm(n) && n.isLeaf() && obj == key && f.relation == "isa-hypernym" && !isTerm(f.subject))
          emit(replaceAt(expr, p, f.subject));
        // (a.d P) -> t for t in P
        if (detail::isDP(n) && detail::detMonotonicity(n[0]).first == Mono::Up && print(n[1]) == obj &&
            isTerm(f.subject))
          emit(replaceAt(expr, p, f.subject));
      }
    }
  });
  return out;
}

}  // namespace detail

// One substitution applied repeatedly, so that instantiating (every.d P) and
// generalizing another argument combine. Capped at `limit` results.
inline std::vector<Expr> monotoneSubst(const Expr& expr, const std::vector<KBFact>& kb, std::size_t limit = 256) {
  std::vector<Expr> out;
  std::set<std::string> seen{print(expr)};
  std::vector<Expr> frontier{expr};
  while (!frontier.empty() && out.size() < limit) {
    std::vector<Expr> next;
    for (auto& e : frontier)
      for (auto& c : detail::monotoneStep(e, kb))
        if (out.size() < limit && seen.insert(print(c)).second) {
          out.push_back(c);
          next.push_back(c);
        }
    frontier = std::move(next);
  }
  return out;
}

inline std::vector<Inference> inferAll(const Expr& expr, const std::vector<LexRule>& rules,
                                       const std::vector<KBFact>& kb) {
  std::vector<Inference> out;
  std::set<std::string> seen;
  auto add = [&](std::vector<Inference> xs) {
    for (auto& x : xs)
      if (seen.insert(print(x.ulf)).second) out.push_back(std::move(x));
  };
  add(lexicalInferences(expr, rules));
  add(counterfactualImplicature(expr, rules));
  add(requestInference(expr, rules));
  std::vector<Inference> nlog;
  for (auto& e : monotoneSubst(expr, kb)) nlog.push_back({e, RuleClass::Monotone, "nlog", "entails"});
  add(std::move(nlog));
  return out;
}

}  // namespace ulf
