#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ulf/diagnostic.hpp"
#include "ulf/expr.hpp"
#include "ulf/reader.hpp"

namespace ulf {

// Lexical sort refining the monadic predicate type.
enum class Sort { None, N, V, Adj, P };

inline std::string_view sortName(Sort s) {
  switch (s) {
    case Sort::N: return "N";
    case Sort::V: return "V";
    case Sort::Adj: return "A";
    case Sort::P: return "P";
    default: return "";
  }
}

// Algebraic semantic type.
struct SemType {
  enum class Kind {
    Entity,         // D
    Truth,          // 2
    SentIntension,  // S => 2
    Pred,           // D^n => (S => 2), sorted
    Fn,
    KindT,          // K
    KindAction,     // K_A
    Proposition,    // P (reified proposition)
    Episode,        // S
    UnscopedDet,    // positional D of an unscoped determiner phrase
    Tense,
    Aspect,
    Cf,
    Coord,
    Macro,
    Question,       // sentence under ? or !
    Any,            // free variable, hole: fits anywhere
    Error,          // an ill-typed subtree; fits anywhere, reported once
  };

  Kind kind = Kind::Any;
  Sort sort = Sort::None;
  // Pred: remaining arguments when the adicity is fixed.
  int arity = 1;
  // Pred: adicity is solved from bracketing (verbs, adjectives).
  bool open = false;
  // Pred: right-side arguments consumed so far (bookkeeping only).
  int consumed = 0;
  std::shared_ptr<const SemType> from, to;
  std::string name;

  bool is(Kind k) const { return kind == k; }

  friend bool operator==(const SemType& a, const SemType& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Pred:
        return a.sort == b.sort && a.open == b.open &&
               (a.open || a.arity == b.arity);
      case Kind::Fn:
        return *a.from == *b.from && *a.to == *b.to;
      case Kind::Macro:
      case Kind::Question:
        return a.name == b.name;
      default:
        return true;
    }
  }
};

namespace types {

using K = SemType::Kind;

inline SemType basic(K k) {
  SemType t;
  t.kind = k;
  return t;
}
inline SemType entity() { return basic(K::Entity); }
inline SemType truth() { return basic(K::Truth); }
inline SemType sent() { return basic(K::SentIntension); }
inline SemType kind() { return basic(K::KindT); }
inline SemType kindAction() { return basic(K::KindAction); }
inline SemType proposition() { return basic(K::Proposition); }
inline SemType episode() { return basic(K::Episode); }
inline SemType unscopedDet() { return basic(K::UnscopedDet); }
inline SemType tense() { return basic(K::Tense); }
inline SemType aspect() { return basic(K::Aspect); }
inline SemType cf() { return basic(K::Cf); }
inline SemType coord() { return basic(K::Coord); }
inline SemType any() { return basic(K::Any); }
inline SemType error() { return basic(K::Error); }

inline SemType pred(Sort s, int arity = 1) {
  SemType t = basic(K::Pred);
  t.sort = s;
  t.arity = arity;
  return t;
}
inline SemType openPred(Sort s) {
  SemType t = pred(s, 1);
  t.open = true;
  return t;
}
inline SemType fn(SemType a, SemType b) {
  SemType t = basic(K::Fn);
  t.from = std::make_shared<const SemType>(std::move(a));
  t.to = std::make_shared<const SemType>(std::move(b));
  return t;
}
inline SemType macro(std::string name) {
  SemType t = basic(K::Macro);
  t.name = std::move(name);
  return t;
}
inline SemType question(std::string punct) {
  SemType t = basic(K::Question);
  t.name = std::move(punct);
  return t;
}

// Frequently used composites.
inline SemType p() { return pred(Sort::None); }
inline SemType pN() { return pred(Sort::N); }
inline SemType pV() { return pred(Sort::V); }
inline SemType pAdj() { return pred(Sort::Adj); }
inline SemType sentMod() { return fn(sent(), sent()); }
inline SemType detType() { return fn(pN(), unscopedDet()); }

}  // namespace types

inline bool isEntityLike(const SemType& t) {
  using K = SemType::Kind;
  switch (t.kind) {
    case K::Entity: case K::UnscopedDet: case K::KindT: case K::KindAction:
    case K::Proposition: case K::Episode: case K::Any: case K::Error:
      return true;
    default:
      return false;
  }
}

// Usable as a monadic predicate value.
inline bool isMonadic(const SemType& t) {
  return t.is(SemType::Kind::Pred) && (t.open || t.arity == 1);
}

inline bool isMarker(const SemType& t) {
  return t.is(SemType::Kind::Tense) || t.is(SemType::Kind::Aspect) ||
         t.is(SemType::Kind::Cf);
}

inline bool isWild(const SemType& t) {
  return t.is(SemType::Kind::Any) || t.is(SemType::Kind::Error);
}

// Fn(X, X) with X a predicate or sentence type.
inline bool isEndomorphism(const SemType& t) {
  return t.is(SemType::Kind::Fn) && *t.from == *t.to;
}

inline bool isSentMod(const SemType& t) {
  return t.is(SemType::Kind::Fn) && t.from->is(SemType::Kind::SentIntension) &&
         t.to->is(SemType::Kind::SentIntension);
}

inline bool isVerbMod(const SemType& t) {
  return isEndomorphism(t) && t.from->is(SemType::Kind::Pred) &&
         t.from->sort == Sort::V;
}

// Arity a verb resolves to once its subject is supplied.
inline int resolvedArity(const SemType& t) {
  return t.open ? t.consumed + 1 : t.arity;
}

inline std::string toString(const SemType& t) {
  using K = SemType::Kind;
  switch (t.kind) {
    case K::Entity: return "D";
    case K::Truth: return "2";
    case K::SentIntension: return "S=>2";
    case K::KindT: return "K";
    case K::KindAction: return "K_A";
    case K::Proposition: return "PROP";
    case K::Episode: return "S";
    case K::UnscopedDet: return "D[np]";
    case K::Tense: return "TENSE";
    case K::Aspect: return "ASPECT";
    case K::Cf: return "CF";
    case K::Coord: return "CC";
    case K::Macro: return "MACRO(" + t.name + ")";
    case K::Question: return "(S=>2)" + t.name;
    case K::Any: return "_";
    case K::Error: return "<error>";
    case K::Fn: return "(" + toString(*t.from) + "=>" + toString(*t.to) + ")";
    case K::Pred: {
      std::string mono = t.sort == Sort::None
                             ? std::string("(D=>(S=>2))")
                             : "P[" + std::string(sortName(t.sort)) + "]";
      if (t.open) return mono;
      std::string s = mono;
      for (int i = 1; i < t.arity; ++i) s = "(D=>" + s + ")";
      return s;
    }
  }
  return "?";
}

// Signature lookup for a leaf. Variables and holes are outside the
// signature and yield nullopt.
inline std::optional<SemType> atomType(const Expr& atom) {
  using namespace types;
  if (atom.kind == NodeKind::Keyword) {
    const auto& k = atom.text;
    if (k == "k") return fn(pN(), kind());
    if (k == "to" || k == "ka") return fn(pV(), kindAction());
    if (k == "that") return fn(sent(), proposition());
    if (k == "ke") return fn(sent(), entity());
    if (k == "pres" || k == "past") return tense();
    if (k == "cf") return cf();
    if (k == "perf" || k == "prog") return aspect();
    if (k == "not") return sentMod();
    if (k == "adv-a") return fn(p(), fn(pV(), pV()));
    if (k == "mod-n") return fn(p(), fn(pN(), pN()));
    if (k == "mod-a") return fn(p(), fn(pAdj(), pAdj()));
    if (k == "nnp") return fn(entity(), fn(pN(), pN()));
    if (k == "adv-s" || k == "adv-e" || k == "adv-f") return fn(p(), sentMod());
    if (k == "fquan" || k == "nquan") return fn(pAdj(), detType());
    if (k == "plur") return fn(pN(), pN());
    if (k == "poss-by") return pred(Sort::None, 2);
    if (k == "=") return fn(entity(), p());
    if (k == "pair") return fn(entity(), fn(entity(), entity()));
    return macro(k);
  }
  if (atom.kind == NodeKind::Name && !atom.tag) return entity();
  if (!atom.tag) return std::nullopt;
  switch (*atom.tag) {
    case Tag::Pro: case Tag::Rel: case Tag::Sk: return entity();
    case Tag::N: return pN();
    case Tag::V: return openPred(Sort::V);
    case Tag::A: return openPred(Sort::Adj);
    case Tag::P: case Tag::PArg: return pred(Sort::P, 2);
    case Tag::D: return detType();
    case Tag::AuxV: case Tag::AuxS: return tense();
    case Tag::AdvA: return fn(pV(), pV());
    case Tag::AdvE: case Tag::AdvS: case Tag::AdvF: return sentMod();
    case Tag::Cc: return coord();
    case Tag::Ps: return fn(sent(), sentMod());
    case Tag::Pq: return sentMod();
    case Tag::ModN: return fn(pN(), pN());
    case Tag::ModA: return fn(pAdj(), pAdj());
  }
  return std::nullopt;
}

// Side conditions observed while composing; the checker decides their
// severity by mode.
struct ComposeFlags {
  bool implicitShift = false;  // bare predicate-predicate modification
  bool postfixVerbMod = false; // adv-a after or among verb arguments
  bool floatingSentOp = false; // sentence operator inside a flat list
  bool sortCoercion = false;   // unsorted predicate used where a sort is demanded
  bool ambiguous = false;
};

enum class Orientation { LeftOperator, RightOperator };

struct Composition {
  SemType type;
  Orientation orientation = Orientation::LeftOperator;
  ComposeFlags flags;
};

// Whether actual fits a slot demanding expected.
inline bool accepts(const SemType& expected, const SemType& actual,
                    ComposeFlags* flags = nullptr) {
  using K = SemType::Kind;
  if (isWild(expected) || isWild(actual)) return true;
  switch (expected.kind) {
    case K::Entity:
      return isEntityLike(actual);
    case K::Pred:
      if (!actual.is(K::Pred)) return false;
      if (expected.arity == 1 && !expected.open ? !isMonadic(actual)
                                                : actual.arity != expected.arity)
        return false;
      if (expected.sort == Sort::None || actual.sort == expected.sort)
        return true;
      if (actual.sort == Sort::None) {
        if (flags) flags->sortCoercion = true;
        return true;
      }
      return false;
    case K::SentIntension:
      // An episode-anchored formula stands in for a sentence.
      return actual.is(K::SentIntension) || actual.is(K::Truth);
    case K::Fn:
      return actual.is(K::Fn) && accepts(*expected.from, *actual.from, flags) &&
             accepts(*expected.to, *actual.to, flags);
    default:
      return expected == actual;
  }
}

// Equal up to sort `none` on either side.
inline bool unifies(const SemType& a, const SemType& b) {
  return accepts(a, b) || accepts(b, a);
}

namespace detail {

inline SemType consumeArg(SemType pred) {
  if (pred.open) {
    ++pred.consumed;
  } else {
    --pred.arity;
  }
  return pred;
}

inline SemType joinMarkers(const SemType& a, const SemType& b) {
  if (a.is(SemType::Kind::Tense) || b.is(SemType::Kind::Tense)) return types::tense();
  if (a.is(SemType::Kind::Cf) || b.is(SemType::Kind::Cf)) return types::cf();
  return types::aspect();
}

// Left constituent as operator over the right one.
inline std::optional<SemType> applyLeft(const SemType& L, const SemType& R,
                                        bool allowImplicitShift,
                                        ComposeFlags& flags) {
  using K = SemType::Kind;
  if (L.is(K::Fn)) {
    if (accepts(*L.from, R, &flags)) return *L.to;
    // Sentence modifiers also apply pointwise to verbal predicates.
    if (isSentMod(L) && R.is(K::Pred)) return R;
    return std::nullopt;
  }
  if (L.is(K::Pred)) {
    bool takesArg = L.open || L.arity >= 2;
    if (takesArg && isEntityLike(R) && !isWild(R)) return consumeArg(L);
    if (L.open && L.sort == Sort::V && isMonadic(R)) return consumeArg(L);
    if (takesArg && isWild(R)) return consumeArg(L);
    // Raw ULF may drop mod-n/mod-a: (burning.a hot.a), (ice.n cream.n).
    if (allowImplicitShift && isMonadic(L) && isMonadic(R) &&
        (R.sort == Sort::N || (R.sort == Sort::Adj && L.sort == Sort::Adj))) {
      flags.implicitShift = true;
      return types::pred(R.sort);
    }
    return std::nullopt;
  }
  if (isMarker(L)) {
    if (R.is(K::Pred) || R.is(K::SentIntension)) return R;
    if (isMarker(R)) return joinMarkers(L, R);
    return std::nullopt;
  }
  return std::nullopt;
}

// Right constituent as operator, left as operand.
inline std::optional<SemType> applyRight(const SemType& L, const SemType& R,
                                         ComposeFlags& flags) {
  using K = SemType::Kind;
  if (R.is(K::Pred) && isEntityLike(L) && isMonadic(R)) return types::sent();
  // Only verb and sentence modifiers may follow their operand.
  if (isVerbMod(R) && accepts(*R.from, L, &flags)) {
    flags.postfixVerbMod = true;
    return L;
  }
  if (isSentMod(R) && (L.is(K::SentIntension) || L.is(K::Pred))) return L;
  return std::nullopt;
}

}  // namespace detail

// Binary composition in either orientation. With both fitting, the left
// constituent is taken as operand and the ambiguity is flagged.
inline std::optional<Composition> compose(const SemType& L, const SemType& R,
                                          bool allowImplicitShift = true) {
  if (isWild(L) || isWild(R)) {
    Composition c;
    c.type = L.is(SemType::Kind::Error) || R.is(SemType::Kind::Error)
                 ? types::error()
                 : types::any();
    return c;
  }
  ComposeFlags fl, fr;
  auto left = detail::applyLeft(L, R, allowImplicitShift, fl);
  auto right = detail::applyRight(L, R, fr);
  if (left && right) {
    if (*left == *right) {
      Composition c{*left, Orientation::LeftOperator, fl};
      return c;
    }
    Composition c{*right, Orientation::RightOperator, fr};
    c.flags.ambiguous = true;
    return c;
  }
  if (left) return Composition{*left, Orientation::LeftOperator, fl};
  if (right) return Composition{*right, Orientation::RightOperator, fr};
  return std::nullopt;
}

enum class CheckMode { Raw, Strict };

// Per-node type annotation mirroring the expression tree.
struct Typed {
  SemType type;
  std::vector<Typed> children;
};

struct TypeResult {
  SemType type;
  Typed tree;
  std::vector<Diagnostic> diagnostics;
  // Nodes typed as predicates because they are the smallest sentence
  // around a relativizer.
  std::vector<Path> relClauses;
  bool ok() const { return !hasErrors(diagnostics); }
};

namespace detail {

inline bool isCopula(const Expr& e) {
  if (e.kind == NodeKind::Lex) return e.tag == Tag::V && e.text == "be";
  if (e.isList() && e.size() == 2) return isCopula(e[1]);
  return false;
}

inline bool isPlainPP(const Expr& e) {
  return e.isList() && !e.children.empty() && e[0].hasTag(Tag::P);
}

class TypeInferer {
 public:
  explicit TypeInferer(CheckMode mode) : mode_(mode) {}

  Typed run(const Expr& e) {
    Path path;
    auto r = infer(e, path);
    return std::move(r.typed);
  }

  std::vector<Diagnostic> diags;
  std::vector<Path> relClauses;

 private:
  struct Node {
    Typed typed;
    int relPending = 0;
  };

  struct Item {
    SemType type;
    const Expr* expr;
    Path path;
  };

  void report(Severity sev, const Path& path, std::string code,
              std::string msg) {
    if (sev != Severity::Error && mode_ == CheckMode::Raw) return;
    Diagnostic d;
    d.path = path;
    d.severity = sev;
    d.code = std::move(code);
    d.message = std::move(msg);
    diags.push_back(std::move(d));
  }

  void applyFlags(const ComposeFlags& f, const Path& path) {
    if (f.implicitShift && mode_ == CheckMode::Strict)
      report(Severity::Error, path, "MissingShifter",
             "predicate modification needs an explicit type-shifter");
    if (f.postfixVerbMod)
      report(Severity::Warning, path, "UnnormalizedAdvA",
             "verb-phrase adverbial is not in operator position");
    if (f.floatingSentOp)
      report(Severity::Warning, path, "FloatingOperator",
             "sentence-level operator is floating mid-clause");
    if (f.sortCoercion)
      report(Severity::Note, path, "SortCoercion",
             "unsorted predicate accepted where a sorted one is expected");
    if (f.ambiguous)
      report(Severity::Note, path, "Ambiguous",
             "both operator orientations fit; left taken as operand");
  }

  bool bound(const std::string& v) const {
    for (auto it = vars_.rbegin(); it != vars_.rend(); ++it)
      if (*it == v) return true;
    return false;
  }

  Node leaf(const Expr& e, const Path& path) {
    Node n;
    switch (e.kind) {
      case NodeKind::Var:
        n.typed.type = bound(e.text) ? types::entity() : types::any();
        return n;
      case NodeKind::Hole: {
        for (auto it = holes_.rbegin(); it != holes_.rend(); ++it)
          if (it->first == e.text) {
            n.typed.type = it->second;
            return n;
          }
        n.typed.type = types::any();
        return n;
      }
      case NodeKind::Punct:
        n.typed.type = types::macro(e.text);
        return n;
      default:
        break;
    }
    auto t = atomType(e);
    if (!t) {
      report(Severity::Error, path, "UnknownOperator",
             "atom outside the signature: " + print(e));
      n.typed.type = types::error();
      return n;
    }
    if (e.hasTag(Tag::Pq))
      report(Severity::Note, path, "Experimental", ".pq typing is provisional");
    n.typed.type = *t;
    if (e.hasTag(Tag::Rel)) n.relPending = 1;
    return n;
  }

  Node infer(const Expr& e, Path& path) {
    Node n = e.isList() ? list(e, path) : leaf(e, path);
    // The smallest sentence around a relativizer denotes a predicate.
    if (n.relPending > 0 && n.typed.type.is(SemType::Kind::SentIntension)) {
      n.typed.type = types::p();
      n.relPending = 0;
      relClauses.push_back(path);
    }
    return n;
  }

  Node inferChild(const Expr& parent, std::size_t i, Path& path) {
    path.push_back(i);
    Node n = infer(parent[i], path);
    path.pop_back();
    return n;
  }

  static bool isHeadKeyword(const Expr& e, std::string_view k) {
    return e.isList() && e.size() >= 1 && e[0].isKeyword(k);
  }

  static int countHoles(const Expr& e, std::string_view hole) {
    if (e.kind == NodeKind::Hole) return e.text == hole ? 1 : 0;
    int n = 0;
    for (auto& c : e.children) {
      // Holes inside a nested macro of the same kind belong to it.
      if ((hole == "*h" && isHeadKeyword(c, "sub")) ||
          (hole == "*p" && isHeadKeyword(c, "rep")))
        continue;
      n += countHoles(c, hole);
    }
    return n;
  }

  Node fail(Node n, const Path& path, std::string code, std::string msg) {
    report(Severity::Error, path, std::move(code), std::move(msg));
    n.typed.type = types::error();
    return n;
  }

  Node list(const Expr& e, Path& path) {
    const auto& head = e[0];

    if (head.isKeyword("λ")) {
      Node n;
      if (e.size() != 3 || e[1].kind != NodeKind::Var) {
        for (std::size_t i = 0; i < e.size(); ++i)
          n.typed.children.push_back(inferChild(e, i, path).typed);
        return fail(std::move(n), path, "ArityError", "λ needs a variable and a body");
      }
      n.typed.children.push_back(Typed{types::macro("λ"), {}});
      n.typed.children.push_back(Typed{types::entity(), {}});
      vars_.push_back(e[1].text);
      Node body = inferChild(e, 2, path);
      vars_.pop_back();
      n.relPending = body.relPending;
      n.typed.children.push_back(body.typed);
      const auto& bt = n.typed.children.back().type;
      if (bt.is(SemType::Kind::SentIntension) || isWild(bt)) {
        n.typed.type = types::p();
        return n;
      }
      return fail(std::move(n), child(path, 2), "NoFit",
                  "λ body must be a sentence, got " + toString(bt));
    }

    if (head.isKeyword("sub") || head.isKeyword("rep")) {
      bool sub = head.isKeyword("sub");
      std::string hole = sub ? "*h" : "*p";
      Node n;
      n.typed.children.push_back(Typed{types::macro(head.text), {}});
      if (e.size() != 3) {
        for (std::size_t i = 1; i < e.size(); ++i)
          n.typed.children.push_back(inferChild(e, i, path).typed);
        return fail(std::move(n), path, "ArityError", head.text + " takes two arguments");
      }
      std::size_t fillerIdx = sub ? 1 : 2, bodyIdx = sub ? 2 : 1;
      Node filler = inferChild(e, fillerIdx, path);
      holes_.emplace_back(hole, filler.typed.type);
      Node body = inferChild(e, bodyIdx, path);
      holes_.pop_back();
      n.relPending = filler.relPending + body.relPending;
      if (sub) {
        n.typed.children.push_back(filler.typed);
        n.typed.children.push_back(body.typed);
      } else {
        n.typed.children.push_back(body.typed);
        n.typed.children.push_back(filler.typed);
      }
      int holes = countHoles(e[bodyIdx], hole);
      if (holes == 0)
        return fail(std::move(n), path, "MissingHole", "no " + hole + " in " + head.text);
      if (holes > 1)
        return fail(std::move(n), path, "MultipleHoles", "more than one " + hole);
      n.typed.type = body.typed.type;
      return n;
    }

    if (head.isKeyword("n+preds") || head.isKeyword("np+preds")) {
      bool np = head.isKeyword("np+preds");
      Node n;
      n.typed.children.push_back(Typed{types::macro(head.text), {}});
      std::vector<Node> kids;
      for (std::size_t i = 1; i < e.size(); ++i) {
        kids.push_back(inferChild(e, i, path));
        n.relPending += kids.back().relPending;
        n.typed.children.push_back(kids.back().typed);
      }
      // Relativizer sentences were already turned into predicates.
      n.relPending = 0;
      if (e.size() < 3)
        return fail(std::move(n), path, "ArityError", head.text + " needs a head and a predicate");
      const auto& ht = kids[0].typed.type;
      if (np ? !isEntityLike(ht) : !(isMonadic(ht) || isWild(ht)))
        return fail(std::move(n), child(path, 1), "NoFit",
                    head.text + " head has type " + toString(ht));
      for (std::size_t i = 1; i < kids.size(); ++i) {
        const auto& pt = kids[i].typed.type;
        if (!isMonadic(pt) && !isWild(pt))
          return fail(std::move(n), child(path, i + 1), "NoFit",
                      head.text + " modifier must be a monadic predicate, got " +
                          toString(pt));
      }
      n.typed.type = np ? types::unscopedDet()
                        : (isWild(ht) ? types::p() : types::pred(ht.sort));
      return n;
    }

    std::vector<Node> kids;
    int pending = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      kids.push_back(inferChild(e, i, path));
      pending += kids.back().relPending;
    }
    Node n;
    n.relPending = pending;
    for (auto& k : kids) n.typed.children.push_back(k.typed);

    for (auto& k : kids)
      if (k.typed.type.is(SemType::Kind::Error)) {
        n.typed.type = types::error();
        return n;
      }

    std::vector<Item> items;
    for (std::size_t i = 0; i < e.size(); ++i)
      items.push_back(Item{kids[i].typed.type, &e[i], child(path, i)});

    // (NP 's): possessor marker acting as a determiner.
    if (e.size() == 2 && e[1].isKeyword("'s")) {
      if (!isEntityLike(items[0].type))
        return fail(std::move(n), child(path, 0), "NoFit", "possessor must be an entity");
      n.typed.type = types::detType();
      return n;
    }

    // Episodic operators relate a formula to an episode term.
    if (e.size() == 3 && (e[1].isKeyword("**") || e[1].isKeyword("*") ||
                          e[1].isKeyword("@"))) {
      bool formula = items[0].type.is(SemType::Kind::SentIntension) ||
                     items[0].type.is(SemType::Kind::Truth) || isWild(items[0].type);
      if (!formula || !isEntityLike(items[2].type))
        return fail(std::move(n), path, "NoFit", "episodic operator needs formula and episode");
      n.typed.type = types::truth();
      return n;
    }

    // Speech-act punctuation.
    if (e.children.back().kind == NodeKind::Punct) {
      std::vector<Item> rest(items.begin(), items.end() - 1);
      auto t = flat(rest, path);
      if (!t) return failListNoFit(std::move(n), items, path);
      if (!(t->is(SemType::Kind::SentIntension) || isWild(*t)))
        return fail(std::move(n), path, "NoFit",
                    "punctuation applies to sentences, got " + toString(*t));
      n.typed.type = types::question(e.children.back().text);
      return n;
    }

    // Coordination.
    bool hasCc = false;
    for (auto& it : items) hasCc |= it.type.is(SemType::Kind::Coord);
    if (hasCc) {
      std::vector<SemType> parts;
      for (auto& it : items)
        if (!it.type.is(SemType::Kind::Coord)) parts.push_back(it.type);
      auto j = join(parts);
      if (!j)
        return fail(std::move(n), path, "NoFit", "coordinated constituents differ in type");
      n.typed.type = *j;
      return n;
    }

    auto t = flat(items, path);
    if (!t) return failListNoFit(std::move(n), items, path);
    n.typed.type = *t;
    return n;
  }

  static std::optional<SemType> join(const std::vector<SemType>& parts) {
    if (parts.empty()) return std::nullopt;
    std::optional<SemType> acc;
    for (auto& p : parts) {
      if (isWild(p)) continue;
      if (!acc) {
        acc = p;
        continue;
      }
      if (*acc == p) continue;
      auto formula = [](const SemType& t) {
        return t.is(SemType::Kind::Truth) || t.is(SemType::Kind::SentIntension);
      };
      if (formula(*acc) && formula(p)) {
        acc = types::truth();
      } else if (isEntityLike(*acc) && isEntityLike(p)) {
        acc = types::entity();
      } else if (isMonadic(*acc) && isMonadic(p)) {
        acc = types::pred(acc->sort == p.sort ? acc->sort : Sort::None);
      } else if (isMarker(*acc) && isMarker(p)) {
        acc = joinMarkers(*acc, p);
      } else {
        return std::nullopt;
      }
    }
    return acc ? acc : std::optional<SemType>(types::any());
  }

  Node failListNoFit(Node n, const std::vector<Item>& items, const Path& path) {
    // Blame the argument when a single operator is evident.
    if (items.size() == 2) {
      const auto& L = items[0];
      const auto& R = items[1];
      if (L.type.is(SemType::Kind::Fn) && !R.type.is(SemType::Kind::Fn)) {
        std::string msg = "operator expects " + toString(*L.type.from) + ", got " +
                          toString(R.type);
        if (L.expr->hasTag(Tag::D) || isHeadKeyword(*L.expr, "fquan") ||
            isHeadKeyword(*L.expr, "nquan"))
          msg = "determiner needs a nominal predicate, got " + toString(R.type);
        return fail(std::move(n), R.path, "NoFit", msg);
      }
      if (R.type.is(SemType::Kind::Fn) && !L.type.is(SemType::Kind::Fn))
        return fail(std::move(n), L.path, "NoFit",
                    "operator expects " + toString(*R.type.from) + ", got " +
                        toString(L.type));
    }
    std::string msg = "no composition for (";
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) msg += " ";
      msg += toString(items[i].type);
    }
    return fail(std::move(n), path, "NoFit", msg + ")");
  }

  std::optional<SemType> two(const Item& L, const Item& R, const Path& at) {
    auto c = compose(L.type, R.type, true);
    if (!c) return std::nullopt;
    if (c->orientation == Orientation::LeftOperator && L.type.is(SemType::Kind::Pred) &&
        L.type.sort == Sort::V && L.type.open && isMonadic(R.type) &&
        isPlainPP(*R.expr) && !isCopula(*L.expr))
      report(Severity::Warning, R.path, "PlainPPComplement",
             "prepositional phrase used as a verb complement; adv-a intended?");
    applyFlags(c->flags, at);
    return c->type;
  }

  // Typing of a flat sibling sequence (a list's children, or a tail of them).
  std::optional<SemType> flat(const std::vector<Item>& items, const Path& at) {
    using K = SemType::Kind;
    if (items.empty()) return std::nullopt;
    if (items.size() == 1) return items[0].type;
    if (items.size() == 2) return two(items[0], items[1], at);

    // Floating sentence operators are set aside and re-applied at the end.
    std::vector<Item> core;
    std::size_t floating = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i > 0 && isSentMod(items[i].type))
        ++floating;
      else
        core.push_back(items[i]);
    }
    if (floating > 0 && !core.empty()) {
      auto t = flat(core, at);
      if (t && (t->is(K::SentIntension) || t->is(K::Pred) || isWild(*t))) {
        ComposeFlags f;
        f.floatingSentOp = true;
        applyFlags(f, at);
        return t;
      }
      return std::nullopt;
    }

    // Predicate with arguments and interleaved verb modifiers.
    if (items[0].type.is(K::Pred)) {
      SemType acc = items[0].type;
      bool ok = true, interleaved = false;
      for (std::size_t i = 1; i < items.size() && ok; ++i) {
        const auto& it = items[i];
        if (acc.sort == Sort::V && isVerbMod(it.type)) {
          interleaved = true;
          continue;
        }
        ComposeFlags f;
        auto r = applyLeft(acc, it.type, false, f);
        if (!r || !r->is(K::Pred)) {
          ok = false;
          break;
        }
        if (acc.open && acc.sort == Sort::V && isMonadic(it.type) &&
            isPlainPP(*it.expr) && !isCopula(*items[0].expr))
          report(Severity::Warning, it.path, "PlainPPComplement",
                 "prepositional phrase used as a verb complement; adv-a intended?");
        applyFlags(f, at);
        acc = *r;
      }
      if (ok && (acc.open || acc.arity >= 1)) {
        if (interleaved) {
          ComposeFlags f;
          f.postfixVerbMod = true;
          applyFlags(f, at);
        }
        return acc;
      }
    }

    // Subject-auxiliary inversion: (AUX subject VP).
    if (isMarker(items[0].type) && isEntityLike(items[1].type)) {
      std::vector<Item> vp(items.begin() + 2, items.end());
      auto t = flat(vp, at);
      if (t && (isMonadic(*t) || isWild(*t))) return types::sent();
    }

    // Subject followed by a flat predicate: (x = y), (e at-about.p now).
    if (isEntityLike(items[0].type)) {
      std::vector<Item> rest(items.begin() + 1, items.end());
      auto t = flat(rest, at);
      if (t && (isMonadic(*t) || isWild(*t))) return types::sent();
    }

    // Curried application, left to right.
    std::optional<SemType> acc = items[0].type;
    for (std::size_t i = 1; i < items.size() && acc; ++i) {
      auto c = compose(*acc, items[i].type, true);
      if (!c) return std::nullopt;
      applyFlags(c->flags, at);
      acc = c->type;
    }
    return acc;
  }

  CheckMode mode_;
  std::vector<std::string> vars_;
  std::vector<std::pair<std::string, SemType>> holes_;
};

}  // namespace detail

// Bottom-up type of a parsed expression. Macro applications are typed by
// their expansion semantics; diagnostics carry node paths.
inline TypeResult inferType(const Expr& e, CheckMode mode = CheckMode::Raw) {
  detail::TypeInferer inf(mode);
  TypeResult r;
  r.tree = inf.run(e);
  r.type = r.tree.type;
  r.diagnostics = std::move(inf.diags);
  r.relClauses = std::move(inf.relClauses);
  return r;
}

inline const Typed* typedAt(const Typed& root, const Path& path) {
  const Typed* cur = &root;
  for (auto i : path) {
    if (i >= cur->children.size()) return nullptr;
    cur = &cur->children[i];
  }
  return cur;
}

// Sentence-level result types accepted as a complete formula.
inline bool isSentential(const SemType& t) {
  return t.is(SemType::Kind::SentIntension) || t.is(SemType::Kind::Question) ||
         t.is(SemType::Kind::Truth);
}

}  // namespace ulf
