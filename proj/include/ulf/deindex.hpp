#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ulf/diagnostic.hpp"
#include "ulf/reader.hpp"
#include "ulf/scoper.hpp"

namespace ulf {

struct DeindexOptions {
  int firstEpisode = 1;  // |E1|.sk, |E2|.sk, ...
  int now = 1;           // |Now1|
  std::string presRelation = "at-about.p";
  std::string pastRelation = "before.p";
  std::string cfRelation = "at-about.p";
  bool expandAdverbials = true;
};

struct DeindexResult {
  std::vector<Expr> formulas;  // temporal predications first, then the main formula
  std::vector<Diagnostic> diagnostics;
  int episodes = 0;
};

namespace detail {

inline Expr episodeConst(int n) { return Expr::name("E" + std::to_string(n), Tag::Sk); }

inline bool isAdverbialApp(const Expr& e) {
  return e.isList() && e.size() == 2 && (e[0].isKeyword("adv-a") || e[0].isKeyword("adv-e"));
}

inline bool hasAdverbial(const Expr& e) { return containsIf(e, isAdverbialApp); }

// Length of the longest chain of nested perf/prog applications.
inline int aspectDepth(const Expr& e) {
  if (!e.isList()) return 0;
  int inner = 0;
  for (auto& c : e.children) inner = std::max(inner, aspectDepth(c));
  bool aspect = e.size() == 2 && (e[0].isKeyword("perf") || e[0].isKeyword("prog"));
  return inner + (aspect ? 1 : 0);
}

// Splits verb-phrase adverbials (adv-a π) / (adv-e π) off a predicate,
// prefix or flat.
inline Expr stripAdverbials(const Expr& vp, std::vector<Expr>& mods) {
  if (!vp.isList()) return vp;
  if (vp.size() == 2 && isAdverbialApp(vp[0])) {
    mods.push_back(vp[0][1]);
    return stripAdverbials(vp[1], mods);
  }
  if (vp.size() >= 2 && !isAdverbialApp(vp)) {
    std::vector<Expr> keep;
    for (std::size_t i = 0; i < vp.size(); ++i) {
      if (i > 0 && isAdverbialApp(vp[i]))
        mods.push_back(vp[i][1]);
      else
        keep.push_back(vp[i]);
    }
    if (keep.size() == 1) return stripAdverbials(keep[0], mods);
    if (keep.size() != vp.size()) return Expr::list(std::move(keep));
  }
  return vp;
}

}  // namespace detail

// Turns each (φ ** ε) whose φ is (σ VP) with VP adverbials into
// ((φ' ** ε) and.cc ((pair σ ε) π) ...).
inline Expr expandAdverbial(const Expr& form) {
  auto go = [&](auto& self, const Expr& e, bool inEpisode) -> Expr {
    if (e.isLeaf()) return e;
    if (e.size() == 3 && e[1].isKeyword("**")) {
      const Expr& phi = e[0];
      const Expr& eps = e[2];
      if (phi.isList() && phi.size() == 2 && !isQuantifier(phi)) {
        std::vector<Expr> mods;
        Expr vp = detail::stripAdverbials(phi[1], mods);
        if (!mods.empty()) {
          std::vector<Expr> conj{Expr::list({Expr::list({phi[0], vp}), Expr::keyword("**"), eps})};
          for (auto& m : mods) {
            conj.push_back(Expr::lex("and", Tag::Cc));
            conj.push_back(Expr::list({Expr::list({Expr::keyword("pair"), phi[0], eps}), m}));
          }
          return Expr::list(std::move(conj));
        }
      }
      Expr copy = e;
      copy.children[0] = self(self, e[0], true);
      return copy;
    }
    if (!inEpisode && detail::isAdverbialApp(e))
      fail("NoEpisodeInScope", "adverbial " + print(e) + " has no characterized episode");
    Expr copy = e;
    for (auto& c : copy.children) c = self(self, c, inEpisode);
    return copy;
  };
  return go(go, form, false);
}

// Minimal deindexing: one episode constant per tensed clause, a temporal
// predication relating it to the utterance time, and the clause
// characterizing it via **.
inline DeindexResult deindex(const Expr& form, const DeindexOptions& opts = {}) {
  DeindexResult r;
  int next = opts.firstEpisode;
  Expr now = Expr::name("Now" + std::to_string(opts.now));
  std::vector<Expr> temporal;
  auto go = [&](auto& self, const Expr& e) -> Expr {
    if (e.isLeaf()) return e;
    if (detail::isTensed(e)) {
      Expr ep = detail::episodeConst(next++);
      ++r.episodes;
      const auto& op = e[0].text;
      const auto& rel = op == "pres" ? opts.presRelation : op == "past" ? opts.pastRelation : opts.cfRelation;
      temporal.push_back(Expr::list({ep, parseOrThrow(rel), now}));
      if (detail::aspectDepth(e[1]) > 1) {
        Diagnostic d;
        d.severity = Severity::Warning;
        d.code = "UnsupportedTense";
        d.message = "aspect nesting beyond one level left in place";
        r.diagnostics.push_back(d);
      }
      return Expr::list({self(self, e[1]), Expr::keyword("**"), ep});
    }
    Expr copy = e;
    for (auto& c : copy.children) c = self(self, c);
    return copy;
  };
  Expr main = go(go, form);
  // An untensed clause still needs an episode to hang adverbials on.
  if (opts.expandAdverbials && r.episodes == 0 && detail::hasAdverbial(main)) {
    main = Expr::list({main, Expr::keyword("**"), detail::episodeConst(next++)});
    ++r.episodes;
  }
  if (opts.expandAdverbials) main = expandAdverbial(main);
  r.formulas = std::move(temporal);
  r.formulas.push_back(std::move(main));
  return r;
}

}  // namespace ulf
