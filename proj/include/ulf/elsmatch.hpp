#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ulf/diagnostic.hpp"
#include "ulf/reader.hpp"

namespace ulf {

// Bumped whenever the triple encoding changes; scores are only comparable
// within one version.
inline constexpr int kTripleEncodingVersion = 1;
inline constexpr const char* kComplexConcept = "complex";

struct Triple {
  std::string rel;       // instance, op, arg1, arg2, ...
  int src = 0;
  int dst = -1;          // target variable, or -1 for a constant
  std::string constant;  // concept or leaf atom when dst < 0

  bool operator==(const Triple&) const = default;
};

struct TripleGraph {
  int vars = 0;
  std::vector<Triple> triples;

  // `complex` instance triples are structural and do not count.
  std::vector<Triple> counted() const {
    std::vector<Triple> out;
    for (auto& t : triples)
      if (!(t.rel == "instance" && t.constant == kComplexConcept)) out.push_back(t);
    return out;
  }
  std::size_t size() const { return counted().size(); }
};

// One variable per list node in depth-first order. A list's head is its
// `op` edge and the rest are arg1, arg2, ...; leaves are constants.
inline TripleGraph toTriples(const Expr& e) {
  TripleGraph g;
  if (e.isLeaf()) {
    g.vars = 1;
    g.triples.push_back({"instance", 0, -1, print(e)});
    return g;
  }
  auto go = [&](auto& self, const Expr& n) -> int {
    int v = g.vars++;
    g.triples.push_back({"instance", v, -1, kComplexConcept});
    for (std::size_t i = 0; i < n.size(); ++i) {
      std::string rel = i == 0 ? "op" : "arg" + std::to_string(i);
      if (n[i].isList()) {
        int c = self(self, n[i]);
        g.triples.push_back({rel, v, c, {}});
      } else {
        g.triples.push_back({rel, v, -1, print(n[i])});
      }
    }
    return v;
  };
  go(go, e);
  return g;
}

enum class SearchMethod { Auto, Exhaustive, HillClimb };

struct ScoreOptions {
  int restarts = 4;
  std::uint32_t seed = 1;
  SearchMethod method = SearchMethod::Auto;
  int exhaustiveLimit = 8;  // Auto searches exhaustively up to this many variables
};

struct ScoreResult {
  double f1 = 0;
  double precision = 0;
  double recall = 0;
  std::size_t matched = 0;
  std::size_t sizeA = 0;
  std::size_t sizeB = 0;
  std::vector<int> mapping;  // a-variable -> b-variable or -1
};

namespace detail {

class Aligner {
 public:
  Aligner(const TripleGraph& a, const TripleGraph& b) : na_(a.vars), nb_(b.vars) {
    std::map<std::string, int> rels, consts;
    auto id = [](std::map<std::string, int>& table, const std::string& s) {
      return table.emplace(s, static_cast<int>(table.size())).first->second;
    };
    for (auto& t : a.counted())
      a_.push_back({id(rels, t.rel), t.src, t.dst, t.dst < 0 ? id(consts, t.constant) : -1});
    for (auto& t : b.counted()) {
      int r = id(rels, t.rel);
      if (t.dst < 0) {
        constEdges_.insert(key(r, t.src, id(consts, t.constant)));
      } else {
        varEdges_.insert(key(r, t.src, t.dst));
        bEdges_.push_back({r, t.src, t.dst, -1});
      }
    }
    edgesByRel_.assign(rels.size(), {});
    for (auto& e : bEdges_) edgesByRel_[e.rel].emplace_back(e.src, e.dst);
    byLast_.assign(na_, {});
    incident_.assign(na_, {});
    for (std::size_t i = 0; i < a_.size(); ++i) {
      auto& t = a_[i];
      // Each a-triple is scored once both its variables are placed.
      byLast_[std::max(t.src, t.dst)].push_back(i);
      incident_[t.src].push_back(i);
      if (t.dst >= 0) {
        if (t.dst != t.src) incident_[t.dst].push_back(i);
        edges_.push_back(i);
      }
    }
  }

  std::size_t matched(const std::vector<int>& m) const {
    std::size_t n = 0;
    for (auto& t : a_) n += hit(t, m);
    return n;
  }

  std::vector<int> exhaustive() const {
    std::vector<int> cur(na_, -1), best(na_, -1);
    std::vector<char> used(nb_, 0);
    std::size_t bestScore = 0;
    std::vector<std::size_t> suffix(na_ + 1, 0);
    for (int v = na_ - 1; v >= 0; --v) suffix[v] = suffix[v + 1] + byLast_[v].size();
    bool first = true;
    auto go = [&](auto& self, int v, std::size_t score) -> void {
      if (!first && score + suffix[v] <= bestScore) return;
      if (v == na_) {
        bestScore = score;
        best = cur;
        first = false;
        return;
      }
      for (int w = -1; w < nb_; ++w) {
        if (w >= 0 && used[w]) continue;
        cur[v] = w;
        if (w >= 0) used[w] = 1;
        std::size_t gain = 0;
        for (auto i : byLast_[v]) gain += hit(a_[i], cur);
        self(self, v + 1, score + gain);
        if (w >= 0) used[w] = 0;
        cur[v] = -1;
      }
    };
    go(go, 0, 0);
    return best;
  }

  // Restarts after the first: b's tree aligned onto a and inverted, the
  // anchor-and-grow start, then random permutations.
  std::vector<int> hillClimb(int restarts, std::uint32_t seed, const std::vector<int>& reverseStart = {}) const {
    std::mt19937 rng(seed);
    std::vector<int> best = treeStart();
    std::size_t bestScore = matched(best);
    climb(best, bestScore);
    for (int r = 1; r < restarts; ++r) {
      auto m = r == 1 && !reverseStart.empty() ? reverseStart : r <= 2 ? smartStart() : randomStart(rng);
      auto s = matched(m);
      climb(m, s);
      if (s > bestScore) {
        bestScore = s;
        best = m;
      }
    }
    return best;
  }

  // The best parent-preserving alignment of a's tree onto b, computed
  // bottom-up ignoring injectivity, then placed top-down skipping targets
  // already taken. In b each node has at most one child per relation, so
  // a child's edge can only match one place.
  std::vector<int> treeStart() const {
    std::map<std::pair<int, int>, int> childOf;
    for (auto& e : bEdges_) childOf[{e.src, e.rel}] = e.dst;
    std::vector<std::vector<std::pair<int, int>>> kids(na_);
    std::vector<std::vector<std::size_t>> consts(na_, std::vector<std::size_t>(nb_, 0));
    for (auto& t : a_) {
      if (t.dst > t.src) kids[t.src].emplace_back(t.rel, t.dst);
      if (t.dst < 0)
        for (int w = 0; w < nb_; ++w) consts[t.src][w] += constEdges_.count(key(t.rel, w, t.cst));
    }
    std::vector<std::vector<std::size_t>> best(na_, std::vector<std::size_t>(nb_, 0));
    std::vector<std::size_t> freeBest(na_, 0);
    auto linked = [&](int w, int rel) {
      auto it = childOf.find({w, rel});
      return it == childOf.end() ? -1 : it->second;
    };
    for (int u = na_ - 1; u >= 0; --u) {
      for (auto& [rel, c] : kids[u]) freeBest[u] += freeBest[c];
      for (int w = 0; w < nb_; ++w) {
        std::size_t b = consts[u][w];
        for (auto& [rel, c] : kids[u]) {
          int d = linked(w, rel);
          b += std::max(freeBest[c], d >= 0 ? 1 + best[c][d] : 0);
        }
        best[u][w] = b;
        freeBest[u] = std::max(freeBest[u], b);
      }
    }
    std::vector<int> m(na_, -1);
    std::vector<char> used(nb_, 0), placed(na_, 0);
    // Free subtrees take the best target still open; larger ones choose first.
    auto bestOpen = [&](int u) {
      int arg = -1;
      std::size_t top = 0;
      for (int w = 0; w < nb_; ++w) {
        if (used[w]) continue;
        std::size_t unmapped = 0;
        for (auto& [rel, c] : kids[u]) unmapped += freeBest[c];
        if (best[u][w] > std::max(top, unmapped)) top = best[u][w], arg = w;
      }
      return arg;
    };
    auto place = [&](auto& self, int u, int w) -> void {
      if (placed[u]) return;
      placed[u] = 1;
      if (w >= 0 && used[w]) w = -1;
      if (w >= 0) m[u] = w, used[w] = 1;
      auto order = kids[u];
      std::stable_sort(order.begin(), order.end(),
                       [&](auto& x, auto& y) { return freeBest[x.second] > freeBest[y.second]; });
      for (auto& [rel, c] : order) {
        int d = w >= 0 ? linked(w, rel) : -1;
        self(self, c, d >= 0 && !used[d] && 1 + best[c][d] >= freeBest[c] ? d : bestOpen(c));
      }
    };
    for (int u = 0; u < na_; ++u)
      if (!placed[u]) place(place, u, bestOpen(u));
    return m;
  }

  // Turns a b-to-a alignment into an a-to-b one.
  static std::vector<int> invert(const std::vector<int>& ba, int na) {
    std::vector<int> m(na, -1);
    for (std::size_t w = 0; w < ba.size(); ++w)
      if (ba[w] >= 0) m[ba[w]] = static_cast<int>(w);
    return m;
  }

 private:
  struct T {
    int rel, src, dst, cst;  // dst < 0: constant target cst
  };

  static std::uint64_t key(int rel, int s, int x) {
    return static_cast<std::uint64_t>(rel) << 42 | static_cast<std::uint64_t>(s) << 21 | static_cast<std::uint64_t>(x);
  }

  bool hit(const T& t, const std::vector<int>& m) const {
    int s = m[t.src];
    if (s < 0) return false;
    if (t.dst < 0) return constEdges_.count(key(t.rel, s, t.cst)) > 0;
    int d = m[t.dst];
    return d >= 0 && varEdges_.count(key(t.rel, s, d)) > 0;
  }

  // Greedy start: pair variables by shared constant edges, then extend the
  // pairing structurally from the roots and those anchors.
  std::vector<int> smartStart() const {
    std::vector<std::tuple<std::size_t, int, int>> cand;
    for (int v = 0; v < na_; ++v)
      for (int w = 0; w < nb_; ++w) {
        std::size_t c = 0;
        for (auto i : incident_[v])
          if (a_[i].dst < 0) c += constEdges_.count(key(a_[i].rel, w, a_[i].cst));
        if (c) cand.emplace_back(c, v, w);
      }
    std::stable_sort(cand.begin(), cand.end(), [](auto& x, auto& y) { return std::get<0>(x) > std::get<0>(y); });
    std::vector<int> m(na_, -1);
    std::vector<char> used(nb_, 0);
    auto assign = [&](int v, int w) {
      if (v < 0 || w < 0 || m[v] >= 0 || used[w]) return false;
      m[v] = w, used[w] = 1;
      return true;
    };
    for (auto& [c, v, w] : cand) assign(v, w);
    if (na_ && nb_) assign(0, 0);
    for (bool grew = true; grew;) {
      grew = false;
      for (auto i : edges_) {
        auto& t = a_[i];
        for (auto [s, d] : edgesByRel_[t.rel]) {
          if (m[t.src] == s) grew |= assign(t.dst, d);
          if (m[t.dst] == d) grew |= assign(t.src, s);
        }
      }
    }
    return m;
  }

  std::vector<int> randomStart(std::mt19937& rng) const {
    std::vector<int> targets(nb_);
    std::iota(targets.begin(), targets.end(), 0);
    std::shuffle(targets.begin(), targets.end(), rng);
    std::vector<int> m(na_, -1);
    for (int v = 0; v < na_ && v < nb_; ++v) m[v] = targets[v];
    std::shuffle(m.begin(), m.end(), rng);
    return m;
  }

  using Move = std::vector<std::pair<int, int>>;  // (a-variable, new target)

  struct State {
    std::vector<int> m, holder;
    void set(int v, int w) {
      if (m[v] >= 0) holder[m[v]] = -1;
      m[v] = w;
      if (w >= 0) holder[w] = v;
    }
  };

  // Score change of a move over the triples touching the variables it
  // moves. A target held by another variable evicts it.
  long delta(State& st, const Move& mv) const {
    std::vector<std::pair<int, int>> undo;  // (variable, old target)
    auto set = [&](int v, int w) {
      undo.emplace_back(v, st.m[v]);
      st.set(v, w);
    };
    for (auto& [v, w] : mv) {
      if (st.m[v] == w) continue;
      if (w >= 0 && st.holder[w] >= 0) set(st.holder[w], -1);
      set(v, w);
    }
    ++stamp_;
    long after = 0;
    std::vector<std::size_t> affected;
    for (auto& [v, _] : undo)
      for (auto i : incident_[v])
        if (seen_[i] != stamp_) seen_[i] = stamp_, affected.push_back(i), after += hit(a_[i], st.m);
    for (auto it = undo.rbegin(); it != undo.rend(); ++it) st.set(it->first, it->second);
    for (auto it = undo.rbegin(); it != undo.rend(); ++it)
      if (it->second >= 0) st.holder[it->second] = it->first;
    long before = 0;
    for (auto i : affected) before += hit(a_[i], st.m);
    return after - before;
  }

  void apply(State& st, const Move& mv) const {
    for (auto& [v, w] : mv) {
      if (st.m[v] == w) continue;
      if (w >= 0 && st.holder[w] >= 0) st.set(st.holder[w], -1);
      st.set(v, w);
    }
  }

  // Best-improvement moves: reassign one variable, swap two variables'
  // targets, or move both ends of an edge onto a same-relation edge of b.
  // When none helps, try an edge move followed by re-placing an edge of a
  // variable it evicted, which gets past single-edge conflicts.
  void climb(std::vector<int>& m, std::size_t& score) const {
    State st{m, std::vector<int>(nb_, -1)};
    for (int v = 0; v < na_; ++v)
      if (m[v] >= 0) st.holder[m[v]] = v;
    seen_.assign(a_.size(), 0);
    for (;;) {
      long bestGain = 0;
      Move best;
      auto consider = [&](Move mv) {
        long g = delta(st, mv);
        if (g > bestGain) bestGain = g, best = std::move(mv);
      };
      for (int v = 0; v < na_; ++v) {
        for (int w = -1; w < nb_; ++w)
          if (w != st.m[v]) consider({{v, w}});
        for (int u = v + 1; u < na_; ++u)
          if (st.m[u] != st.m[v]) consider({{v, st.m[u]}, {u, st.m[v]}});
      }
      for (auto i : edges_)
        for (auto [s, d] : edgesByRel_[a_[i].rel])
          if (st.m[a_[i].src] != s || st.m[a_[i].dst] != d) consider({{a_[i].src, s}, {a_[i].dst, d}});
      if (best.empty()) best = repairMove(st);
      if (best.empty()) break;
      apply(st, best);
    }
    m = st.m;
    score = matched(m);
  }

  Move repairMove(State& st) const {
    for (auto i : edges_) {
      auto& t = a_[i];
      for (auto [s, d] : edgesByRel_[t.rel]) {
        if (st.m[t.src] == s && st.m[t.dst] == d) continue;
        Move mv{{t.src, s}, {t.dst, d}};
        for (int x : {st.holder[s], st.holder[d]}) {
          if (x < 0 || x == t.src || x == t.dst) continue;
          for (auto j : incident_[x]) {
            auto& e = a_[j];
            if (e.dst < 0 || e.src == t.src || e.src == t.dst || e.dst == t.src || e.dst == t.dst) continue;
            for (auto [s2, d2] : edgesByRel_[e.rel]) {
              if (s2 == s || s2 == d || d2 == s || d2 == d) continue;
              Move two = mv;
              two.emplace_back(e.src, s2);
              two.emplace_back(e.dst, d2);
              if (delta(st, two) > 0) return two;
            }
          }
        }
      }
    }
    return {};
  }

  int na_, nb_;
  std::vector<T> a_, bEdges_;
  std::unordered_set<std::uint64_t> constEdges_, varEdges_;
  std::vector<std::vector<std::pair<int, int>>> edgesByRel_;
  std::vector<std::vector<std::size_t>> byLast_, incident_;
  std::vector<std::size_t> edges_;  // a-triples between two variables
  mutable std::vector<unsigned> seen_;
  mutable unsigned stamp_ = 0;
};

inline double f1(std::size_t matched, std::size_t a, std::size_t b) {
  return a + b == 0 ? 1.0 : 2.0 * static_cast<double>(matched) / static_cast<double>(a + b);
}

}  // namespace detail

inline ScoreResult score(const TripleGraph& a, const TripleGraph& b, const ScoreOptions& opts = {}) {
  detail::Aligner al(a, b);
  bool exhaustive = opts.method == SearchMethod::Exhaustive ||
                    (opts.method == SearchMethod::Auto && std::max(a.vars, b.vars) <= opts.exhaustiveLimit);
  ScoreResult r;
  if (exhaustive) {
    r.mapping = al.exhaustive();
  } else {
    // Climb from both sides and keep the better alignment, so the score
    // does not depend on argument order.
    detail::Aligner back(b, a);
    int restarts = std::max(1, opts.restarts);
    auto forward = al.hillClimb(restarts, opts.seed, detail::Aligner::invert(back.treeStart(), a.vars));
    auto reverse = detail::Aligner::invert(
        back.hillClimb(restarts, opts.seed, detail::Aligner::invert(al.treeStart(), b.vars)), a.vars);
    r.mapping = al.matched(reverse) > al.matched(forward) ? reverse : forward;
  }
  r.matched = al.matched(r.mapping);
  r.sizeA = a.size();
  r.sizeB = b.size();
  r.precision = r.sizeA ? static_cast<double>(r.matched) / static_cast<double>(r.sizeA) : 1.0;
  r.recall = r.sizeB ? static_cast<double>(r.matched) / static_cast<double>(r.sizeB) : 1.0;
  r.f1 = detail::f1(r.matched, r.sizeA, r.sizeB);
  return r;
}

inline ScoreResult score(const Expr& a, const Expr& b, const ScoreOptions& opts = {}) {
  return score(toTriples(a), toTriples(b), opts);
}

// Agreement over annotators.

struct ScoredAnnotation {
  std::string sentenceId;
  std::string ulf;
  bool certain = false;
};

using AnnotatorCorpus = std::map<std::string, std::vector<ScoredAnnotation>>;  // annotator -> records

struct PairCounts {
  std::size_t matched = 0, sizeA = 0, sizeB = 0, sentences = 0;
  double f1() const { return detail::f1(matched, sizeA, sizeB); }
};

struct AgreementReport {
  std::vector<std::string> annotators;
  std::map<std::pair<std::string, std::string>, double> pairwise;  // both orders plus the diagonal
  std::optional<double> overall;  // pooled over every off-diagonal pair
  bool certainOnly = false;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline TripleGraph graphOf(const std::string& text) {
  auto p = parse(text);
  return p.ok() ? toTriples(*p.expr) : TripleGraph{};
}

}  // namespace detail

// Document-level counts over the sentence ids both annotators share. An
// unparseable annotation contributes its side's triples as unmatched.
inline PairCounts pairCounts(const std::vector<ScoredAnnotation>& a, const std::vector<ScoredAnnotation>& b,
                             bool certainOnly, const ScoreOptions& opts = {}) {
  std::map<std::string, const ScoredAnnotation*> bs;
  for (auto& r : b)
    if (!r.ulf.empty() && (!certainOnly || r.certain)) bs[r.sentenceId] = &r;
  PairCounts c;
  for (auto& r : a) {
    if (r.ulf.empty() || (certainOnly && !r.certain)) continue;
    auto it = bs.find(r.sentenceId);
    if (it == bs.end()) continue;
    auto s = score(detail::graphOf(r.ulf), detail::graphOf(it->second->ulf), opts);
    c.matched += s.matched;
    c.sizeA += s.sizeA;
    c.sizeB += s.sizeB;
    ++c.sentences;
  }
  if (c.sentences == 0) fail("NoOverlap", "annotators share no scorable sentences");
  return c;
}

inline AgreementReport agreementMatrix(const AnnotatorCorpus& corpus, bool certainOnly,
                                       const ScoreOptions& opts = {}) {
  AgreementReport rep;
  rep.certainOnly = certainOnly;
  for (auto& [k, _] : corpus) rep.annotators.push_back(k);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < rep.annotators.size(); ++i) {
    rep.pairwise[{rep.annotators[i], rep.annotators[i]}] = 1.0;
    for (std::size_t j = i + 1; j < rep.annotators.size(); ++j) pairs.emplace_back(rep.annotators[i], rep.annotators[j]);
  }
  // Pairs are independent; results are collected in a fixed order.
  std::vector<std::future<std::optional<PairCounts>>> jobs;
  for (auto& [x, y] : pairs)
    jobs.push_back(std::async(std::launch::async, [&, x = x, y = y]() -> std::optional<PairCounts> {
      try {
        return pairCounts(corpus.at(x), corpus.at(y), certainOnly, opts);
      } catch (const DiagnosticError&) {
        return std::nullopt;
      }
    }));
  PairCounts pooled;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto c = jobs[i].get();
    auto& [x, y] = pairs[i];
    if (!c) {
      Diagnostic d;
      d.severity = Severity::Warning;
      d.code = "NoOverlap";
      d.message = x + " and " + y + " share no scorable sentences";
      rep.diagnostics.push_back(d);
      continue;
    }
    rep.pairwise[{x, y}] = rep.pairwise[{y, x}] = c->f1();
    pooled.matched += c->matched;
    pooled.sizeA += c->sizeA;
    pooled.sizeB += c->sizeB;
    pooled.sentences += c->sentences;
  }
  if (pooled.sentences) rep.overall = pooled.f1();
  return rep;
}

}  // namespace ulf
