#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ulf/macros.hpp"
#include "ulf/reader.hpp"
#include "ulf/types.hpp"

namespace ulf {

namespace detail {

inline SemType isolatedType(const Expr& e) {
  if (e.isLeaf()) {
    if (auto t = atomType(e)) return *t;
    return types::any();
  }
  return inferType(e).type;
}

inline bool isBareName(const Expr& e) { return e.kind == NodeKind::Name && !e.tag; }

}  // namespace detail

// Inserts mod-n, mod-a or nnp wherever a prefixed predicate modifies a
// following predicate without a shifter. Bottom-up.
inline Expr insertShifters(const Expr& e) {
  Path path;
  auto go = [&](auto& self, const Expr& node) -> Expr {
    if (node.isLeaf()) return node;
    Expr out = node;
    for (std::size_t i = 0; i < out.size(); ++i) {
      path.push_back(i);
      out.children[i] = self(self, node[i]);
      path.pop_back();
    }
    if (out.size() != 2 || out[0].kind == NodeKind::Keyword) return out;
    auto L = detail::isolatedType(out[0]);
    auto R = detail::isolatedType(out[1]);
    if (detail::isBareName(out[0]) && isMonadic(R) && R.sort == Sort::N)
      return Expr::list({Expr::list({Expr::keyword("nnp"), out[0]}), out[1]});
    if (!isMonadic(L) || !isMonadic(R)) return out;
    if (compose(L, R, false)) return out;
    switch (R.sort) {
      case Sort::N:
        return Expr::list({Expr::list({Expr::keyword("mod-n"), out[0]}), out[1]});
      case Sort::Adj:
        return Expr::list({Expr::list({Expr::keyword("mod-a"), out[0]}), out[1]});
      case Sort::None:
        fail("ShiftAmbiguous", "cannot tell the sort of the modified predicate " + print(out[1]), path);
      default:
        return out;
    }
  };
  return go(go, e);
}

// Pulls adv-a modifiers out of a verb's argument list and applies them
// prefix to the saturated verb, leftmost innermost.
inline Expr normalizeAdvA(const Expr& e) {
  return rewriteBottomUp(e, [](Expr n) {
    if (!n.isList() || n.size() < 2) return n;
    auto head = detail::isolatedType(n[0]);
    if (!head.is(SemType::Kind::Pred) || head.sort != Sort::V) return n;
    std::vector<Expr> keep{n[0]}, mods;
    for (std::size_t i = 1; i < n.size(); ++i) {
      if (isVerbMod(detail::isolatedType(n[i])))
        mods.push_back(n[i]);
      else
        keep.push_back(n[i]);
    }
    if (mods.empty()) return n;
    Expr core = keep.size() == 1 ? keep[0] : Expr::list(std::move(keep));
    for (auto& m : mods) core = Expr::list({m, std::move(core)});
    return core;
  });
}

namespace detail {

struct Lifted {
  Expr expr;
  std::vector<Expr> pending;  // sentence modifiers awaiting a clause, surface order
};

inline bool clauseType(const SemType& t) {
  return t.is(SemType::Kind::SentIntension) || t.is(SemType::Kind::Truth);
}

inline Lifted liftNode(const Expr& node, const Typed& typed) {
  if (node.isLeaf()) return {node, {}};
  std::vector<Expr> kids;
  std::vector<Expr> pending;
  bool flat = node.size() >= 3;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const SemType& ct = typed.children[i].type;
    if (flat && i > 0 && isSentMod(ct)) {
      // The modifier itself may contain floating material of its own.
      auto inner = liftNode(node[i], typed.children[i]);
      pending.push_back(std::move(inner.expr));
      continue;
    }
    auto sub = liftNode(node[i], typed.children[i]);
    kids.push_back(std::move(sub.expr));
    for (auto& p : sub.pending) pending.push_back(std::move(p));
  }
  Expr rebuilt = kids.size() == 1 ? std::move(kids[0]) : Expr::list(std::move(kids));
  if (!pending.empty() && clauseType(typed.type)) {
    for (auto it = pending.rbegin(); it != pending.rend(); ++it)
      rebuilt = Expr::list({std::move(*it), std::move(rebuilt)});
    pending.clear();
  }
  return {std::move(rebuilt), std::move(pending)};
}

}  // namespace detail

// Moves sentence modifiers floating inside flat constituents to prefix the
// smallest enclosing sentence. Leftmost ends up outermost.
inline Expr liftAdvS(const Expr& e) {
  auto typed = inferType(e);
  auto r = detail::liftNode(e, typed.tree);
  Expr out = std::move(r.expr);
  for (auto it = r.pending.rbegin(); it != r.pending.rend(); ++it)
    out = Expr::list({std::move(*it), std::move(out)});
  return out;
}

enum class Stage { Rel, Macros, Shifters, AdvA, AdvS };

inline std::optional<Stage> stageFromName(std::string_view s) {
  if (s == "rel") return Stage::Rel;
  if (s == "macros") return Stage::Macros;
  if (s == "shifters") return Stage::Shifters;
  if (s == "adva") return Stage::AdvA;
  if (s == "advs") return Stage::AdvS;
  return std::nullopt;
}

// Runs the raw-to-postprocessed pipeline through the given stage.
inline Expr postprocess(const Expr& e, Stage last = Stage::AdvS) {
  Expr cur = expandRel(e);
  if (last == Stage::Rel) return cur;
  cur = expandAll(cur);
  if (last == Stage::Macros) return cur;
  cur = insertShifters(cur);
  if (last == Stage::Shifters) return cur;
  cur = normalizeAdvA(cur);
  if (last == Stage::AdvA) return cur;
  return liftAdvS(cur);
}

}  // namespace ulf
