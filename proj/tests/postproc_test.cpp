#include <gtest/gtest.h>

#include "support.hpp"
#include "ulf/checker.hpp"
#include "ulf/postproc.hpp"

using namespace ulf;
using testing_support::golden;
using testing_support::goldenExpr;
using testing_support::loadGolden;

namespace {

std::vector<std::string> stems(const Expr& e) {
  std::vector<std::string> out;
  walk(e, [&](const Expr& n, const Path&) {
    if (n.kind == NodeKind::Lex || n.kind == NodeKind::Name || n.kind == NodeKind::Elided)
      out.push_back(print(n));
  });
  return out;
}

std::string pp(std::string_view text) { return print(postprocess(parseOrThrow(text))); }

}  // namespace

TEST(InsertShifters, ReferenceCases) {
  EXPECT_EQ(print(insertShifters(goldenExpr("burning-raw"))), golden("burning-post").text);
  EXPECT_EQ(print(insertShifters(goldenExpr("burning-post"))), golden("burning-post").text);
  EXPECT_EQ(print(insertShifters(parseOrThrow("(|Seattle| skyline.n)"))), "((nnp |Seattle|) skyline.n)");
  EXPECT_EQ(print(insertShifters(parseOrThrow("(weak.a (plur creature.n))"))),
            "((mod-n weak.a) (plur creature.n))");
}

TEST(InsertShifters, PossessiveGetsModN) {
  EXPECT_EQ(pp("((|John| 's) dog.n)"), "(the.d ((mod-n (poss-by |John|)) dog.n))");
}

TEST(InsertShifters, Ambiguous) {
  try {
    insertShifters(parseOrThrow("((for.p me.pro) (poss-by |John|))"));
    FAIL() << "expected ShiftAmbiguous";
  } catch (const DiagnosticError& e) {
    EXPECT_EQ(e.code(), "ShiftAmbiguous");
  }
}

TEST(InsertShifters, SurfaceOrderPreserved) {
  for (auto& g : loadGolden()) {
    auto e = expandAll(parseOrThrow(g.text));
    EXPECT_EQ(stems(insertShifters(e)), stems(e)) << g.id;
  }
}

TEST(NormalizeAdvA, ReferenceCases) {
  EXPECT_EQ(print(normalizeAdvA(goldenExpr("walk-raw"))), golden("walk-post").text);
  auto spoke = normalizeAdvA(goldenExpr("float-adva"));
  EXPECT_EQ(print(spoke), "(sternly.adv-a ((past speak.v) (to.p-arg |Bob|)))");
  // The result is a saturated tensed verb phrase.
  EXPECT_EQ(inferType(spoke, CheckMode::Strict).type, types::pV());
  EXPECT_TRUE(inferType(spoke, CheckMode::Strict).diagnostics.empty());
  auto plain = parseOrThrow("(she.pro ((past see.v) |Bob|))");
  EXPECT_EQ(normalizeAdvA(plain), plain);
}

TEST(NormalizeAdvA, SeveralModifiersLeftmostInnermost) {
  EXPECT_EQ(print(normalizeAdvA(parseOrThrow("(run.v quickly.adv-a (to.p-arg |Bob|) quietly.adv-a)"))),
            "(quietly.adv-a (quickly.adv-a (run.v (to.p-arg |Bob|))))");
}

TEST(LiftAdvS, ReferenceCases) {
  EXPECT_EQ(print(liftAdvS(goldenExpr("float-advs"))), "(certainly.adv-s (|Alice| ((pres know.v) |Bob|)))");
  auto plain = goldenExpr("cake");
  EXPECT_EQ(liftAdvS(plain), plain);
}

TEST(LiftAdvS, StackedKeepSurfaceOrder) {
  // Both surface orders; the leftmost modifier ends up outermost.
  auto a = liftAdvS(parseOrThrow("(|Alice| certainly.adv-s probably.adv-s ((pres know.v) |Bob|))"));
  EXPECT_EQ(print(a), "(certainly.adv-s (probably.adv-s (|Alice| ((pres know.v) |Bob|))))");
  auto b = liftAdvS(parseOrThrow("(|Alice| probably.adv-s certainly.adv-s ((pres know.v) |Bob|))"));
  EXPECT_EQ(print(b), "(probably.adv-s (certainly.adv-s (|Alice| ((pres know.v) |Bob|))))");
  EXPECT_EQ(inferType(a).type, types::sent());
  EXPECT_EQ(inferType(b).type, types::sent());
}

TEST(LiftAdvS, FromInsideVerbPhraseToClause) {
  auto e = parseOrThrow("(she.pro ((past eat.v) (the.d cake.n) yesterday.adv-e))");
  EXPECT_EQ(print(liftAdvS(e)), "(yesterday.adv-e (she.pro ((past eat.v) (the.d cake.n))))");
  // Clause-local: an embedded clause keeps its own modifier.
  auto emb = parseOrThrow("(i.pro ((pres think.v) (that (she.pro certainly.adv-s (pres leave.v)))))");
  EXPECT_EQ(print(liftAdvS(emb)), "(i.pro ((pres think.v) (that (certainly.adv-s (she.pro (pres leave.v))))))");
}

TEST(Postprocess, Goldens) {
  EXPECT_EQ(print(postprocess(goldenExpr("cake"))), golden("cake").text);
  EXPECT_EQ(print(postprocess(goldenExpr("walk-raw"))), golden("walk-post").text);
  EXPECT_EQ(print(postprocess(goldenExpr("burning-raw"))), golden("burning-post").text);
  // Only the n+preds macro changes.
  auto heating = goldenExpr("earth-heating");
  auto want = replaceAt(heating, {1, 1, 1, 1}, expandAll(*at(heating, {1, 1, 1, 1})));
  EXPECT_EQ(postprocess(heating), want);
  EXPECT_EQ(print(*at(postprocess(heating), {1, 1, 1, 1})),
            "(λ x ((x fact.n) and.cc (x (= (that ((the.d |Earth|.n) ((pres prog) heat_up.v)))))))");
}

TEST(Postprocess, IdempotentAndStrictClean) {
  for (auto& g : loadGolden()) {
    auto once = postprocess(parseOrThrow(g.text));
    auto twice = postprocess(once);
    EXPECT_EQ(print(twice), print(once)) << g.id;
    CheckOptions strict;
    strict.mode = CheckMode::Strict;
    strict.fragment = g.fragment;
    auto ds = check(once, strict);
    // Notes (sort coercion of λ-predicates) are allowed.
    for (auto& d : ds)
      if (d.severity != Severity::Note) ADD_FAILURE() << g.id << ": " << d.code << " at " << pathString(d.path) << " in " << print(once);
  }
}

TEST(Postprocess, TypePreservedByEveryStage) {
  for (auto& g : loadGolden()) {
    auto e = parseOrThrow(g.text);
    auto base = inferType(e).type;
    for (auto st : {Stage::Rel, Stage::Macros, Stage::Shifters, Stage::AdvA, Stage::AdvS}) {
      auto t = inferType(postprocess(e, st)).type;
      EXPECT_TRUE(unifies(base, t)) << g.id << " stage " << int(st) << ": " << toString(base) << " vs "
                                    << toString(t);
    }
  }
}
