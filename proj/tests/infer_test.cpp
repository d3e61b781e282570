#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"
#include "ulf/checker.hpp"
#include "ulf/infer.hpp"
#include "ulf/model.hpp"
#include "ulf/scoper.hpp"

using namespace ulf;
using testing_support::dataPath;
using testing_support::goldenExpr;

namespace {

const std::vector<LexRule>& rules() {
  static const auto r = loadRules(dataPath("infer.rules"));
  return r;
}

const std::vector<KBFact>& kb() {
  static const auto k = loadKB(dataPath("kb.facts"));
  return k;
}

std::vector<std::string> printed(const std::vector<Inference>& xs) {
  std::vector<std::string> out;
  for (auto& x : xs) out.push_back(print(x.ulf));
  return out;
}

std::vector<std::string> printed(const std::vector<Expr>& xs) {
  std::vector<std::string> out;
  for (auto& x : xs) out.push_back(print(x));
  return out;
}

bool has(const std::vector<std::string>& xs, const std::string& s) {
  return std::find(xs.begin(), xs.end(), s) != xs.end();
}

std::vector<std::string> infer(std::string_view text) { return printed(inferAll(parseOrThrow(text), rules(), kb())); }

const char* kManage = "(she.pro ((past manage.v) (to (quit.v (ka smoke.v)))))";
const char* kNato = "((every.d nato_member.n) ((past send.v) (k (plur troop.n)) (to.p-arg |Afghanistan|)))";
const char* kRichIf = "((if.ps (i.pro ((cf were.v) rich.a))) (i.pro ((cf will.aux-s) (pay_off.v (the.d debt.n)))))";
const char* kRichWish = "(i.pro ((pres wish.v) (that (i.pro ((cf were.v) rich.a)))))";
const char* kDoor = "(((pres could.aux-v) you.pro (close.v (the.d door.n))) ?)";
const char* kDenounce = "(|John| ((past denounce.v) |Bill| (as.p-arg (a.d charlatan.n))))";
const char* kWho = "((sub who.pro ((past do.aux-s) you.pro (invite.v *h))) ?)";
const char* kWhen = "((sub when.adv-e ((pres prog) you.pro (get_married.v *h))) ?)";

std::vector<std::string> premises() {
  return {kManage, std::string("(not ") + kManage + ")", kNato, kRichIf, kRichWish, kDoor, kDenounce, kWho,
          kWhen, print(goldenExpr("dial-request")), print(goldenExpr("cf-succeed"))};
}

}  // namespace

TEST(Infer, Implicative) {
  EXPECT_TRUE(has(infer(kManage), "(she.pro ((past quit.v) (ka smoke.v)))"));
  auto neg = infer(std::string("(not ") + kManage + ")");
  EXPECT_TRUE(has(neg, "(not (she.pro ((past quit.v) (ka smoke.v))))"));
  EXPECT_FALSE(has(neg, "(she.pro ((past quit.v) (ka smoke.v)))"));
}

TEST(Infer, PolarityRestrictedRules) {
  // refuse only licenses from the positive premise, hesitate only from the negated one.
  auto r = infer("(he.pro ((past refuse.v) (to leave.v)))");
  EXPECT_TRUE(has(r, "(not (he.pro (past leave.v)))"));
  EXPECT_TRUE(infer("(not (he.pro ((past refuse.v) (to leave.v))))").empty());
  EXPECT_TRUE(infer("(he.pro ((past hesitate.v) (to leave.v)))").empty());
  EXPECT_TRUE(has(infer("(not (he.pro ((past hesitate.v) (to leave.v))))"), "(not (he.pro (past leave.v)))"));
}

TEST(Infer, NatoPair) {
  auto r = infer(kNato);
  EXPECT_TRUE(has(r, "(|France| ((past send.v) (k (plur troop.n)) (to.p-arg |Afghanistan|)))"));
  EXPECT_TRUE(has(r, "(|France| ((past send.v) (k (plur troop.n)) (to.p-arg (a.d country.n))))"));
  // The restrictor is downward: no generalization of nato_member.n there.
  EXPECT_FALSE(has(r, "((every.d country.n) ((past send.v) (k (plur troop.n)) (to.p-arg |Afghanistan|)))"));
}

TEST(Infer, Counterfactual) {
  auto rules_ = rules();
  EXPECT_EQ(printed(counterfactualImplicature(goldenExpr("cf-succeed"), rules_)),
            std::vector<std::string>{"(not (i.pro ((pres be.v) (= you.pro))))"});
  EXPECT_EQ(printed(counterfactualImplicature(parseOrThrow(kRichIf), rules_)),
            std::vector<std::string>{"(not (i.pro ((pres be.v) rich.a)))"});
  EXPECT_EQ(printed(counterfactualImplicature(parseOrThrow(kRichWish), rules_)),
            std::vector<std::string>{"(not (i.pro ((pres be.v) rich.a)))"});
  EXPECT_TRUE(counterfactualImplicature(parseOrThrow("((if.ps (i.pro ((pres be.v) rich.a))) (i.pro ((pres will.aux-s) smile.v)))"), rules_).empty());
  for (auto& i : counterfactualImplicature(parseOrThrow(kRichIf), rules_)) EXPECT_EQ(i.strength, "implicates");
}

TEST(Infer, Requests) {
  auto r = printed(requestInference(parseOrThrow(kDoor), rules()));
  EXPECT_EQ(r, (std::vector<std::string>{
                   "(i.pro ((pres want.v) you.pro (to (close.v (the.d door.n)))))",
                   "(i.pro ((pres expect.v) (that (you.pro ((pres will.aux-s) (close.v (the.d door.n)))))))"}));
  auto dial = printed(requestInference(goldenExpr("dial-request"), rules()));
  EXPECT_TRUE(has(dial, "(i.pro ((pres want.v) you.pro (to (dial.v {ref1}.pro (adv-a (for.p me.pro))))))"));
  EXPECT_TRUE(requestInference(parseOrThrow("(you.pro ((pres close.v) (the.d door.n)))"), rules()).empty());
  // Not addressed to the hearer.
  EXPECT_TRUE(requestInference(parseOrThrow("(((pres could.aux-v) he.pro (close.v (the.d door.n))) ?)"), rules()).empty());
}

TEST(Infer, Questions) {
  EXPECT_EQ(printed(requestInference(parseOrThrow(kWho), rules())),
            std::vector<std::string>{"(you.pro ((past invite.v) (a.d person.n)))"});
  EXPECT_EQ(printed(requestInference(parseOrThrow(kWhen), rules())),
            std::vector<std::string>{"(you.pro ((pres will.aux-s) get_married.v))"});
}

TEST(Infer, Attitudinal) {
  auto out = inferAll(parseOrThrow(kDenounce), rules(), kb());
  std::map<std::string, std::string> got;
  for (auto& i : out) {
    EXPECT_EQ(i.cls, RuleClass::Attitudinal);
    got[print(i.ulf)] = i.strength;
  }
  const std::string bill = "(|Bill| ((pres be.v) (= (a.d charlatan.n))))";
  EXPECT_EQ(got["(|John| ((pres believe.v) (that " + bill + ")))"], "probably");
  EXPECT_EQ(got["(|John| ((past assert.v) (to.p-arg (k (plur listener.n))) (that " + bill + ")))"], "entails");
  EXPECT_EQ(got["(|John| ((past want.v) (k (plur listener.n)) (to (believe.v (that " + bill + ")))))"], "entails");
  EXPECT_EQ(got.size(), 3u);
}

TEST(Infer, NothingFires) {
  EXPECT_TRUE(infer("(she.pro ((past eat.v) (the.d cake.n)))").empty());
  EXPECT_TRUE(monotoneSubst(parseOrThrow(kNato), {}).empty());
}

TEST(Infer, OutputsTypeCheck) {
  for (auto& p : premises()) {
    auto premise = parseOrThrow(p);
    EXPECT_FALSE(hasErrors(check(premise))) << p;
    auto out = inferAll(premise, rules(), kb());
    EXPECT_FALSE(out.empty()) << p;
    for (auto& i : out) EXPECT_TRUE(check(i.ulf).empty()) << p << " => " << print(i.ulf);
  }
}

TEST(Infer, Deduplicated) {
  for (auto& p : premises()) {
    auto r = infer(p);
    std::set<std::string> s(r.begin(), r.end());
    EXPECT_EQ(s.size(), r.size()) << p;
  }
}

TEST(Infer, SignFlip) {
  int checked = 0;
  for (auto& r : rules()) {
    if (r.cls != RuleClass::Implicative || r.polarity != Polarity::Both) continue;
    auto p = parseOrThrow("(she.pro ((past " + r.trigger + ") (to (quit.v (ka smoke.v)))))");
    auto pos = lexicalInferences(p, {r});
    auto neg = lexicalInferences(Expr::list({Expr::keyword("not"), p}), {r});
    ASSERT_EQ(pos.size(), 1u) << r.name;
    ASSERT_EQ(neg.size(), 1u) << r.name;
    // not(not X) normalizes to X.
    Expr flipped = pos[0].ulf.isList() && pos[0].ulf.size() == 2 && pos[0].ulf[0].isKeyword("not")
                       ? pos[0].ulf[1]
                       : Expr::list({Expr::keyword("not"), pos[0].ulf});
    EXPECT_EQ(print(neg[0].ulf), print(flipped)) << r.name;
    ++checked;
  }
  EXPECT_GE(checked, 4);
}

TEST(Infer, BadFiles) {
  EXPECT_THROW(parseRules("bogus x y.v to both entails (x)"), DiagnosticError);
  EXPECT_THROW(parseRules("implicative x y.v to both"), DiagnosticError);
  EXPECT_THROW(parseKB("a.n isa-hypernym b.n\nb.n isa-hypernym c.n\nc.n isa-hypernym a.n"), DiagnosticError);
  EXPECT_THROW(parseKB("|A| likes b.n"), DiagnosticError);
  EXPECT_NO_THROW(parseKB("# empty\n\n"));
  try {
    parseKB("a.n isa-hypernym a.n");
    FAIL();
  } catch (const DiagnosticError& e) {
    EXPECT_EQ(e.code(), "BadKB");
  }
}

TEST(Polarity, Marking) {
  auto e = parseOrThrow("((every.d dog.n) (chase.v (a.d cat.n)))");
  EXPECT_EQ(polarityAt(e, {0, 1}), Mono::Down);
  EXPECT_EQ(polarityAt(e, {1, 1, 1}), Mono::Up);
  auto n = parseOrThrow("(not ((every.d dog.n) (chase.v (a.d cat.n))))");
  EXPECT_EQ(polarityAt(n, {1, 0, 1}), Mono::Up);
  EXPECT_EQ(polarityAt(n, {1, 1, 1, 1}), Mono::Down);
  auto no = parseOrThrow("((no.d dog.n) run.v)");
  EXPECT_EQ(polarityAt(no, {0, 1}), Mono::Down);
  EXPECT_EQ(polarityAt(no, {1}), Mono::Down);
  auto the = parseOrThrow("((the.d dog.n) run.v)");
  EXPECT_EQ(polarityAt(the, {0, 1}), Mono::None);
  EXPECT_EQ(polarityAt(the, {1}), Mono::Up);
  auto opaque = parseOrThrow("(|John| ((pres believe.v) (that (|Mary| run.v))))");
  EXPECT_EQ(polarityAt(opaque, {1, 1, 1, 0}), Mono::None);
}

namespace {

// Unary-only fixtures over a KB chain poodle < dog < animal, run < move,
// with Tom a dog. Models are enumerated entity by entity so every model
// respects the KB.
const char* kSmallKB =
    "poodle.n isa-hypernym dog.n\n"
    "dog.n isa-hypernym animal.n\n"
    "run.v isa-hypernym move.v\n"
    "|Tom| isa-member dog.n\n";

template <class F>
std::size_t forAllKBModels(int maxN, F&& f) {
  std::size_t count = 0;
  for (int n = 1; n <= maxN; ++n) {
    int combos = 1;
    for (int i = 0; i < n; ++i) combos *= 12;
    for (int code = 0; code < combos; ++code) {
      FiniteModel m;
      for (auto p : {"poodle.n", "dog.n", "animal.n", "run.v", "move.v"}) m.declare(p);
      m.situations = {"s0"};
      std::vector<int> dogs;
      int c = code;
      for (int i = 0; i < n; ++i) {
        auto d = "d" + std::to_string(i);
        m.domain.push_back(d);
        int animal = c % 4, motion = c / 4 % 3;
        c /= 12;
        if (animal >= 1) m.add("animal.n", "s0", {d});
        if (animal >= 2) m.add("dog.n", "s0", {d}), dogs.push_back(i);
        if (animal >= 3) m.add("poodle.n", "s0", {d});
        if (motion >= 1) m.add("move.v", "s0", {d});
        if (motion >= 2) m.add("run.v", "s0", {d});
      }
      for (int t : dogs) {
        m.constants["|Tom|"] = "d" + std::to_string(t);
        f(m);
        ++count;
      }
    }
  }
  return count;
}

bool eval(const Expr& e, const FiniteModel& m) { return evalModel(defaultScoping(e), m, "s0"); }

}  // namespace

TEST(Polarity, SoundOnExhaustiveModels) {
  auto small = parseKB(kSmallKB);
  const std::vector<std::string> fixtures{
      "((every.d dog.n) run.v)",      "((a.d dog.n) run.v)",        "(|Tom| run.v)",
      "(not ((a.d dog.n) run.v))",    "((no.d dog.n) move.v)",      "((every.d animal.n) move.v)",
      "(not (|Tom| move.v))",         "((every.d dog.n) (not run.v))"};
  std::size_t conclusions = 0, checks = 0;
  for (auto& f : fixtures) {
    auto premise = parseOrThrow(f);
    auto outs = monotoneSubst(premise, small);
    EXPECT_FALSE(outs.empty()) << f;
    conclusions += outs.size();
    std::vector<std::string> bad;
    forAllKBModels(4, [&](const FiniteModel& m) {
      if (!eval(premise, m)) return;
      for (auto& o : outs) {
        ++checks;
        if (!eval(o, m)) bad.push_back(print(o));
      }
    });
    EXPECT_TRUE(bad.empty()) << f << " => " << (bad.empty() ? "" : bad[0]);
  }
  EXPECT_GT(conclusions, 15u);
  EXPECT_GT(checks, 100000u);
}

TEST(Polarity, NoBlocksGeneralizationAndSpecializes) {
  auto small = parseKB(kSmallKB);
  auto premise = parseOrThrow("((no.d dog.n) run.v)");
  auto outs = printed(monotoneSubst(premise, small));
  // Both positions are downward: poodle.n is reachable, move.v and animal.n are not.
  EXPECT_TRUE(has(outs, "((no.d poodle.n) run.v)"));
  EXPECT_FALSE(has(outs, "((no.d dog.n) move.v)"));
  EXPECT_FALSE(has(outs, "((no.d animal.n) run.v)"));
  auto spec = printed(monotoneSubst(parseOrThrow("((no.d dog.n) move.v)"), small));
  EXPECT_TRUE(has(spec, "((no.d dog.n) run.v)"));

  // Brute force on 2-element models: the blocked generalizations have
  // countermodels and the emitted specializations have none.
  auto countermodels = [&](const std::string& from, const std::string& to) {
    std::size_t n = 0;
    auto p = parseOrThrow(from), c = parseOrThrow(to);
    forAllKBModels(2, [&](const FiniteModel& m) { n += eval(p, m) && !eval(c, m); });
    return n;
  };
  EXPECT_GT(countermodels("((no.d dog.n) run.v)", "((no.d dog.n) move.v)"), 0u);
  EXPECT_GT(countermodels("((no.d dog.n) run.v)", "((no.d animal.n) run.v)"), 0u);
  EXPECT_EQ(countermodels("((no.d dog.n) run.v)", "((no.d poodle.n) run.v)"), 0u);
  EXPECT_EQ(countermodels("((no.d dog.n) move.v)", "((no.d dog.n) run.v)"), 0u);
}
