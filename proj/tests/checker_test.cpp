#include <gtest/gtest.h>

#include "support.hpp"
#include "ulf/checker.hpp"

using namespace ulf;
using testing_support::dataPath;
using testing_support::loadGolden;

namespace {

CheckOptions fragmentOpts(CheckMode mode = CheckMode::Raw) {
  CheckOptions o;
  o.fragment = true;
  o.mode = mode;
  return o;
}

const std::vector<std::string> kShifters{"k",     "that",  "to",    "ka",    "ke",   "adv-a",
                                         "adv-e", "adv-s", "adv-f", "mod-n", "mod-a", "nnp"};

bool isShifterApp(const Expr& n) {
  if (!n.isList() || n.size() != 2 || n[0].kind != NodeKind::Keyword) return false;
  for (auto& s : kShifters)
    if (n[0].text == s) return true;
  return false;
}

}  // namespace

TEST(Check, GoldenCorpusClean) {
  for (auto& g : loadGolden()) {
    CheckOptions o;
    o.fragment = g.fragment;
    auto ds = check(parseOrThrow(g.text), o);
    EXPECT_FALSE(hasErrors(ds)) << g.id << ": " << ds[0].code << " " << ds[0].message;
  }
  EXPECT_TRUE(check(testing_support::goldenExpr("dial-request")).empty());
}

TEST(Check, DeterminerNeedsNominal) {
  auto r = checkTyped(parseOrThrow("(the.d (run.v))"), fragmentOpts());
  ASSERT_EQ(errorCount(r.diagnostics), 1u);
  const auto& d = r.diagnostics[0];
  EXPECT_EQ(d.path, Path{1});
  ASSERT_TRUE(d.suggestion);
  EXPECT_EQ(print(*d.suggestion), "(run.n)");
}

TEST(Check, FragmentMode) {
  auto r = checkTyped(parseOrThrow("she.pro"), fragmentOpts());
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_EQ(r.type, types::entity());
  auto notFragment = check(parseOrThrow("she.pro"));
  ASSERT_EQ(notFragment.size(), 1u);
  EXPECT_EQ(notFragment[0].code, "NotSentence");
}

TEST(Suggest, ReferenceCorrections) {
  auto grass = parseOrThrow("(that (grass.n red.a))");
  auto ds = check(grass, fragmentOpts());
  ASSERT_TRUE(hasErrors(ds));
  auto s = suggest(grass, ds[0], fragmentOpts());
  ASSERT_FALSE(s.empty());
  EXPECT_EQ(print(*at(s[0], {1})), "((k grass.n) red.a)");

  auto walk = parseOrThrow("((for.p me.pro) walk.v)");
  auto wd = check(walk, fragmentOpts());
  ASSERT_TRUE(hasErrors(wd));
  auto ws = suggest(walk, wd[0], fragmentOpts());
  ASSERT_FALSE(ws.empty());
  EXPECT_EQ(print(ws[0]), "((adv-a (for.p me.pro)) walk.v)");

  auto valid = parseOrThrow("(she.pro run.v)");
  EXPECT_TRUE(check(valid).empty());
}

TEST(Suggest, SoundnessOnMutations) {
  // Every suggestion strictly reduces the error count.
  for (auto& g : loadGolden()) {
    auto e = parseOrThrow(g.text);
    walk(e, [&](const Expr& n, const Path& p) {
      if (!isShifterApp(n)) return;
      auto mutated = replaceAt(e, p, n[1]);
      for (auto mode : {CheckMode::Raw, CheckMode::Strict}) {
        auto opts = fragmentOpts(mode);
        auto before = errorCount(check(mutated, opts));
        for (auto& d : check(mutated, opts)) {
          if (d.severity != Severity::Error) continue;
          for (auto& cand : suggest(mutated, d, opts))
            EXPECT_LT(errorCount(check(cand, opts)), before) << print(cand);
        }
      }
    });
  }
}

TEST(Suggest, CompletenessOnRequiredShifters) {
  int required = 0;
  for (auto mode : {CheckMode::Raw, CheckMode::Strict}) {
    for (auto& g : loadGolden()) {
      CheckOptions opts;
      opts.mode = mode;
      opts.fragment = g.fragment;
      auto e = parseOrThrow(g.text);
      if (hasErrors(check(e, opts))) continue;
      walk(e, [&](const Expr& n, const Path& p) {
        if (!isShifterApp(n)) return;
        auto mutated = replaceAt(e, p, n[1]);
        auto ds = check(mutated, opts);
        if (!hasErrors(ds)) return;  // not required for typing
        ++required;
        const Diagnostic* first = nullptr;
        for (auto& d : ds)
          if (d.severity == Severity::Error) {
            first = &d;
            break;
          }
        auto s = suggest(mutated, *first, opts);
        ASSERT_FALSE(s.empty()) << g.id << " without " << print(n);
        EXPECT_EQ(print(s[0]), print(e)) << g.id << " without " << print(n);
      });
    }
  }
  EXPECT_GT(required, 10);
}

TEST(Check, StabilityUnderReprint) {
  for (auto& g : loadGolden()) {
    auto e = parseOrThrow(g.text);
    auto again = parseOrThrow(print(e));
    auto a = check(e, fragmentOpts(CheckMode::Strict));
    auto b = check(again, fragmentOpts(CheckMode::Strict));
    ASSERT_EQ(a.size(), b.size()) << g.id;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].code, b[i].code);
      EXPECT_EQ(a[i].path, b[i].path);
    }
  }
}

TEST(Check, SuggestionsTypeAtPath) {
  for (auto text : {"(the.d (run.v))", "(that (grass.n red.a))", "((for.p me.pro) walk.v)",
                    "((plur flower.n) ((pres be.v) weak.a))"}) {
    auto e = parseOrThrow(text);
    for (auto& d : check(e, fragmentOpts())) {
      if (!d.suggestion) continue;
      auto fixed = replaceAt(e, d.path, *d.suggestion);
      EXPECT_LT(errorCount(check(fixed, fragmentOpts())), errorCount(check(e, fragmentOpts()))) << text;
    }
  }
}

TEST(Check, StrictWarnsOnPlainPP) {
  auto ds = check(parseOrThrow("(|Mary| ((past dance.v) (with.p |Bob|)))"), fragmentOpts(CheckMode::Strict));
  ASSERT_FALSE(ds.empty());
  EXPECT_EQ(ds[0].code, "PlainPPComplement");
  EXPECT_EQ(ds[0].severity, Severity::Warning);
  ASSERT_TRUE(ds[0].suggestion);
  EXPECT_EQ(print(*ds[0].suggestion), "(adv-a (with.p |Bob|))");
  // Copular and p-arg complements are arguments.
  EXPECT_TRUE(check(parseOrThrow("(x.pro ((pres be.v) (for.p me.pro)))"), fragmentOpts(CheckMode::Strict)).empty());
}

TEST(Catalog, ShippedFileMatchesBuiltin) {
  auto file = loadCatalog(dataPath("suggestions.catalog"));
  const auto& builtin = defaultCatalog();
  ASSERT_EQ(file.size(), builtin.size());
  for (std::size_t i = 0; i < file.size(); ++i) EXPECT_EQ(file[i].name, builtin[i].name);
}

TEST(Catalog, CustomRuleExtendsSuggestions) {
  auto cat = parseCatalog("only-k NoFit wrap k\n");
  auto e = parseOrThrow("(that (grass.n red.a))");
  auto ds = check(e, fragmentOpts());
  auto s = suggest(e, ds[0], fragmentOpts(), cat);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_THROW(parseCatalog("bad NoFit frobnicate x\n"), DiagnosticError);
}
