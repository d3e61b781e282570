// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria. Time limits are checked here, not by ctest.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "generators.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "ulf/service.hpp"
#include "ulf/ulf.hpp"

using namespace ulf;
using testing_support::dataPath;
using testing_support::golden;
using testing_support::goldenExpr;
using testing_support::loadGolden;

namespace {

constexpr double kGoldenBudgetSec = 1.0;
constexpr double kEvaluatorBudgetSec = 30.0;
constexpr double kSymmetryTolerance = 0.02;
constexpr double kCheckBudgetMs = 100.0;
constexpr std::size_t kMinModels = 10000;

// Collects the first failure of a criterion plus a short summary.
class Criterion {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failure_.empty()) failure_ = what;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  bool ok() const { return failure_.empty(); }
  const std::string& failure() const { return failure_; }
  const std::string& notes() const { return notes_; }

 private:
  std::string failure_, notes_;
};

double seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double x, int prec = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << x;
  return os.str();
}

std::string code(const std::function<void()>& f) {
  try {
    f();
  } catch (const DiagnosticError& e) {
    return e.code();
  }
  return "";
}

void goldenRoundTrip(Criterion& c) {
  auto t0 = std::chrono::steady_clock::now();
  std::size_t n = 0;
  for (auto& g : loadGolden()) {
    auto p = parse(g.text);
    c.expect(p.ok(), g.id + " does not parse");
    if (!p.ok()) continue;
    auto text = print(*p.expr);
    c.expect(parseOrThrow(text) == *p.expr, g.id + " does not reparse to the same tree");
    c.expect(print(parseOrThrow(text)) == text, g.id + " printing is not stable");
    CheckOptions o;
    o.fragment = g.fragment;
    auto ds = check(*p.expr, o);
    c.expect(errorCount(ds) == 0, g.id + ": " + (ds.empty() ? "" : ds[0].code + " " + ds[0].message));
    ++n;
  }
  for (auto id : {"cake", "dial-request", "cf-succeed", "weak-flowers", "earth-heating", "float-advs", "float-adva",
                  "walk-raw", "walk-post", "burning-raw", "burning-post", "buildings", "macro-sub", "macro-rep",
                  "macro-n+preds", "macro-np+preds", "macro-poss", "topicalized", "coffee", "seattle", "play-dog",
                  "play-dog-deindexed", "eat-cafe", "eat-cafe-deindexed"})
    c.expect(code([&] { golden(id); }).empty(), std::string("corpus lacks ") + id);
  double t = seconds(t0);
  c.expect(t < kGoldenBudgetSec, "took " + fixed(t) + " s");
  c.note(std::to_string(n) + " entries, " + fixed(t) + " s < " + fixed(kGoldenBudgetSec, 1) + " s");
}

void macroGoldens(Criterion& c) {
  auto same = [&](const Expr& got, const std::string& want, const std::string& what) {
    c.expect(alphaEqual(got, parseOrThrow(want)), what + ": got " + print(got));
  };
  same(expandAll(goldenExpr("macro-sub")), "(B A)", "sub");
  same(expandAll(goldenExpr("macro-rep")), "(A B)", "rep");
  same(expandAll(goldenExpr("macro-n+preds")), "(λ x ((x dog.n) and.cc (x red.a)))", "n+preds");
  same(expandAll(goldenExpr("macro-np+preds")), "(the.d (λ x ((x = he.pro) and.cc (x red.a))))", "np+preds");
  same(expandAll(goldenExpr("macro-poss")), "(the.d ((poss-by |John|) dog.n))", "'s");
  same(expandAll(goldenExpr("topicalized")), "((the.d fox.n) ((past run.v) away.adv-a swiftly.adv-a))",
       "topicalization");
  auto coffee = goldenExpr("coffee");
  c.expect(print(expandRel(coffee)) == golden("coffee-lambda").text, "relativizer step");
  auto final_ = betaReduce(expandAll(coffee));
  same(final_, "(the.d (λ y ((y coffee.n) and.cc (you.pro ((past drink.v) y)))))", "relative clause");
  c.expect(print(final_) == "(the.d (λ y ((y coffee.n) and.cc (you.pro ((past drink.v) y)))))",
           "relative clause not byte-equal: " + print(final_));
  c.note("5 macro rows, topicalization, relative clause");
}

void postprocGoldens(Criterion& c) {
  auto burning = print(postprocess(goldenExpr("burning-raw")));
  c.expect(burning == golden("burning-post").text, "burning hot: " + burning);
  auto walk = print(postprocess(goldenExpr("walk-raw")));
  c.expect(walk == golden("walk-post").text, "walk: " + walk);
  std::size_t n = 0;
  for (auto& g : loadGolden()) {
    auto once = postprocess(parseOrThrow(g.text));
    c.expect(postprocess(once) == once, g.id + " not idempotent");
    ++n;
  }
  c.note("idempotent on " + std::to_string(n) + " entries");
}

std::string rename(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t p = 0; (p = s.find(from, p)) != std::string::npos; p += to.size()) s.replace(p, from.size(), to);
  return s;
}

void pipelineGolden(Criterion& c) {
  auto slf = defaultScoping(postprocess(goldenExpr("cake")));
  const char* wantSlf = "(pres (the.d x (x cake.n) (she.pro (want.v (to (eat.v x))))))";
  c.expect(alphaEqual(slf, parseOrThrow(wantSlf)), "SLF: " + print(slf));
  DeindexOptions o;
  o.now = 17;
  auto r = deindex(slf, o);
  std::vector<std::string> want;
  std::ifstream in(dataPath("cake.clf"));
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') want.push_back(line);
  c.expect(r.formulas.size() == want.size(), "CLF has " + std::to_string(r.formulas.size()) + " formulas");
  for (std::size_t i = 0; i < std::min(want.size(), r.formulas.size()); ++i) {
    auto got = rename(print(r.formulas[i]), "|E1|.sk", "|E|.sk");
    c.expect(got == want[i], "CLF " + std::to_string(i) + ": " + got);
  }
  c.note("SLF and " + std::to_string(want.size()) + " CLF formulas");
}

void evaluatorOracle(Criterion& c) {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, Expr>> forms;
  for (std::string det : {"every", "some", "most", "the", "no"})
    forms.emplace_back(det, parseOrThrow("(" + det + ".d x (x p.n) (x q.v))"));
  std::size_t checks = 0;
  std::size_t models = oracle::forAllModels(4, 2, [&](const oracle::SmallModel& sm) {
    auto fm = oracle::toModel(sm, 2);
    for (int s = 0; s < 2; ++s)
      for (auto& [det, f] : forms) {
        bool presup = false;
        bool want = oracle::quant(det, sm, s, presup);
        if (presup)
          c.expect(code([&] { evalModel(f, fm, fm.situations[s]); }) == "PresuppositionFailure", det + " presupposition");
        else
          c.expect(evalModel(f, fm, fm.situations[s]) == want, det + " disagrees with the oracle");
        ++checks;
      }
  });
  c.expect(models >= kMinModels, "only " + std::to_string(models) + " models");

  // Episodic operators over every partial order on three situations and every
  // assignment of two time points.
  std::vector<oracle::Frame> frames;
  std::vector<std::pair<int, int>> offDiag{{0, 1}, {1, 0}, {0, 2}, {2, 0}, {1, 2}, {2, 1}};
  for (unsigned bits = 0; bits < 64; ++bits) {
    std::set<std::pair<int, int>> rel{{0, 0}, {1, 1}, {2, 2}};
    for (int i = 0; i < 6; ++i)
      if (bits >> i & 1) rel.insert(offDiag[i]);
    bool order = true;
    for (auto [a, b] : rel) {
      if (a != b && rel.count({b, a})) order = false;
      for (auto [x, y] : rel)
        if (b == x && !rel.count({a, y})) order = false;
    }
    if (order)
      for (int t = 0; t < 8; ++t) frames.push_back({3, rel, {t & 1, t >> 1 & 1, t >> 2 & 1}});
  }
  auto phi = parseOrThrow("(some.d x (x p.n) (x q.v))");
  std::size_t episodic = 0, counter = 0;
  oracle::forAllModels(1, 3, [&](const oracle::SmallModel& sm) {
    auto base = oracle::toModel(sm, 3);
    auto truthAt = [&](int s) { return (sm.P[s] & sm.Q[s]) != 0; };
    for (auto& fr : frames) {
      auto fm = base;
      for (auto [a, b] : fr.partOf)
        if (a != b) fm.partOf.insert({fm.situations[a], fm.situations[b]});
      for (int s = 0; s < 3; ++s) fm.time[fm.situations[s]] = fr.time[s];
      for (int eta = 0; eta < 3; ++eta) {
        auto etaName = Expr::name(fm.situations[eta]);
        fm.constants[print(etaName)] = fm.situations[eta];
        auto op = [&](const char* o) { return evalModel(Expr::list({phi, Expr::keyword(o), etaName}), fm, "s0"); };
        bool chr = op("**"), tru = op("*"), at = op("@");
        c.expect(chr == oracle::characterizes(truthAt, eta), "** disagrees");
        c.expect(tru == oracle::trueIn(truthAt, fr, eta), "* disagrees");
        c.expect(at == oracle::concurrent(truthAt, fr, eta), "@ disagrees");
        if (chr && !tru) ++counter;
        ++episodic;
      }
    }
  });
  c.expect(counter == 0, std::to_string(counter) + " counterexamples to ** => *");
  double t = seconds(t0);
  c.expect(t < kEvaluatorBudgetSec, "took " + fixed(t, 1) + " s");
  c.note(std::to_string(models) + " models, " + std::to_string(checks) + " quantifier and " +
         std::to_string(episodic) + " episodic checks, 0 counterexamples, " + fixed(t, 1) + " s < " +
         fixed(kEvaluatorBudgetSec, 0) + " s");
}

void inferenceGoldens(Criterion& c) {
  auto rules = loadRules(dataPath("infer.rules"));
  auto kb = loadKB(dataPath("kb.facts"));
  std::size_t produced = 0;
  auto expectOut = [&](const std::string& premise, const std::string& want) {
    auto outs = inferAll(parseOrThrow(premise), rules, kb);
    bool found = false;
    for (auto& o : outs)
      if (print(o.ulf) == want) {
        found = true;
        auto ds = check(o.ulf);
        c.expect(!hasErrors(ds), want + " does not type-check");
      }
    c.expect(found, "missing " + want);
    produced += found;
  };
  const std::string manage = golden("manage").text;
  expectOut(manage, "(she.pro ((past quit.v) (ka smoke.v)))");
  expectOut("(not " + manage + ")", "(not (she.pro ((past quit.v) (ka smoke.v))))");
  for (auto& o : inferAll(parseOrThrow("(not " + manage + ")"), rules, kb))
    c.expect(print(o.ulf) != "(she.pro ((past quit.v) (ka smoke.v)))", "negated premise kept the positive entailment");
  const std::string nato = golden("nato").text;
  expectOut(nato, "(|France| ((past send.v) (k (plur troop.n)) (to.p-arg |Afghanistan|)))");
  expectOut(nato, "(|France| ((past send.v) (k (plur troop.n)) (to.p-arg (a.d country.n))))");
  expectOut(golden("cf-succeed").text, "(not (i.pro ((pres be.v) (= you.pro))))");
  expectOut(golden("close-door").text, "(i.pro ((pres want.v) you.pro (to (close.v (the.d door.n)))))");
  expectOut(golden("close-door").text,
            "(i.pro ((pres expect.v) (that (you.pro ((pres will.aux-s) (close.v (the.d door.n)))))))");
  c.note(std::to_string(produced) + " of 7 conclusions, all type-check");
}

void elsmatchProperties(Criterion& c) {
  std::vector<Expr> corpus;
  for (auto& g : loadGolden()) corpus.push_back(parseOrThrow(g.text));
  for (auto& e : corpus) {
    auto g = toTriples(e);
    c.expect(score(g, g).f1 == 1.0, "self score below 1 for " + print(e));
  }
  std::size_t pairs = 0;
  double worst = 0;
  for (auto& a : corpus)
    for (auto& b : corpus) {
      auto ga = toTriples(a), gb = toTriples(b);
      if (ga.vars > 8 || gb.vars > 8) continue;
      ScoreOptions ex, hc;
      ex.method = SearchMethod::Exhaustive;
      hc.method = SearchMethod::HillClimb;
      hc.restarts = 4;
      hc.seed = 1;
      c.expect(score(ga, gb, hc).f1 == score(ga, gb, ex).f1, "hill-climbing misses optimum: " + print(a) + " vs " + print(b));
      worst = std::max(worst, std::abs(score(ga, gb, hc).f1 - score(gb, ga, hc).f1));
      ++pairs;
    }
  std::mt19937 rng(7);
  for (int i = 0; i < 60; ++i) {
    auto a = toTriples(gen::randomTree(rng, 10 + i % 6)), b = toTriples(gen::randomTree(rng, 10 + i % 5));
    ScoreOptions hc;
    hc.method = SearchMethod::HillClimb;
    worst = std::max(worst, std::abs(score(a, b, hc).f1 - score(b, a, hc).f1));
  }
  c.expect(worst <= kSymmetryTolerance, "asymmetry " + fixed(worst, 4));

  // Synthetic corpus with hand-computed document-level F1.
  auto tmp = std::filesystem::temp_directory_path() / ("ulf-accept-ia-" + std::to_string(::getpid()));
  std::filesystem::remove_all(tmp);
  {
    CorpusStore store(tmp);
    store.importRecords(dataPath("ia_fixture.jsonl"));
    auto all = agreementMatrix(store.annotatorCorpus(), false);
    auto cert = agreementMatrix(store.annotatorCorpus(), true);
    c.expect(all.overall && *all.overall == 0.5, "fixture overall " + (all.overall ? fixed(*all.overall) : "-"));
    c.expect(all.pairwise.at({"ann1", "ann2"}) == 0.5, "fixture ann1/ann2");
    c.expect(cert.overall && *cert.overall == 8.0 / 12.0, "fixture certain-only overall");
    c.expect(cert.pairwise.at({"ann1", "ann2"}) == 1.0, "fixture certain-only ann1/ann2");
  }
  std::filesystem::remove_all(tmp);
  c.note(std::to_string(corpus.size()) + " self scores, " + std::to_string(pairs) +
         " exhaustive pairs, max asymmetry " + fixed(worst, 4) + " <= " + fixed(kSymmetryTolerance, 2) +
         ", fixture 0.500/0.667");
}

void serviceDurability(Criterion& c) {
  auto dir = std::filesystem::temp_directory_path() / ("ulf-accept-svc-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  AnnotationRecord written;
  {
    CorpusStore store(dir);
    store.addSentences({{"t1", "Tatoeba", "She wants to eat the cake."}});
    AnnotationRecord r;
    r.sentenceId = "t1";
    r.ulf = golden("cake").text;
    r.certainty = Certainty::Certain;
    r.author = "ann1";
    r.comments.push_back({"ann1", "", "clear"});
    written = store.upsert(r);
  }
  {
    CorpusStore store(dir);
    auto back = store.latest("t1");
    c.expect(back && toJson(*back) == toJson(written), "record changed across restart");

    httplib::Server srv;
    mountRoutes(srv, store);
    int port = srv.bind_to_any_port("127.0.0.1");
    std::thread th([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);
    auto got = cli.Get("/annotation/t1");
    c.expect(got && got->status == 200 && json::parse(got->body)["record"]["ulf"] == written.ulf,
             "GET /annotation after restart");

    std::string longText = "((the.d (big.a dog.n)) ((past see.v) (a.d cat.n)))";
    const std::string clause = longText;
    while (longText.size() + clause.size() + 10 < 2000) longText = "(" + longText + " and.cc " + clause + ")";
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      auto t0 = std::chrono::steady_clock::now();
      auto res = cli.Post("/check", longText, "text/plain");
      worst = std::max(worst, seconds(t0) * 1000);
      c.expect(res && res->status == 200 && json::parse(res->body)["ok"].get<bool>(), "/check failed");
    }
    c.expect(worst < kCheckBudgetMs, "/check took " + fixed(worst, 1) + " ms");
    srv.stop();
    th.join();

    // Table layout on synthetic counts.
    auto recs = dir / "table.jsonl";
    {
      std::ofstream out(recs);
      struct Row {
        const char* name;
        int c, u, i, o;
      };
      int n = 0;
      for (auto r : {Row{"Tatoeba", 533, 66, 24, 396}, Row{"DG", 102, 37, 4, 0}, Row{"UIUC QC", 179, 50, 0, 0},
                     Row{"PG", 113, 59, 17, 0}})
        for (auto [k, cert, legacy] : {std::tuple{r.c, "certain", false}, {r.u, "uncertain", false},
                                       {r.i, "incomplete", false}, {r.o, "certain", true}})
          for (int j = 0; j < k; ++j) {
            json rec{{"sentenceId", "syn" + std::to_string(n++)}, {"dataset", r.name}, {"sentence", "s"},
                     {"ulf", std::string(cert) == "incomplete" ? "" : "(a.d dog.n)"}, {"certainty", cert},
                     {"author", "ann1"}};
            if (legacy) rec["legacy"] = true;
            out << rec.dump() << "\n";
          }
    }
    CorpusStore synth(dir / "synthetic");
    synth.importRecords(recs);
    auto table = renderStats(synth.stats());
    const std::string want =
        "        |  Cert. |   Unc. |   Inc. |    Old |    All\n"
        "----------------------------------------------------\n"
        "Tatoeba |    533 |     66 |     24 |    396 |   1019\n"
        "DG      |    102 |     37 |      4 |      0 |    143\n"
        "UIUC QC |    179 |     50 |      0 |      0 |    229\n"
        "PG      |    113 |     59 |     17 |      0 |    189\n"
        "----------------------------------------------------\n"
        "Total   |    927 |    212 |     45 |    396 |   1580\n";
    c.expect(table == want, "stats table:\n" + table);
    c.note("restart preserved record, /check worst " + fixed(worst, 1) + " ms < " + fixed(kCheckBudgetMs, 0) +
           " ms on " + std::to_string(longText.size()) + " chars, stats table exact");
  }
  std::filesystem::remove_all(dir);
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<void(Criterion&)>>> all{
      {"golden round-trip and typing", goldenRoundTrip},
      {"macro goldens", macroGoldens},
      {"postprocessing goldens", postprocGoldens},
      {"pipeline golden", pipelineGolden},
      {"quantifier evaluator oracle", evaluatorOracle},
      {"inference goldens", inferenceGoldens},
      {"EL-smatch properties", elsmatchProperties},
      {"service durability", serviceDurability},
  };
  int failed = 0;
  for (auto& [name, f] : all) {
    Criterion c;
    try {
      f(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("threw: ") + e.what());
    }
    if (c.ok()) {
      std::cout << "PASS  " << name << "  (" << c.notes() << ")\n";
    } else {
      std::cout << "FAIL  " << name << "  (" << c.failure() << ")\n";
      ++failed;
    }
    std::cout.flush();
  }
  return failed;
}
