#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ulf/service.hpp"
#include "ulf/ulf.hpp"

namespace ulf::cli {

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline std::string slurp(const std::string& file, std::istream& in) {
  if (file.empty() || file == "-") return {std::istreambuf_iterator<char>(in), {}};
  std::ifstream f(file, std::ios::binary);
  if (!f) fail("IOError", "cannot read " + file);
  return {std::istreambuf_iterator<char>(f), {}};
}

// '#' lines are metadata between formulas. They are blanked rather than
// removed so parse offsets still point into the original text.
inline std::string blankMetadata(std::string text) {
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
    std::size_t eol = text.find('\n', i);
    if (eol == std::string::npos) eol = text.size();
    if (j < eol && text[j] == '#')
      for (std::size_t k = i; k < eol; ++k) text[k] = ' ';
    i = eol + 1;
  }
  return text;
}

inline void report(std::ostream& err, const std::vector<Diagnostic>& ds) {
  for (auto& d : ds) {
    err << severityName(d.severity) << ": " << d.code << ": " << d.message;
    if (d.offset)
      err << " (offset " << *d.offset << ")";
    else if (!d.path.empty())
      err << " at " << pathString(d.path);
    if (d.suggestion) err << "; try " << print(*d.suggestion);
    err << "\n";
  }
}

// Diagnostics already written to the error stream.
struct Reported {};

inline std::vector<Expr> readExprs(const std::string& file, Streams& io) {
  auto r = parseAll(blankMetadata(slurp(file, io.in)));
  if (!r.ok()) {
    report(io.err, r.errors);
    throw Reported{};
  }
  return r.exprs;
}

inline std::string fmt3(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << x;
  return os.str();
}

// A store directory is used in place; a record file is imported into a
// scratch store that is removed afterwards.
class CorpusHandle {
 public:
  explicit CorpusHandle(const std::filesystem::path& p) {
    if (std::filesystem::is_directory(p)) {
      store_ = std::make_unique<CorpusStore>(p);
      return;
    }
    if (!std::filesystem::exists(p)) fail("IOError", "no corpus at " + p.string());
    scratch_ = std::filesystem::temp_directory_path() /
               ("ulf-corpus-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    std::filesystem::remove_all(scratch_);
    store_ = std::make_unique<CorpusStore>(scratch_);
    store_->importRecords(p);
  }
  ~CorpusHandle() {
    store_.reset();
    if (!scratch_.empty()) std::filesystem::remove_all(scratch_);
  }
  CorpusStore& store() { return *store_; }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::unique_ptr<CorpusStore> store_;
  std::filesystem::path scratch_;
};

}  // namespace detail

// Runs one command line. Exit status is nonzero iff an error-severity
// diagnostic was produced (or the command line itself was bad).
inline int run(std::vector<std::string> args, Streams io) {
  using namespace detail;
  CLI::App app{"ULF toolkit: parse, check, normalize, scope, deindex, infer and score unscoped logical forms"};
  app.require_subcommand(1);
  std::string input;
  bool strict = false, fragment = false;

  auto addInput = [&](CLI::App* sc) { sc->add_option("input", input, "ULF file (default: standard input)"); };

  auto* parseCmd = app.add_subcommand("parse", "parse and print in canonical form");
  addInput(parseCmd);

  auto* checkCmd = app.add_subcommand("check", "type-check; prints the type of each formula");
  addInput(checkCmd);
  checkCmd->add_flag("--strict", strict, "postprocessed-form rules");
  checkCmd->add_flag("--raw", [&](std::int64_t) { strict = false; }, "raw-form rules (default)");
  checkCmd->add_flag("--fragment", fragment, "accept any well-typed constituent");

  bool relOnly = false, beta = false;
  auto* expandCmd = app.add_subcommand("expand", "expand macros");
  addInput(expandCmd);
  expandCmd->add_flag("--rel-only", relOnly, "only relativizer processing");
  expandCmd->add_flag("--beta", beta, "beta-reduce the result");

  std::string stage = "advs";
  auto* postCmd = app.add_subcommand("postproc", "raw to postprocessed ULF");
  addInput(postCmd);
  postCmd->add_option("--stage", stage, "last stage: rel, macros, shifters, adva, advs")
      ->check(CLI::IsMember({"rel", "macros", "shifters", "adva", "advs"}));

  std::size_t limit = 1;
  auto* scopeCmd = app.add_subcommand("scope", "scoped logical forms, default scoping first");
  addInput(scopeCmd);
  scopeCmd->add_option("--limit", limit, "number of scopings to print")->check(CLI::PositiveNumber);
  scopeCmd->add_flag("--strict", strict, "fail if the sentence has more scopings than --limit");

  std::string modelFile, episode;
  auto* evalCmd = app.add_subcommand("eval", "truth of scoped formulas in a finite model");
  addInput(evalCmd);
  evalCmd->add_option("--model", modelFile, "model file")->required();
  evalCmd->add_option("--episode", episode, "evaluation situation (default: the model's first)");

  int now = 1;
  auto* deindexCmd = app.add_subcommand("deindex", "episodic formulas from scoped forms");
  addInput(deindexCmd);
  deindexCmd->add_option("--now", now, "index of the speech-time constant |NowN|");

  std::string rulesFile = std::string(ULF_DATA_DIR) + "/infer.rules";
  std::string kbFile = std::string(ULF_DATA_DIR) + "/kb.facts";
  auto* inferCmd = app.add_subcommand("infer", "structural inferences");
  addInput(inferCmd);
  inferCmd->add_option("--rules", rulesFile, "lexical rule file");
  inferCmd->add_option("--kb", kbFile, "isa knowledge base");

  std::string fileA, fileB;
  ScoreOptions scoreOpts;
  int seed = 1;
  auto* scoreCmd = app.add_subcommand("score", "EL-smatch F1 between two files of ULFs, paired in order");
  scoreCmd->add_option("a", fileA)->required();
  scoreCmd->add_option("b", fileB)->required();
  scoreCmd->add_option("--restarts", scoreOpts.restarts, "hill-climbing restarts");
  scoreCmd->add_option("--seed", seed, "random seed");

  std::string corpus;
  bool certainOnly = false;
  auto* iaCmd = app.add_subcommand("ia", "pairwise inter-annotator agreement");
  iaCmd->add_option("--corpus", corpus, "store directory or record file")->required();
  iaCmd->add_flag("--certain-only", certainOnly, "only annotations marked certain");
  iaCmd->add_option("--restarts", scoreOpts.restarts, "hill-climbing restarts");
  iaCmd->add_option("--seed", seed, "random seed");

  bool asJson = false;
  auto* statsCmd = app.add_subcommand("stats", "annotation counts by dataset and certainty");
  statsCmd->add_option("--corpus", corpus, "store directory or record file")->required();
  statsCmd->add_flag("--json", asJson, "JSON instead of a table");

  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serveCmd = app.add_subcommand("serve", "run the annotation HTTP service");
  serveCmd->add_option("--corpus", corpus, "store directory (created if missing)")->required();
  serveCmd->add_option("--port", port, "port");
  serveCmd->add_option("--host", host, "bind address");

  std::vector<std::string> argv = std::move(args);
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, io.out, io.err);
  }

  CheckOptions chk;
  chk.mode = strict ? CheckMode::Strict : CheckMode::Raw;
  chk.fragment = fragment;

  try {
    if (*parseCmd) {
      for (auto& e : readExprs(input, io)) io.out << print(e) << "\n";
      return 0;
    }
    if (*checkCmd) {
      int status = 0;
      for (auto& e : readExprs(input, io)) {
        auto r = checkTyped(e, chk);
        io.out << toString(r.type) << "\n";
        report(io.err, r.diagnostics);
        if (!r.ok()) status = 1;
      }
      return status;
    }
    if (*expandCmd) {
      for (auto& e : readExprs(input, io)) {
        Expr x = relOnly ? expandRel(e) : expandAll(e);
        if (beta) x = betaReduce(x);
        io.out << print(x) << "\n";
      }
      return 0;
    }
    if (*postCmd) {
      auto st = *stageFromName(stage);
      for (auto& e : readExprs(input, io)) io.out << print(postprocess(e, st)) << "\n";
      return 0;
    }
    if (*scopeCmd) {
      ScopeOptions so;
      so.limit = limit;
      so.strict = strict;
      for (auto& e : readExprs(input, io)) {
        auto all = enumerateScopings(e, so);
        if (all.size() > 1) io.out << "# " << all.size() << " scopings\n";
        for (auto& s : all) io.out << print(s) << "\n";
      }
      return 0;
    }
    if (*evalCmd) {
      auto model = parseModel(slurp(modelFile, io.in));
      auto sit = episode.empty() ? model.situations.front() : episode;
      for (auto& e : readExprs(input, io)) io.out << (evalModel(e, model, sit) ? "true" : "false") << "\n";
      return 0;
    }
    if (*deindexCmd) {
      DeindexOptions o;
      o.now = now;
      int status = 0;
      for (auto& e : readExprs(input, io)) {
        auto r = deindex(e, o);
        for (auto& f : r.formulas) io.out << print(f) << "\n";
        report(io.err, r.diagnostics);
        if (hasErrors(r.diagnostics)) status = 1;
      }
      return status;
    }
    if (*inferCmd) {
      auto rules = loadRules(rulesFile);
      auto kb = loadKB(kbFile);
      for (auto& e : readExprs(input, io))
        for (auto& inf : inferAll(e, rules, kb))
          io.out << "# " << ruleClassName(inf.cls) << " " << inf.rule << " " << inf.strength << "\n"
                 << print(inf.ulf) << "\n";
      return 0;
    }
    if (*scoreCmd) {
      scoreOpts.seed = static_cast<unsigned>(seed);
      auto a = readExprs(fileA, io);
      auto b = readExprs(fileB, io);
      if (a.size() != b.size())
        fail("LengthMismatch", fileA + " has " + std::to_string(a.size()) + " formulas, " + fileB + " has " +
                                   std::to_string(b.size()));
      PairCounts c;
      for (std::size_t i = 0; i < a.size(); ++i) {
        auto s = score(toTriples(a[i]), toTriples(b[i]), scoreOpts);
        c.matched += s.matched;
        c.sizeA += s.sizeA;
        c.sizeB += s.sizeB;
        ++c.sentences;
      }
      io.out << fmt3(c.f1()) << "\n";
      return 0;
    }
    if (*iaCmd) {
      scoreOpts.seed = static_cast<unsigned>(seed);
      CorpusHandle h(corpus);
      auto rep = agreementMatrix(h.store().annotatorCorpus(), certainOnly, scoreOpts);
      std::size_t w = 5;
      for (auto& a : rep.annotators) w = std::max(w, a.size());
      io.out << std::left << std::setw(static_cast<int>(w)) << "";
      for (auto& a : rep.annotators) io.out << "  " << std::setw(static_cast<int>(w)) << a;
      io.out << "\n";
      for (auto& a : rep.annotators) {
        io.out << std::setw(static_cast<int>(w)) << a;
        for (auto& b : rep.annotators) {
          auto it = rep.pairwise.find({a, b});
          io.out << "  " << std::setw(static_cast<int>(w)) << (it == rep.pairwise.end() ? "-" : fmt3(it->second));
        }
        io.out << "\n";
      }
      io.out << "# overall " << (rep.overall ? fmt3(*rep.overall) : "-") << (certainOnly ? " (certain only)" : "")
             << "\n";
      report(io.err, rep.diagnostics);
      return 0;
    }
    if (*statsCmd) {
      CorpusHandle h(corpus);
      auto t = h.store().stats();
      if (asJson)
        io.out << toJson(t).dump(2) << "\n";
      else
        io.out << renderStats(t);
      return 0;
    }
    if (*serveCmd) {
      CorpusStore store(corpus);
      httplib::Server srv;
      mountRoutes(srv, store);
      io.err << "serving " << corpus << " on http://" << host << ":" << port << "\n";
      return srv.listen(host, port) ? 0 : 1;
    }
  } catch (const DiagnosticError& e) {
    report(io.err, {e.diagnostic()});
    return 1;
  } catch (const Reported&) {
    return 1;
  }
  return 0;
}

}  // namespace ulf::cli
