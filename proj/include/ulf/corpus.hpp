#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ulf/checker.hpp"
#include "ulf/diagnostic.hpp"
#include "ulf/elsmatch.hpp"

namespace ulf {

using json = nlohmann::json;

enum class Certainty { Certain, Uncertain, Incomplete };

inline std::string_view certaintyName(Certainty c) {
  switch (c) {
    case Certainty::Certain: return "certain";
    case Certainty::Uncertain: return "uncertain";
    case Certainty::Incomplete: return "incomplete";
  }
  return "?";
}

inline Certainty certaintyFromName(std::string_view s) {
  if (s == "certain") return Certainty::Certain;
  if (s == "uncertain") return Certainty::Uncertain;
  if (s == "incomplete") return Certainty::Incomplete;
  fail("InvalidRecord", "certainty must be certain, uncertain or incomplete, got '" + std::string(s) + "'");
}

struct Comment {
  std::string author;
  std::string timestamp;
  std::string text;
};

struct SentenceEntry {
  std::string id;
  std::string dataset;
  std::string text;
};

struct AnnotationRecord {
  std::string sentenceId;
  std::string dataset;
  std::string sentence;
  std::string ulf;
  Certainty certainty = Certainty::Uncertain;
  std::vector<Comment> comments;
  std::string updatedAt;
  std::string author;
  int version = 0;      // position in the sentence's history, from 1
  bool legacy = false;  // imported from before certainty marking; counted as Old
};

inline json toJson(const AnnotationRecord& r) {
  json cs = json::array();
  for (auto& c : r.comments) cs.push_back({{"author", c.author}, {"timestamp", c.timestamp}, {"text", c.text}});
  json j{{"sentenceId", r.sentenceId}, {"dataset", r.dataset},     {"sentence", r.sentence},
         {"ulf", r.ulf},               {"certainty", certaintyName(r.certainty)},
         {"comments", cs},             {"updatedAt", r.updatedAt}, {"author", r.author},
         {"version", r.version}};
  if (r.legacy) j["legacy"] = true;
  return j;
}

inline AnnotationRecord recordFromJson(const json& j) {
  if (!j.is_object()) fail("InvalidRecord", "record must be an object");
  AnnotationRecord r;
  auto str = [&](const char* k) { return j.contains(k) && j[k].is_string() ? j[k].get<std::string>() : std::string(); };
  r.sentenceId = str("sentenceId");
  r.dataset = str("dataset");
  r.sentence = str("sentence");
  r.ulf = str("ulf");
  if (!j.contains("certainty") || !j["certainty"].is_string()) fail("InvalidRecord", "certainty is required");
  r.certainty = certaintyFromName(j["certainty"].get<std::string>());
  r.updatedAt = str("updatedAt");
  r.author = str("author");
  if (j.contains("version") && j["version"].is_number_integer()) r.version = j["version"].get<int>();
  r.legacy = j.value("legacy", false);
  if (j.contains("comments")) {
    if (!j["comments"].is_array()) fail("InvalidRecord", "comments must be a list");
    for (auto& c : j["comments"]) {
      if (!c.is_object() || !c.contains("text")) fail("InvalidRecord", "comment needs text");
      r.comments.push_back({c.value("author", ""), c.value("timestamp", ""), c.value("text", "")});
    }
  }
  return r;
}

inline std::string utcNow() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Counts per dataset and certainty, one row per dataset plus a total.
struct StatsRow {
  std::string dataset;
  std::size_t certain = 0, uncertain = 0, incomplete = 0, old = 0;
  std::size_t all() const { return certain + uncertain + incomplete + old; }
};

struct StatsTable {
  std::vector<StatsRow> rows;
  StatsRow total{"Total"};
};

inline std::string renderStats(const StatsTable& t) {
  std::size_t w = 7;
  for (auto& r : t.rows) w = std::max(w, r.dataset.size());
  std::ostringstream os;
  auto line = [&](const std::string& name, auto c, auto u, auto i, auto o, auto a) {
    os << std::left << std::setw(static_cast<int>(w)) << name << std::right << " | " << std::setw(6) << c << " | "
       << std::setw(6) << u << " | " << std::setw(6) << i << " | " << std::setw(6) << o << " | " << std::setw(6) << a
       << "\n";
  };
  line("", "Cert.", "Unc.", "Inc.", "Old", "All");
  os << std::string(w + 45, '-') << "\n";
  for (auto& r : t.rows) line(r.dataset, r.certain, r.uncertain, r.incomplete, r.old, r.all());
  os << std::string(w + 45, '-') << "\n";
  auto& s = t.total;
  line("Total", s.certain, s.uncertain, s.incomplete, s.old, s.all());
  return os.str();
}

inline json toJson(const StatsTable& t) {
  auto row = [](const StatsRow& r) {
    return json{{"dataset", r.dataset}, {"certain", r.certain}, {"uncertain", r.uncertain},
                {"incomplete", r.incomplete}, {"old", r.old}, {"all", r.all()}};
  };
  json rows = json::array();
  for (auto& r : t.rows) rows.push_back(row(r));
  return {{"columns", {"certain", "uncertain", "incomplete", "old", "all"}}, {"rows", rows}, {"total", row(t.total)}};
}

inline json toJson(const Diagnostic& d) {
  json j{{"severity", severityName(d.severity)}, {"code", d.code}, {"message", d.message}, {"path", d.path}};
  if (d.offset) j["offset"] = *d.offset;
  if (d.suggestion) j["suggestion"] = print(*d.suggestion);
  return j;
}

// The annotator's live check: parse plus fragment-mode type check.
inline json liveCheck(std::string_view text) {
  CheckOptions opts;
  opts.fragment = true;
  auto r = checkText(text, opts);
  json ds = json::array();
  for (auto& d : r.diagnostics) ds.push_back(toJson(d));
  return {{"ok", r.ok()}, {"type", toString(r.type)}, {"diagnostics", ds}};
}

struct StoreOptions {
  std::size_t compactEvery = 500;  // writes per dataset between log rewrites
  std::function<std::string()> clock = utcNow;
};

// Annotation corpus on disk:
//   <dir>/sentences.jsonl            {"id","dataset","text"} per line
//   <dir>/annotations/<dataset>.jsonl  append-only record log, one record per line
// Every write is appended and synced before it is acknowledged. Reads are
// served from memory.
class CorpusStore {
 public:
  explicit CorpusStore(std::filesystem::path dir, StoreOptions opts = {}) : dir_(std::move(dir)), opts_(std::move(opts)) {
    std::filesystem::create_directories(dir_ / "annotations");
    load();
  }

  std::vector<SentenceEntry> sentences(const std::string& dataset = {}) const {
    std::shared_lock lock(mu_);
    std::vector<SentenceEntry> out;
    for (auto& s : inventory_)
      if (dataset.empty() || s.dataset == dataset) out.push_back(s);
    return out;
  }

  std::optional<SentenceEntry> sentence(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return inventory_[it->second];
  }

  void addSentences(const std::vector<SentenceEntry>& xs) {
    std::unique_lock lock(mu_);
    std::string lines;
    for (auto& s : xs) {
      if (s.id.empty()) fail("InvalidRecord", "sentence id is empty");
      if (index_.count(s.id)) continue;
      index_[s.id] = inventory_.size();
      inventory_.push_back(s);
      lines += json{{"id", s.id}, {"dataset", s.dataset}, {"text", s.text}}.dump() + "\n";
    }
    appendDurably(dir_ / "sentences.jsonl", lines);
  }

  // Stores a new version. expectedVersion, when given, must equal the
  // sentence's current history length.
  AnnotationRecord upsert(AnnotationRecord r, std::optional<int> expectedVersion = std::nullopt) {
    std::unique_lock lock(mu_);
    auto it = index_.find(r.sentenceId);
    if (it == index_.end()) fail("UnknownSentence", "no sentence with id '" + r.sentenceId + "'");
    if (r.ulf.empty() && r.certainty != Certainty::Incomplete)
      fail("InvalidRecord", "an empty annotation must be marked incomplete");
    auto& hist = history_[r.sentenceId];
    int current = static_cast<int>(hist.size());
    if (expectedVersion && *expectedVersion != current)
      fail("StaleWrite", "expected version " + std::to_string(*expectedVersion) + ", current is " +
                             std::to_string(current));
    const auto& s = inventory_[it->second];
    r.dataset = s.dataset;
    r.sentence = s.text;
    r.version = current + 1;
    r.updatedAt = opts_.clock();
    for (auto& c : r.comments)
      if (c.timestamp.empty()) c.timestamp = r.updatedAt;
    appendDurably(logPath(r.dataset), toJson(r).dump() + "\n");
    hist.push_back(r);
    if (++writesSinceCompact_[r.dataset] >= opts_.compactEvery) compactLocked(r.dataset);
    return r;
  }

  // Bulk load of a record file (same line format as the logs). Sentences not
  // yet in the inventory are added from the records themselves. Returns the
  // number of records imported; bad lines throw with their line number.
  std::size_t importRecords(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail("StorageError", "cannot read " + file.string());
    std::vector<AnnotationRecord> recs;
    std::size_t lineNo = 0;
    for (std::string line; std::getline(in, line);) {
      ++lineNo;
      if (line.empty()) continue;
      try {
        recs.push_back(recordFromJson(json::parse(line)));
      } catch (const std::exception& e) {
        fail("InvalidRecord", file.string() + ":" + std::to_string(lineNo) + ": " + e.what());
      }
      if (recs.back().sentenceId.empty()) fail("InvalidRecord", file.string() + ":" + std::to_string(lineNo) + ": no sentenceId");
    }
    std::vector<SentenceEntry> fresh;
    for (auto& r : recs) fresh.push_back({r.sentenceId, r.dataset, r.sentence});
    addSentences(fresh);
    std::unique_lock lock(mu_);
    std::map<std::string, std::string> lines;
    for (auto& r : recs) {
      if (r.ulf.empty() && r.certainty != Certainty::Incomplete)
        fail("InvalidRecord", r.sentenceId + ": an empty annotation must be marked incomplete");
      auto& hist = history_[r.sentenceId];
      const auto& s = inventory_[index_.at(r.sentenceId)];
      r.dataset = s.dataset;
      r.sentence = s.text;
      r.version = static_cast<int>(hist.size()) + 1;
      if (r.updatedAt.empty()) r.updatedAt = opts_.clock();
      lines[r.dataset] += toJson(r).dump() + "\n";
      hist.push_back(r);
    }
    for (auto& [d, data] : lines) appendDurably(logPath(d), data);
    return recs.size();
  }

  // Latest record for a sentence, optionally restricted to one author.
  std::optional<AnnotationRecord> latest(const std::string& id, const std::string& author = {}) const {
    std::shared_lock lock(mu_);
    auto it = history_.find(id);
    if (it == history_.end()) return std::nullopt;
    for (auto r = it->second.rbegin(); r != it->second.rend(); ++r)
      if (author.empty() || r->author == author) return *r;
    return std::nullopt;
  }

  std::vector<AnnotationRecord> history(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = history_.find(id);
    return it == history_.end() ? std::vector<AnnotationRecord>{} : it->second;
  }

  // Each author's latest annotation of each sentence is one annotation.
  StatsTable stats() const {
    std::shared_lock lock(mu_);
    StatsTable t;
    std::map<std::string, std::size_t> rowOf;
    for (auto& s : inventory_)
      if (rowOf.emplace(s.dataset, t.rows.size()).second) t.rows.push_back({s.dataset});
    for (auto& r : currentLocked()) {
      auto& row = t.rows[rowOf.at(r.dataset)];
      for (auto* x : {&row, &t.total}) {
        if (r.legacy)
          ++x->old;
        else if (r.certainty == Certainty::Certain)
          ++x->certain;
        else if (r.certainty == Certainty::Uncertain)
          ++x->uncertain;
        else
          ++x->incomplete;
      }
    }
    return t;
  }

  AnnotatorCorpus annotatorCorpus() const {
    std::shared_lock lock(mu_);
    AnnotatorCorpus c;
    for (auto& r : currentLocked())
      c[r.author].push_back({r.sentenceId, r.ulf, r.certainty == Certainty::Certain && !r.legacy});
    return c;
  }

  void compact() {
    std::unique_lock lock(mu_);
    std::set<std::string> datasets;
    for (auto& s : inventory_) datasets.insert(s.dataset);
    for (auto& d : datasets) compactLocked(d);
  }

  // Lines skipped at load because they did not parse (e.g. a torn final write).
  std::size_t skippedLines() const { return skipped_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path logPath(const std::string& dataset) const {
    std::string name;
    for (char c : dataset) name += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
    if (name.empty()) name = "_";
    return dir_ / "annotations" / (name + ".jsonl");
  }

  static void appendDurably(const std::filesystem::path& p, const std::string& data) {
    if (data.empty()) return;
    int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) fail("StorageError", "cannot open " + p.string());
    std::size_t done = 0;
    while (done < data.size()) {
      auto n = ::write(fd, data.data() + done, data.size() - done);
      if (n <= 0) {
        ::close(fd);
        fail("StorageError", "write failed on " + p.string());
      }
      done += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
  }

  void load() {
    auto readLines = [&](const std::filesystem::path& p, auto&& f) {
      std::ifstream in(p);
      for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        try {
          f(json::parse(line));
        } catch (const std::exception&) {
          ++skipped_;
        }
      }
    };
    readLines(dir_ / "sentences.jsonl", [&](const json& j) {
      SentenceEntry s{j.at("id").get<std::string>(), j.value("dataset", ""), j.value("text", "")};
      if (index_.emplace(s.id, inventory_.size()).second) inventory_.push_back(s);
    });
    for (auto& f : std::filesystem::directory_iterator(dir_ / "annotations")) {
      if (f.path().extension() != ".jsonl") continue;
      readLines(f.path(), [&](const json& j) {
        auto r = recordFromJson(j);
        if (!index_.count(r.sentenceId)) fail("UnknownSentence", r.sentenceId);
        history_[r.sentenceId].push_back(std::move(r));
      });
    }
    for (auto& [_, h] : history_)
      std::stable_sort(h.begin(), h.end(), [](auto& a, auto& b) { return a.version < b.version; });
  }

  std::vector<AnnotationRecord> currentLocked() const {
    std::vector<AnnotationRecord> out;
    for (auto& [id, h] : history_) {
      std::map<std::string, const AnnotationRecord*> byAuthor;
      for (auto& r : h) byAuthor[r.author] = &r;
      for (auto& [_, r] : byAuthor) out.push_back(*r);
    }
    return out;
  }

  // Rewrites a dataset's log from memory (history intact, unparseable lines
  // gone) and swaps it in with a rename.
  void compactLocked(const std::string& dataset) {
    auto path = logPath(dataset);
    auto tmp = path;
    tmp += ".tmp";
    std::string data;
    for (auto& [id, h] : history_)
      for (auto& r : h)
        if (logPath(r.dataset) == path) data += toJson(r).dump() + "\n";
    std::filesystem::remove(tmp);
    appendDurably(tmp, data);
    std::filesystem::rename(tmp, path);
    writesSinceCompact_[dataset] = 0;
  }

  std::filesystem::path dir_;
  StoreOptions opts_;
  mutable std::shared_mutex mu_;
  std::vector<SentenceEntry> inventory_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<AnnotationRecord>> history_;
  std::map<std::string, std::size_t> writesSinceCompact_;
  std::size_t skipped_ = 0;
};

}  // namespace ulf
