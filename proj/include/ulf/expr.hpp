#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ulf {

// Closed set of atomic syntactic tags (the suffix after the last dot).
enum class Tag {
  V, N, A, P, PArg, Pro, D, AuxV, AuxS, AdvA, AdvE, AdvS, AdvF,
  Cc, Ps, Pq, ModN, ModA, Rel, Sk
};

inline constexpr std::array<std::pair<Tag, std::string_view>, 20> kTagNames{{
    {Tag::V, "v"},        {Tag::N, "n"},        {Tag::A, "a"},
    {Tag::P, "p"},        {Tag::PArg, "p-arg"}, {Tag::Pro, "pro"},
    {Tag::D, "d"},        {Tag::AuxV, "aux-v"}, {Tag::AuxS, "aux-s"},
    {Tag::AdvA, "adv-a"}, {Tag::AdvE, "adv-e"}, {Tag::AdvS, "adv-s"},
    {Tag::AdvF, "adv-f"}, {Tag::Cc, "cc"},      {Tag::Ps, "ps"},
    {Tag::Pq, "pq"},      {Tag::ModN, "mod-n"}, {Tag::ModA, "mod-a"},
    {Tag::Rel, "rel"},    {Tag::Sk, "sk"},
}};

inline std::string_view tagName(Tag t) {
  for (auto& [tag, name] : kTagNames)
    if (tag == t) return name;
  return "?";
}

inline std::optional<Tag> tagFromName(std::string_view s) {
  for (auto& [tag, name] : kTagNames)
    if (name == s) return tag;
  return std::nullopt;
}

// Untagged operators. Recognition is exact and case-sensitive.
inline constexpr std::array<std::string_view, 33> kKeywords{
    "k",     "that",  "to",      "ka",       "ke",    "plur",  "pres",
    "past",  "perf",  "prog",    "cf",       "not",   "adv-a", "adv-e",
    "adv-s", "adv-f", "mod-n",   "mod-a",    "nnp",   "fquan", "nquan",
    "n+preds", "np+preds", "sub", "rep",     "'s",    "=",     "λ",
    "**",    "*",     "@",       "pair",     "poss-by"};

inline bool isKeyword(std::string_view s) {
  return std::find(kKeywords.begin(), kKeywords.end(), s) != kKeywords.end();
}

enum class NodeKind { Lex, Name, Elided, Keyword, Var, Hole, Punct, List };

// Child-index path from the root; the addressing scheme for diagnostics.
using Path = std::vector<std::size_t>;

// A ULF expression. Value type: copies are deep, trees are never shared
// mutably.
struct Expr {
  NodeKind kind = NodeKind::Var;
  // Stem for Lex/Elided, name text for Name, spelling for Keyword/Var/Hole/Punct.
  std::string text;
  // Present for Lex and Elided; optional for Name (|Earth|.n, |E1|.sk).
  std::optional<Tag> tag;
  std::vector<Expr> children;

  static Expr lex(std::string stem, Tag t) {
    return Expr{NodeKind::Lex, std::move(stem), t, {}};
  }
  static Expr name(std::string text, std::optional<Tag> t = std::nullopt) {
    return Expr{NodeKind::Name, std::move(text), t, {}};
  }
  static Expr elided(std::string stem, Tag t) {
    return Expr{NodeKind::Elided, std::move(stem), t, {}};
  }
  static Expr keyword(std::string k) {
    return Expr{NodeKind::Keyword, std::move(k), std::nullopt, {}};
  }
  static Expr var(std::string v) {
    return Expr{NodeKind::Var, std::move(v), std::nullopt, {}};
  }
  static Expr hole(std::string h) {
    return Expr{NodeKind::Hole, std::move(h), std::nullopt, {}};
  }
  static Expr punct(std::string p) {
    return Expr{NodeKind::Punct, std::move(p), std::nullopt, {}};
  }
  static Expr list(std::vector<Expr> xs) {
    return Expr{NodeKind::List, {}, std::nullopt, std::move(xs)};
  }

  bool isList() const { return kind == NodeKind::List; }
  bool isLeaf() const { return kind != NodeKind::List; }
  bool isKeyword(std::string_view k) const {
    return kind == NodeKind::Keyword && text == k;
  }
  bool hasTag(Tag t) const {
    return (kind == NodeKind::Lex || kind == NodeKind::Elided ||
            kind == NodeKind::Name) &&
           tag == t;
  }
  std::size_t size() const { return children.size(); }
  const Expr& operator[](std::size_t i) const { return children[i]; }
  Expr& operator[](std::size_t i) { return children[i]; }

  friend bool operator==(const Expr&, const Expr&) = default;
};

// Node at a path, or nullptr if the path leaves the tree.
inline const Expr* at(const Expr& root, const Path& path) {
  const Expr* cur = &root;
  for (auto i : path) {
    if (!cur->isList() || i >= cur->size()) return nullptr;
    cur = &cur->children[i];
  }
  return cur;
}

// Copy of root with the node at path replaced.
inline Expr replaceAt(Expr root, const Path& path, Expr replacement) {
  Expr* cur = &root;
  for (auto i : path) cur = &cur->children.at(i);
  *cur = std::move(replacement);
  return root;
}

inline Path child(Path p, std::size_t i) {
  p.push_back(i);
  return p;
}

// Every leaf spelling that could clash with a generated variable name.
inline void collectSymbols(const Expr& e, std::vector<std::string>& out) {
  if (e.isList()) {
    for (auto& c : e.children) collectSymbols(c, out);
  } else {
    out.push_back(e.text);
  }
}

inline std::size_t countNodes(const Expr& e) {
  std::size_t n = 1;
  for (auto& c : e.children) n += countNodes(c);
  return n;
}

inline std::size_t countLists(const Expr& e) {
  if (!e.isList()) return 0;
  std::size_t n = 1;
  for (auto& c : e.children) n += countLists(c);
  return n;
}

template <typename Pred>
bool containsIf(const Expr& e, Pred&& pred) {
  if (pred(e)) return true;
  for (auto& c : e.children)
    if (containsIf(c, pred)) return true;
  return false;
}

}  // namespace ulf
