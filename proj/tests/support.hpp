#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ulf/reader.hpp"

namespace testing_support {

struct Golden {
  std::string id;
  bool fragment = false;
  std::string text;
};

inline std::string dataPath(const std::string& rel) {
  return std::string(ULF_DATA_DIR) + "/" + rel;
}

inline std::vector<Golden> loadGolden() {
  std::ifstream in(dataPath("golden.tsv"));
  if (!in) throw std::runtime_error("golden corpus missing");
  std::vector<Golden> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == ';') continue;
    auto t1 = line.find('\t');
    auto t2 = line.find('\t', t1 + 1);
    out.push_back(Golden{line.substr(0, t1),
                         line.substr(t1 + 1, t2 - t1 - 1) == "fragment",
                         line.substr(t2 + 1)});
  }
  return out;
}

inline const Golden& golden(const std::string& id) {
  static const auto all = loadGolden();
  for (auto& g : all)
    if (g.id == id) return g;
  throw std::runtime_error("no golden " + id);
}

inline ulf::Expr goldenExpr(const std::string& id) {
  return ulf::parseOrThrow(golden(id).text);
}

}  // namespace testing_support
