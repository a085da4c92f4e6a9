#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "slearner/heaplang.hpp"

namespace slearner::testing {

inline std::string source_path(const std::string& rel) { return std::string(SLEARNER_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::string& rel) {
  std::ifstream in(source_path(rel));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline Program load_program(const std::string& rel) { return parse_program(read_file(rel)); }

}  // namespace slearner::testing
