#pragma once

#include <string>

#include "spb/model.hpp"

namespace spb::io {

class ParseError : public Error {
public:
  using Error::Error;
};

/// Reads a JSON problem file. Unknown fields are rejected; every error
/// message names the offending field.
ProblemSpec parse_problem_file(const std::string& path);
ProblemSpec parse_problem_text(const std::string& text);

/// Inverse of parse_problem_text up to semantic equality (named target
/// forms come back as their expanded piecewise representation).
std::string serialize_problem(const ProblemSpec& spec);

}  // namespace spb::io
