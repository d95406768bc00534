#pragma once

// Plain-text circuit format, one gate per line:
//
//   GATE q0[,q1][ param]
//
// e.g. "RZZ 0,1 0.7853981634". Lines holding only "---" separate moments,
// '#' starts a comment, blank lines are ignored. Parameters are written with
// 10 decimal digits.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dqas/simulator.hpp"

namespace dqas {

class ParseError : public InputError {
  public:
    ParseError(int line, const std::string& message)
        : InputError("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

std::vector<Moment> parse_circuit(std::string_view text);
std::vector<Moment> read_circuit_file(const std::string& path);

std::string format_gate(const Gate& gate);
std::string format_circuit(const std::vector<Moment>& moments);
/// Gate sequence without moment separators.
std::string format_circuit(const std::vector<Gate>& gates);

/// Concatenate the gates of all moments in order.
std::vector<Gate> flatten(const std::vector<Moment>& moments);

} // namespace dqas
