#pragma once

#include <stdexcept>
#include <string>

namespace kpm {

// Malformed data: bad file contents, out-of-range positions, inconsistent
// shapes. The CLI maps this (and parse errors) to exit code 1.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A stated precondition of an operation does not hold for the given input.
// In guaranteed mode every hypothesis is checked before work starts.
class HypothesisUnmet : public std::runtime_error {
public:
    explicit HypothesisUnmet(const std::string& what) : std::runtime_error(what) {}
};

// A step that the hypotheses prove must succeed did not. This is always an
// implementation bug or a miscalibrated guaranteed-mode call; the message
// carries a dump of the state that broke.
class InvariantViolation : public std::runtime_error {
public:
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kpm
