#pragma once

#include <stdexcept>
#include <string>

namespace iqp {

// Base of every error raised by the library. `module()` names the component
// that detected the problem so the CLI can surface it.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

// Invalid input: malformed system, out-of-range index, dimension mismatch.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// The simplex engine gave up (pivot limit, lost feasibility after phase 1).
// Distinct from an infeasible constraint set, which is a regular result.
class NumericalError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error("trajectory-events", what + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace iqp
