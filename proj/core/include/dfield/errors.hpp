#ifndef DFIELD_ERRORS_HPP
#define DFIELD_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dfield {

// Syntax error in an expression string. `offset` is the byte position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Non-finite value produced during evaluation; message names the
// offending subexpression.
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed problem specification or configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// gamma(0) already exceeds the requested margin: no positive step exists.
class NoAdmissibleStep : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed-point iteration exceeded its budget or produced non-finite
// iterates. Consumed by the global builder as a blowup trigger.
class PicardDivergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Concatenation junction slices disagree.
class JunctionMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Field snapshot file is corrupt, truncated or has the wrong version.
class FieldIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dfield

#endif
