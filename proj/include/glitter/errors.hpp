#pragma once

#include <stdexcept>
#include <string>

namespace glitter {

// All recoverable failures are thrown as one of these; the CLI maps the
// code to a single-line "ERROR <code>: <message>" on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(msg), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error("PARSE", msg) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error("VALIDATE", msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("CONFIG", msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("IO", msg) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error("NUMERIC", msg) {}
};

}  // namespace glitter
