#pragma once

#include <stdexcept>
#include <string>

namespace fraloc {

/// Error category, mapped to CLI exit codes (validation -> 1, numerical -> 2).
enum class ErrorKind {
    Validation,
    Numerical,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_validation(const std::string& what) {
    throw Error(ErrorKind::Validation, what);
}

[[noreturn]] inline void throw_numerical(const std::string& what) {
    throw Error(ErrorKind::Numerical, what);
}

}  // namespace fraloc
