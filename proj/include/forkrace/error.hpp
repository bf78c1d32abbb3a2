#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forkrace {

enum class Errc {
    InvalidPool,
    AlreadyForked,
    NotForked,
    InvalidFork,
    InvalidRelease,
    NotAnUncle,
    NephewUnavailable,
    NoData,
    MergeShapeError,
    NoCrossing,
    Incomplete,
    InvalidConfig,
    ConfigError,
    IoError,
};

std::string_view to_string(Errc code);

// Every failure raised by the library carries one of the codes above so that
// callers (CLI exit codes, python bindings, tests) can branch on it.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace forkrace
