#pragma once

#include <stdexcept>
#include <string>

namespace convwalk {

/// Machine-readable failure classes. The CLI maps these onto exit codes.
enum class ErrorCode {
    invalid_argument = 2,
    model_mismatch = 3,
    config = 4,
    io = 5,
    insufficient_resolution = 6,
    inconclusive = 7,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::model_mismatch: return "model_mismatch";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    case ErrorCode::insufficient_resolution: return "insufficient_resolution";
    case ErrorCode::inconclusive: return "inconclusive";
    }
    return "unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) fail(ErrorCode::invalid_argument, what);
}

}  // namespace convwalk
