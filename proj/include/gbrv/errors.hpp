#pragma once

#include <stdexcept>
#include <string>

namespace gbrv {

// Exit codes used by the CLI: 0 success, 2 input error, 3 verification
// refusal (model not large-spread), 4 resource cap exceeded.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 2;
};

struct SpreadError : std::runtime_error {
    explicit SpreadError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 3;
};

struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
    static constexpr int exit_code = 4;
};

}  // namespace gbrv
