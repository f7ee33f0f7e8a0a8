#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace homcount {

// Malformed text input (graph/decomposition/circuit files).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// A guarded enumeration or expansion exceeded its budget. No partial results.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// An internal consistency check failed (e.g. a non-exact division that must be
// exact). Signals a bug or a bad oracle, not bad user input.
class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

// Default budget for polynomial expansion and brute-force enumeration.
// HOMCOMPILE_GUARD overrides every guard with a single knob.
inline std::size_t guard_limit(std::size_t fallback = 1000000) {
    if (const char* env = std::getenv("HOMCOMPILE_GUARD")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return fallback;
}

} // namespace homcount
