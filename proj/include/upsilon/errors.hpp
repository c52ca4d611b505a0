#pragma once

#include <stdexcept>
#include <string>

namespace upsilon {

// Bad ids, bad flag combinations, malformed configs. CLI exit status 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Missing or unreadable/unwritable files. CLI exit status 2.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A violated internal invariant. CLI exit status 3.
struct InternalError : std::logic_error {
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

// The agent returned an action outside the action space; aborts the episode.
struct ProtocolViolation : std::runtime_error {
    ProtocolViolation(std::size_t cycle, const std::string& what)
        : std::runtime_error("cycle " + std::to_string(cycle) + ": " + what), cycle(cycle) {}
    std::size_t cycle;
};

}  // namespace upsilon
