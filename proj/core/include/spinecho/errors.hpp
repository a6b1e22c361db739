#pragma once

#include <stdexcept>
#include <string>

namespace spinecho {

/// Bad or inconsistent run-configuration input (unknown key, bad value, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Physically infeasible request (degenerate geometry, impossible schedule, ...).
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Operations applied out of time order (e.g. a pulse before the state was evolved to it).
class SequenceError : public std::logic_error {
public:
    explicit SequenceError(const std::string& what) : std::logic_error(what) {}
};

} // namespace spinecho
