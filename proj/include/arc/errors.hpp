#pragma once

#include <stdexcept>
#include <string>

namespace arc {

// Error taxonomy mirrors the CLI exit-code contract:
// config -> 2, data -> 3, contract/internal -> 4.

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A caller violated an operation precondition (bad rank, mismatched dimension, ...).
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// A state invariant broke; the cache can no longer be trusted.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace arc
