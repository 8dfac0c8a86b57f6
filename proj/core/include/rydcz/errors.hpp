#pragma once

#include <stdexcept>
#include <string>

namespace rydcz {

/// Caller broke a documented precondition (bad scheme/drive pairing, negative rates, ...).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent configuration / preset file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time evolution produced non-finite numbers.
class PropagationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rydcz
