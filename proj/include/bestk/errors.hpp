// errors.hpp
#pragma once

#include <stdexcept>
#include <string>

namespace bestk {

/// Input that violates a domain invariant (bad means, k out of range, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sampling would exceed the ledger's hard budget.
class BudgetExhausted : public std::runtime_error {
public:
    BudgetExhausted() : std::runtime_error("sample budget exhausted") {}
};

}  // namespace bestk
