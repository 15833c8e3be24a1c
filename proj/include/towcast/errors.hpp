#pragma once

#include <stdexcept>
#include <string>

namespace towcast {

/// Invalid data or a violated domain rule. Maps to CLI exit code 1.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened or read.
class IoError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Input table is missing a required column or has a malformed header.
class SchemaError : public DomainError {
public:
    using DomainError::DomainError;
};

/// API misuse: mismatched lengths, unknown feature names, wrong call order.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace towcast
