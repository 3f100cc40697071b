#pragma once

#include <stdexcept>
#include <string>

namespace satett {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class EmptyInputError : public Error { using Error::Error; };
class NotFoundError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class RankDeficiencyError : public Error { using Error::Error; };
class ConditioningError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class GenerationError : public Error { using Error::Error; };
class OutOfScopeError : public ConfigError { using ConfigError::ConfigError; };

}  // namespace satett
