#pragma once

#include <stdexcept>
#include <string>

namespace bioauth {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand widths disagree, or a width-dependent operation got a bad width.
class WidthError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class RegistrationError : public Error {
 public:
  using Error::Error;
};

// An adversary operation was attempted on a link modelled as secure.
class AdversaryOnSecureLink : public Error {
 public:
  using Error::Error;
};

// The protocol is carried only as reference data and cannot be run.
class NotExecutable : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace bioauth
