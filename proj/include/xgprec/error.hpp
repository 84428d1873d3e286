#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xgprec {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

/// Malformed corpus record or index file. `line()` is 0 when not line-based.
class FormatError : public Error {
  public:
    explicit FormatError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line)
    {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class DuplicateIdError : public Error {
  public:
    using Error::Error;
};

class UnknownDocument : public Error {
  public:
    using Error::Error;
};

class ConceptAbsent : public Error {
  public:
    using Error::Error;
};

class NoSupport : public Error {
  public:
    using Error::Error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

class InvalidK : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};

class InvalidL : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};

class VersionMismatch : public Error {
  public:
    using Error::Error;
};

class UnknownTopic : public Error {
  public:
    using Error::Error;
};

}  // namespace xgprec
