#ifndef ORTHO_ERROR_HPP
#define ORTHO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ortho {

// Error taxonomy mirrors the CLI exit-code contract:
//   1 usage, 2 data, 3 numeric/training.
enum class ErrorKind { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

class UsageError : public Error {
public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

} // namespace ortho

#endif
