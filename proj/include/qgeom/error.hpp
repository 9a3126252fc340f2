#pragma once

#include <stdexcept>
#include <string>

namespace qgeom {

/// Failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Argument,   ///< malformed or inconsistent inputs (mismatched qubit counts, bad indices)
  Config,     ///< invalid run configuration
  Guard,      ///< size or dimension guard exceeded
  Numerical,  ///< numerical precondition violated (branch cut, coarse grid, non-commuting support)
};

class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string & what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline Error argument_error(const std::string & what) { return Error(ErrorKind::Argument, what); }
inline Error config_error(const std::string & what) { return Error(ErrorKind::Config, what); }
inline Error guard_error(const std::string & what) { return Error(ErrorKind::Guard, what); }
inline Error numerical_error(const std::string & what) { return Error(ErrorKind::Numerical, what); }

}  // namespace qgeom
