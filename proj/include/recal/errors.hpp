#pragma once

#include <stdexcept>
#include <string>

namespace recal {

/// Coarse classification used to map failures onto CLI exit codes.
enum class ErrorKind {
  Input,    // bad data, bad configuration, degenerate training design
  Numeric,  // convergence, quadrature, degenerate variance, undefined scores
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define RECAL_DEFINE_ERROR(Name, Kind)                               \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(Kind, what) {}    \
  }

RECAL_DEFINE_ERROR(InputError, ErrorKind::Input);
RECAL_DEFINE_ERROR(ParameterDomainError, ErrorKind::Input);
RECAL_DEFINE_ERROR(InsufficientDataError, ErrorKind::Input);
RECAL_DEFINE_ERROR(DegenerateDesignError, ErrorKind::Input);
RECAL_DEFINE_ERROR(DegenerateVarianceError, ErrorKind::Numeric);
RECAL_DEFINE_ERROR(UndefinedScoreError, ErrorKind::Numeric);
RECAL_DEFINE_ERROR(NumericError, ErrorKind::Numeric);
RECAL_DEFINE_ERROR(BootstrapFailure, ErrorKind::Numeric);
RECAL_DEFINE_ERROR(EmptyResultError, ErrorKind::Numeric);

#undef RECAL_DEFINE_ERROR

}  // namespace recal
