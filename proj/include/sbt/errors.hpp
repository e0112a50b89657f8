#pragma once

#include <stdexcept>
#include <string>

namespace sbt {

/// Root of every error thrown by the library. exit_code() is what the CLI
/// returns when the error escapes a subcommand.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Bad input: geometry, configuration, or evaluation point.
class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// A numerical procedure could not reach its stated accuracy.
class ToleranceError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

#define SBT_DEFINE_ERROR(Name, Base)                       \
  class Name : public Base {                               \
   public:                                                 \
    explicit Name(const std::string& what) : Base(what) {} \
  }

SBT_DEFINE_ERROR(SelfIntersection, ValidationError);
SBT_DEFINE_ERROR(DegenerateCurve, ValidationError);
SBT_DEFINE_ERROR(EpsilonTooLarge, ValidationError);
SBT_DEFINE_ERROR(SingularPoint, ValidationError);
SBT_DEFINE_ERROR(TooCloseToCenterline, ValidationError);
SBT_DEFINE_ERROR(ConfigInvalid, ValidationError);
SBT_DEFINE_ERROR(DegenerateFit, ValidationError);
SBT_DEFINE_ERROR(IntegrationFailure, ToleranceError);
SBT_DEFINE_ERROR(ToleranceNotMet, ToleranceError);

#undef SBT_DEFINE_ERROR

}  // namespace sbt
