#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace komatsu {

// Base class for every failure raised by the library. The CLI maps these onto
// exit codes, so each subclass reports a stable kind() string.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define KOMATSU_DECLARE_ERROR(Name)                                   \
  class Name : public Error {                                         \
   public:                                                            \
    using Error::Error;                                               \
    const char* kind() const noexcept override { return #Name; }      \
  }

KOMATSU_DECLARE_ERROR(IndexError);
KOMATSU_DECLARE_ERROR(DomainError);
KOMATSU_DECLARE_ERROR(InvalidSequence);
KOMATSU_DECLARE_ERROR(NoConvergence);
KOMATSU_DECLARE_ERROR(MissingWitness);
KOMATSU_DECLARE_ERROR(ShapeError);
KOMATSU_DECLARE_ERROR(GridTooLarge);
KOMATSU_DECLARE_ERROR(ResolutionError);
KOMATSU_DECLARE_ERROR(PrecisionCap);
KOMATSU_DECLARE_ERROR(UncertifiedInput);
KOMATSU_DECLARE_ERROR(MissingPrimitive);
KOMATSU_DECLARE_ERROR(ConfigError);

#undef KOMATSU_DECLARE_ERROR

// Errors that carry the offending spectral modes, formatted as short strings
// such as "k=0 l=1 m=0".
class ModeError : public Error {
 public:
  ModeError(const std::string& what, std::vector<std::string> modes)
      : Error(what), modes_(std::move(modes)) {}
  const std::vector<std::string>& modes() const noexcept { return modes_; }

 private:
  std::vector<std::string> modes_;
};

class NotSolvable : public ModeError {
 public:
  using ModeError::ModeError;
  const char* kind() const noexcept override { return "NotSolvable"; }
};

class NotInK : public ModeError {
 public:
  using ModeError::ModeError;
  const char* kind() const noexcept override { return "NotInK"; }
};

class NotInJ : public ModeError {
 public:
  NotInJ(const std::string& what, std::vector<std::string> modes, double removed_mass)
      : ModeError(what, std::move(modes)), removed_mass_(removed_mass) {}
  const char* kind() const noexcept override { return "NotInJ"; }
  double removed_mass() const noexcept { return removed_mass_; }

 private:
  double removed_mass_;
};

}  // namespace komatsu
