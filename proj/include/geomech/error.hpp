#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geomech {

// Base for every library failure; `code()` is the stable machine-readable name.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define GEOMECH_DECLARE_ERROR(Name)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

GEOMECH_DECLARE_ERROR(UnknownFunction);
GEOMECH_DECLARE_ERROR(DomainError);
GEOMECH_DECLARE_ERROR(DimensionMismatch);
GEOMECH_DECLARE_ERROR(NotASubspace);
GEOMECH_DECLARE_ERROR(InvalidDimension);
GEOMECH_DECLARE_ERROR(MissingCoordinate);
GEOMECH_DECLARE_ERROR(SingularStructure);
GEOMECH_DECLARE_ERROR(NotOnManifold);
GEOMECH_DECLARE_ERROR(DegenerateConstraints);
GEOMECH_DECLARE_ERROR(NotCoisotropic);
GEOMECH_DECLARE_ERROR(CaseUnsupported);
GEOMECH_DECLARE_ERROR(NotLagrangian);
GEOMECH_DECLARE_ERROR(RankJump);
GEOMECH_DECLARE_ERROR(UnsupportedCombination);
GEOMECH_DECLARE_ERROR(JacobiIncompatible);
GEOMECH_DECLARE_ERROR(SingularLagrangian);
GEOMECH_DECLARE_ERROR(MismatchedSystem);

#undef GEOMECH_DECLARE_ERROR

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& message)
      : Error("SyntaxError", message + " at offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class NonFiniteState : public Error {
 public:
  NonFiniteState(double last_good_time, const std::string& message)
      : Error("NonFiniteState", message + " (last finite state at t=" + std::to_string(last_good_time) + ")"),
        last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

class MissingBinding : public Error {
 public:
  explicit MissingBinding(std::string name)
      : Error("MissingBinding", "no value bound for '" + name + "'"),
        name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

}  // namespace geomech
