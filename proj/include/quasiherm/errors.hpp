#pragma once

#include <stdexcept>
#include <string>

namespace quasiherm {

// Shared failure taxonomy. Every error carries a stable module-qualified
// name ("biortho.DegenerateSpectrum", ...) which the CLI prints verbatim
// and maps onto exit codes.
class Error : public std::runtime_error {
public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

namespace detail {
inline std::string qualify(const std::string& module, const char* kind) {
  return module + "." + kind;
}
}  // namespace detail

struct ConvergenceFailure : Error {
  ConvergenceFailure(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "ConvergenceFailure"), what) {}
};

struct DegenerateSpectrum : Error {
  DegenerateSpectrum(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "DegenerateSpectrum"), what) {}
};

struct NotHermitian : Error {
  NotHermitian(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "NotHermitian"), what) {}
};

struct NotPositiveDefinite : Error {
  NotPositiveDefinite(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "NotPositiveDefinite"), what) {}
};

struct Overflow : Error {
  Overflow(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "Overflow"), what) {}
};

struct DimensionMismatch : Error {
  DimensionMismatch(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "DimensionMismatch"), what) {}
};

struct PairingAmbiguous : Error {
  PairingAmbiguous(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "PairingAmbiguous"), what) {}
};

struct PairingNotFound : Error {
  PairingNotFound(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "PairingNotFound"), what) {}
};

struct ProportionalityViolated : Error {
  ProportionalityViolated(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "ProportionalityViolated"), what) {}
};

struct BrokenPhase : Error {
  BrokenPhase(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "BrokenPhase"), what) {}
};

struct ComplexKappa : Error {
  ComplexKappa(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "ComplexKappa"), what) {}
};

struct InvolutivityViolated : Error {
  InvolutivityViolated(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "InvolutivityViolated"), what) {}
};

struct HermitizationFailed : Error {
  HermitizationFailed(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "HermitizationFailed"), what) {}
};

struct ParseError : Error {
  ParseError(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "ParseError"), what) {}
};

struct InvalidGrid : Error {
  InvalidGrid(const std::string& module, const std::string& what)
      : Error(detail::qualify(module, "InvalidGrid"), what) {}
};

}  // namespace quasiherm
