#pragma once

#include <stdexcept>
#include <string>

namespace breather {

/// Broad failure classes; each maps onto one CLI exit code.
enum class ErrorClass {
  Config,       // malformed scenario, bad arguments, missing inputs
  Numerical,    // guard tripped: singular system, near-zero resonance, ...
  Convergence,  // a convergence gate did not close
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), cls_(cls), kind_(std::move(kind)) {}

  ErrorClass error_class() const noexcept { return cls_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorClass cls_;
  std::string kind_;
};

#define BREATHER_DEFINE_ERROR(Name, Class)                                   \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(ErrorClass::Class, #Name, what) {} \
  }

BREATHER_DEFINE_ERROR(InvalidArgument, Config);
BREATHER_DEFINE_ERROR(ConfigError, Config);
BREATHER_DEFINE_ERROR(GridMismatch, Config);
BREATHER_DEFINE_ERROR(MissingArtifacts, Config);

BREATHER_DEFINE_ERROR(SingularSystem, Numerical);
BREATHER_DEFINE_ERROR(RankDeficient, Numerical);
BREATHER_DEFINE_ERROR(NotImaginarySpectrum, Numerical);
BREATHER_DEFINE_ERROR(NearZeroResonance, Numerical);
BREATHER_DEFINE_ERROR(QuadratureDivergence, Numerical);
BREATHER_DEFINE_ERROR(AliasingSuspected, Numerical);
BREATHER_DEFINE_ERROR(InsufficientLambdaResolution, Numerical);
BREATHER_DEFINE_ERROR(StepRejected, Numerical);

BREATHER_DEFINE_ERROR(ConvergenceFailure, Convergence);

#undef BREATHER_DEFINE_ERROR

/// 0 ok, 2 config, 3 numerical guard, 4 convergence gate.
inline int exit_code_for(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::Config: return 2;
    case ErrorClass::Numerical: return 3;
    case ErrorClass::Convergence: return 4;
  }
  return 1;
}

}  // namespace breather
