#pragma once

#include <stdexcept>
#include <string>

namespace fewbose {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// delta_mu * DeltaB and a_bg must carry the same sign.
struct SignMismatch : ConfigError {
  using ConfigError::ConfigError;
};

// a_bg = b*sqrt(pi): the coupling derivation is singular.
struct SingularBackground : ConfigError {
  using ConfigError::ConfigError;
};

struct PoleAtResonance : NumericalError {
  using NumericalError::NumericalError;
};

// Bare-molecule pole of the two-body amplitude bracket.
struct ChannelPole : NumericalError {
  using NumericalError::NumericalError;
};

// Denominator of the angular kernel vanishes inside u in [-1,1].
struct ThresholdSingular : NumericalError {
  using NumericalError::NumericalError;
};

struct NoShallowDimer : NumericalError {
  using NumericalError::NumericalError;
};

struct ShallowDimerPresent : NumericalError {
  using NumericalError::NumericalError;
};

struct PoleOffGrid : NumericalError {
  using NumericalError::NumericalError;
};

struct FitDivergence : NumericalError {
  using NumericalError::NumericalError;
};

struct LostBranch : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace fewbose
