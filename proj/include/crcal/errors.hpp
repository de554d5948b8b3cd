#pragma once

#include <stdexcept>
#include <string>

namespace crcal {

// Base class for all crcal exceptions.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configuration value is out of its physical domain; message names the field.
struct ConfigInvalid : Error {
  using Error::Error;
};

// A perturbative denominator (detuning or detuning +/- anharmonicity) is too
// close to zero for the closed-form coupling expressions to be meaningful.
struct DegenerateDetuning : Error {
  using Error::Error;
};

// Time step too coarse for the fastest frequency present in the problem.
struct StepTooLarge : Error {
  using Error::Error;
};

// A parameter sweep's fitted zero/target crossing lies outside the swept range.
struct CrossingOutOfRange : Error {
  using Error::Error;
};

// The process-tomography design matrix could not be inverted reliably.
struct ReconstructionIllConditioned : Error {
  using Error::Error;
};

// An exponential-decay fit could not produce a usable decay constant.
struct FitFailure : Error {
  using Error::Error;
};

// Interleaved/reference decay ratio is undefined (reference decay ~ 0).
struct DivisionDegenerate : Error {
  using Error::Error;
};

// An operation requiring a converged calibration was called without one.
struct NotConverged : Error {
  using Error::Error;
};

// A pipeline stage failed; message carries the stage name and the cause.
struct StageFailed : Error {
  using Error::Error;
};

}  // namespace crcal
