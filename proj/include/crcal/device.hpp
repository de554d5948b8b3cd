#pragma once

#include <complex>

#include "crcal/effective.hpp"

namespace crcal {

struct DriveSettings;  // pulse.hpp

// One fixed-frequency transmon. Frequencies are ordinary frequencies (Hz,
// i.e. omega/2pi); times are seconds. Anharmonicity is negative for a
// transmon-like oscillator.
struct TransmonParams {
  double frequency = 0;       // 0-1 transition frequency, Hz
  double anharmonicity = 0;   // Hz, < 0
  double t1 = 0;              // relaxation time, s (0 disables relaxation)
  double t2 = 0;              // total dephasing time, s (0 disables dephasing)
};

// Linear distortion of the drive line: first-order low-pass ring-up plus a
// constant phase offset applied while the envelope is ramping.
struct LineDistortion {
  double ringup_time = 0;       // s; 0 = no filtering
  double edge_phase_error = 0;  // rad added to the envelope phase during ramps
};

// Ground truth for the simulated two-transmon device. Q1 is the control
// (driven at the target's frequency for the cross-resonance interaction),
// Q2 is the target. m12/phi describe classical leakage of the control drive
// line onto the target, as a fraction of the drive amplitude and a relative
// phase. The calibration routines may only observe this object through
// simulated measurements.
struct DeviceConfig {
  TransmonParams q1;     // control
  TransmonParams q2;     // target
  double j = 0;          // exchange coupling, Hz
  double m12 = 0;        // classical cross-talk fraction, dimensionless
  double phi = 0;        // classical cross-talk phase, rad
  LineDistortion distortion;
  int levels = 3;        // simulated levels per transmon

  // Throws ConfigInvalid naming the offending field.
  void validate() const;
};

// Perturbative interaction parameters of the coupled pair.
struct DerivedCouplings {
  double mu = 0;       // ZX strength per unit drive amplitude (dimensionless)
  double nu = 0;       // IX (quantum cross-talk) per unit drive, signed
  double epsilon = 0;  // static ZZ rate, Hz
  double delta12 = 0;  // control-target detuning, Hz
};

// Control-minus-target detuning, Hz. Never throws.
double detuning(const DeviceConfig& cfg);

// Closed-form mu, nu, epsilon from frequencies, anharmonicities and J.
// Throws DegenerateDetuning when a perturbative denominator is below 1 kHz.
DerivedCouplings derived_couplings(const DeviceConfig& cfg);

// Model prediction of all effective Hamiltonian coefficients (Hz) for the
// given drive settings, valid in the perturbative regime. Sets
// low_confidence when the drive amplitude exceeds a tenth of the detuning.
EffectiveHamiltonian predicted_effective_hamiltonian(const DeviceConfig& cfg,
                                                     const DriveSettings& drive);

// Cancellation tone (amplitude >= 0, phase) that nulls the predicted IX/IY
// terms for the given CR drive: the closed-form perfect-cancellation point.
std::pair<double, double> predicted_cancellation(const DeviceConfig& cfg,
                                                 double cr_amp, double cr_phase);

}  // namespace crcal
