#pragma once

#include "crcal/device.hpp"
#include "crcal/dynamics.hpp"
#include "crcal/pulse.hpp"

namespace crcal {

enum class GateKind { half_cr, echoed_zx };

// Control-qubit pi-pulse used by the echo scheme: a resonant raised-cosine
// tone whose area is fixed to a pi rotation on the 0-1 transition. The ideal
// flag swaps it for an instantaneous error-free flip (unit tests).
struct XpiSettings {
  double duration = 40e-9;
  double ramp_time = 8e-9;
  bool ideal = false;

  // Peak amplitude (Hz) giving an exact pi area for the raised-cosine shape.
  double amp() const { return 0.5 / (duration - ramp_time); }
};

// A playable two-qubit gate. half_cr is a single CR(+cancellation) pulse of
// length drive.gate_time/2 (a quarter-turn gate); echoed_zx is the full echo
// sequence CR(t/2, phase) -> X_pi -> CR(t/2, phase+pi) -> X_pi implementing a
// half-turn. Composers add pi to both tone phases so the calibrated positive
// rotation rate realizes the negative-angle target convention.
struct GateSpec {
  GateKind kind = GateKind::echoed_zx;
  DriveSettings drive;
  XpiSettings x_pi;

  // Total wall-clock duration including echo pulses, s.
  double duration() const;
};

GateSpec compose_half(const DriveSettings& drive, const XpiSettings& x_pi = {});
GateSpec compose_echo(const DriveSettings& drive, const XpiSettings& x_pi = {});

// Realizes the gate as envelopes on the shared timeline, applying the
// device's line distortion to the composed CR and cancellation waveforms
// (the echo pi-pulses use a separate carrier and are left undistorted).
PulseProgram gate_program(const DeviceConfig& cfg, const GateSpec& gate);

// Ideal 4x4 unitary exp(-i * angle * ZX / 2) on control(x)target ordering.
Mat ideal_zx(double angle);

}  // namespace crcal
