#pragma once

#include <complex>
#include <vector>

#include "crcal/device.hpp"

namespace crcal {

// Tunable drive parameters produced by calibration. Amplitudes are peak Rabi
// rates in Hz (a resonant tone of amplitude A drives a two-level rotation at
// angular rate 2*pi*A); phases are radians in the target's rotating frame.
struct DriveSettings {
  double cr_amp = 0;        // CR tone on the control at the target frequency
  double cr_phase = 0;
  double cancel_amp = 0;    // cancellation tone applied directly to the target
  double cancel_phase = 0;
  double gate_time = 0;     // full echoed-gate CR duration, s
  double ramp_time = 5e-9;  // raised-cosine edge duration, s

  // In-phase/quadrature view of the cancellation tone, Hz.
  double cancel_x() const;
  double cancel_y() const;
  void set_cancel_xy(double x, double y);
};

enum class SegmentShape { flat, ramp_up, ramp_down, gap };

struct PulseSegment {
  double duration = 0;        // s
  SegmentShape shape = SegmentShape::gap;
  double amp = 0;             // Hz
  double phase = 0;           // rad
};

// Piecewise pulse envelope. Starts in segment form; after line distortion it
// carries a uniformly sampled complex-amplitude table instead. value(t)
// returns the instantaneous complex amplitude amp*exp(i*phase) in Hz.
class PulseEnvelope {
 public:
  PulseEnvelope() = default;

  // Conventional tone: cosine ramp up, flat plateau, cosine ramp down.
  // Ramps are clamped to half the duration when the pulse is short.
  static PulseEnvelope tone(double amp, double phase, double duration,
                            double ramp_time);

  void append(const PulseSegment& seg);
  void append_gap(double duration);
  void append_tone(double amp, double phase, double duration, double ramp_time);

  double duration() const { return duration_; }
  bool empty() const { return segments_.empty() && samples_.empty(); }
  bool sampled() const { return sample_dt_ > 0; }
  double peak_amp() const;
  std::complex<double> value(double t) const;

  const std::vector<PulseSegment>& segments() const { return segments_; }

  // Replaces the content with a uniform sample table (internal + distortion).
  void set_samples(double dt, std::vector<std::complex<double>> samples);
  double sample_dt() const { return sample_dt_; }
  const std::vector<std::complex<double>>& samples() const { return samples_; }

 private:
  std::vector<PulseSegment> segments_;
  double duration_ = 0;
  double sample_dt_ = 0;
  std::vector<std::complex<double>> samples_;
};

// Applies the line response to an envelope: the complex amplitude is passed
// through a first-order low-pass exp(-t/ringup)/ringup, and the constant
// edge phase offset is applied to the input during ramp segments. The output
// is resampled (truncated at the nominal pulse end); zero distortion returns
// the input unchanged.
// Settling window a program should leave after its last pulse so the
// filtered line rings down instead of being cut mid-tail (0 when clean).
double ringdown_window(const LineDistortion& d);

PulseEnvelope apply_distortion(const PulseEnvelope& env, const LineDistortion& d,
                               double sample_dt = 0);

}  // namespace crcal
