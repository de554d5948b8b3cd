#include "crcal/gates.hpp"

#include <algorithm>
#include <cmath>

#include "crcal/errors.hpp"

namespace crcal {

double GateSpec::duration() const {
  const double cr_total = drive.gate_time;
  if (kind == GateKind::half_cr) return cr_total / 2;
  return cr_total + (x_pi.ideal ? 0.0 : 2 * x_pi.duration);
}

namespace {

// Calibration converges to a positive zx rate; the composed gates realize the
// negative-angle targets, which is a pi offset on every tone.
DriveSettings negate_drive(const DriveSettings& drive) {
  DriveSettings d = drive;
  d.cr_phase += pi;
  d.cancel_phase += pi;
  return d;
}

Mat control_flip(int levels) {
  Mat p = Mat::Identity(levels, levels);
  p(0, 0) = p(1, 1) = 0;
  p(0, 1) = p(1, 0) = 1;
  return kron(p, Mat::Identity(levels, levels));
}

}  // namespace

GateSpec compose_half(const DriveSettings& drive, const XpiSettings& x_pi) {
  GateSpec g;
  g.kind = GateKind::half_cr;
  g.drive = negate_drive(drive);
  g.x_pi = x_pi;
  return g;
}

GateSpec compose_echo(const DriveSettings& drive, const XpiSettings& x_pi) {
  GateSpec g;
  g.kind = GateKind::echoed_zx;
  g.drive = negate_drive(drive);
  g.x_pi = x_pi;
  return g;
}

PulseProgram gate_program(const DeviceConfig& cfg, const GateSpec& gate) {
  const DriveSettings& d = gate.drive;
  if (d.gate_time <= 0) throw ConfigInvalid("gate_time must be positive");
  const double tcr = d.gate_time / 2;
  const double ramp = d.ramp_time;

  const double tail = ringdown_window(cfg.distortion);
  PulseProgram p;
  if (gate.kind == GateKind::half_cr) {
    p.duration = tcr + tail;
    auto padded = [&](double amp, double phase) {
      auto env = PulseEnvelope::tone(amp, phase, tcr, ramp);
      if (tail > 0) env.append_gap(tail);
      return apply_distortion(env, cfg.distortion);
    };
    p.cr = padded(d.cr_amp, d.cr_phase);
    if (d.cancel_amp > 0) p.cancel = padded(d.cancel_amp, d.cancel_phase);
    return p;
  }

  const bool ideal = gate.x_pi.ideal;
  const double xd = ideal ? 0.0 : gate.x_pi.duration;
  if (!ideal && gate.x_pi.duration <= gate.x_pi.ramp_time)
    throw ConfigInvalid("x_pi duration must exceed its ramp time");
  // Windows after each half: the echo pulse duration, or with ideal echo
  // pulses just the line's settling time, so a flip never lands on a hot
  // line (flipping the control while the drive still rings scrambles the
  // virtually occupied second level).  The trailing window is stretched to
  // the ring-down when the echo pulse alone is shorter.
  const double mid_gap = ideal ? tail : xd;
  const double end_gap = ideal ? tail : std::max(xd, tail);
  p.duration = 2 * tcr + mid_gap + end_gap;

  // CR and cancellation waveforms: two negated halves with windows left for
  // the echo pulses; the line distortion acts on the composed waveform, so
  // ring-down spills across the windows as it would on hardware.
  auto composed = [&](double amp, double phase) {
    PulseEnvelope env;
    env.append_tone(amp, phase, tcr, ramp);
    if (mid_gap > 0) env.append_gap(mid_gap);
    env.append_tone(amp, phase + pi, tcr, ramp);
    if (end_gap > 0) env.append_gap(end_gap);
    return apply_distortion(env, cfg.distortion);
  };
  p.cr = composed(d.cr_amp, d.cr_phase);
  if (d.cancel_amp > 0) p.cancel = composed(d.cancel_amp, d.cancel_phase);

  if (ideal) {
    const Mat flip = control_flip(cfg.levels);
    p.instants.push_back({tcr + mid_gap, flip});
    p.instants.push_back({p.duration, flip});
  } else {
    PulseEnvelope xpi;
    xpi.append_gap(tcr);
    xpi.append_tone(gate.x_pi.amp(), 0.0, xd, gate.x_pi.ramp_time);
    xpi.append_gap(tcr);
    xpi.append_tone(gate.x_pi.amp(), 0.0, xd, gate.x_pi.ramp_time);
    p.xpi = xpi;
  }
  return p;
}

Mat ideal_zx(double angle) {
  // exp(-i angle/2 * ZX), control-first ordering.
  return expm_hermitian(pauli2(13), angle / 2);
}

}  // namespace crcal
