#include "crcal/pulse.hpp"

#include <algorithm>
#include <cmath>

#include "crcal/errors.hpp"
#include "crcal/linalg.hpp"

namespace crcal {

double DriveSettings::cancel_x() const {
  return cancel_amp * std::cos(cancel_phase);
}

double DriveSettings::cancel_y() const {
  return cancel_amp * std::sin(cancel_phase);
}

void DriveSettings::set_cancel_xy(double x, double y) {
  cancel_amp = std::hypot(x, y);
  cancel_phase = cancel_amp > 0 ? std::atan2(y, x) : 0.0;
}

PulseEnvelope PulseEnvelope::tone(double amp, double phase, double duration,
                                  double ramp_time) {
  if (duration <= 0) throw ConfigInvalid("pulse duration must be positive");
  if (amp < 0) throw ConfigInvalid("pulse amplitude must be non-negative");
  if (ramp_time < 0) throw ConfigInvalid("ramp time must be non-negative");
  PulseEnvelope env;
  const double r = std::min(ramp_time, duration / 2);
  if (r > 0) env.segments_.push_back({r, SegmentShape::ramp_up, amp, phase});
  const double flat = duration - 2 * r;
  if (flat > 0) env.segments_.push_back({flat, SegmentShape::flat, amp, phase});
  if (r > 0) env.segments_.push_back({r, SegmentShape::ramp_down, amp, phase});
  env.duration_ = duration;
  return env;
}

void PulseEnvelope::append(const PulseSegment& seg) {
  if (seg.duration <= 0) throw ConfigInvalid("segment duration must be positive");
  if (seg.amp < 0) throw ConfigInvalid("segment amplitude must be non-negative");
  if (!samples_.empty())
    throw ConfigInvalid("cannot append segments to a sampled envelope");
  segments_.push_back(seg);
  duration_ += seg.duration;
}

void PulseEnvelope::append_gap(double duration) {
  append({duration, SegmentShape::gap, 0.0, 0.0});
}

void PulseEnvelope::append_tone(double amp, double phase, double duration,
                                double ramp_time) {
  const PulseEnvelope t = tone(amp, phase, duration, ramp_time);
  for (const auto& seg : t.segments_) append(seg);
}

void PulseEnvelope::set_samples(double dt, std::vector<cd> samples) {
  if (dt <= 0) throw ConfigInvalid("sample spacing must be positive");
  if (samples.size() < 2) throw ConfigInvalid("need at least two samples");
  segments_.clear();
  sample_dt_ = dt;
  samples_ = std::move(samples);
  duration_ = sample_dt_ * static_cast<double>(samples_.size() - 1);
}

double PulseEnvelope::peak_amp() const {
  double peak = 0;
  for (const auto& seg : segments_) peak = std::max(peak, seg.amp);
  for (const auto& s : samples_) peak = std::max(peak, std::abs(s));
  return peak;
}

cd PulseEnvelope::value(double t) const {
  if (t < 0 || t > duration_ || empty()) return cd(0, 0);
  if (!samples_.empty()) {
    // Linear interpolation on the sample grid.
    const double x = t / sample_dt_;
    const auto n = static_cast<std::size_t>(x);
    if (n + 1 >= samples_.size()) return samples_.back();
    const double w = x - static_cast<double>(n);
    return samples_[n] * (1.0 - w) + samples_[n + 1] * w;
  }
  double start = 0;
  for (const auto& seg : segments_) {
    if (t <= start + seg.duration) {
      const double local = t - start;
      double shape = 0;
      switch (seg.shape) {
        case SegmentShape::flat:
          shape = 1;
          break;
        case SegmentShape::ramp_up:
          shape = 0.5 * (1 - std::cos(pi * local / seg.duration));
          break;
        case SegmentShape::ramp_down:
          shape = 0.5 * (1 + std::cos(pi * local / seg.duration));
          break;
        case SegmentShape::gap:
          shape = 0;
          break;
      }
      return seg.amp * shape * std::exp(iu * seg.phase);
    }
    start += seg.duration;
  }
  return cd(0, 0);
}

namespace {

// True while t sits inside a rising or falling edge of a segment envelope.
bool in_edge(const PulseEnvelope& env, double t) {
  double start = 0;
  for (const auto& seg : env.segments()) {
    if (t <= start + seg.duration)
      return seg.shape == SegmentShape::ramp_up ||
             seg.shape == SegmentShape::ramp_down;
    start += seg.duration;
  }
  return false;
}

}  // namespace

double ringdown_window(const LineDistortion& d) {
  // Six time constants leave the residual amplitude below e^-6 ~ 0.25%.
  return d.ringup_time > 0 ? 6 * d.ringup_time : 0.0;
}

PulseEnvelope apply_distortion(const PulseEnvelope& env,
                               const LineDistortion& distortion,
                               double sample_dt) {
  if (env.empty()) return env;
  const double tau = distortion.ringup_time;
  const double beta = distortion.edge_phase_error;
  if (tau <= 0 && beta == 0) return env;

  double dt = sample_dt;
  if (dt <= 0) {
    // Resolve the fastest feature: the filter time constant and any ramp.
    double feature = env.duration();
    if (tau > 0) feature = std::min(feature, tau);
    for (const auto& seg : env.segments()) {
      if (seg.shape != SegmentShape::flat && seg.shape != SegmentShape::gap)
        feature = std::min(feature, seg.duration);
    }
    dt = std::max(feature / 64, env.duration() / 65536);
  }

  const auto n_steps = static_cast<std::size_t>(
      std::ceil(env.duration() / dt - 1e-9));
  dt = env.duration() / static_cast<double>(n_steps);

  auto input = [&](double t) {
    cd u = env.value(t);
    if (beta != 0 && in_edge(env, t)) u *= std::exp(iu * beta);
    return u;
  };

  std::vector<cd> out(n_steps + 1);
  if (tau <= 0) {
    for (std::size_t n = 0; n <= n_steps; ++n)
      out[n] = input(static_cast<double>(n) * dt);
  } else {
    // First-order low-pass response; the line starts quiet.  Programs append
    // a ringdown_window gap after the last pulse so the tail can settle.
    const double alpha = std::exp(-dt / tau);
    out[0] = cd(0, 0);
    for (std::size_t n = 0; n < n_steps; ++n) {
      const cd u = input((static_cast<double>(n) + 0.5) * dt);
      out[n + 1] = alpha * out[n] + (1 - alpha) * u;
    }
  }

  PulseEnvelope result;
  result.set_samples(dt, std::move(out));
  return result;
}

}  // namespace crcal
