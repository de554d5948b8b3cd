#include "crcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "crcal/errors.hpp"
#include "crcal/fitting.hpp"

namespace crcal {

const char* sweep_kind_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::global_phase: return "global-phase";
    case SweepKind::global_amp: return "global-amp";
    case SweepKind::cancel_x: return "cancel-x";
    case SweepKind::cancel_y: return "cancel-y";
  }
  return "?";
}

std::vector<double> default_times(double target_rate, int n, double periods) {
  if (target_rate <= 0) throw ConfigInvalid("target_rate must be positive");
  if (n < 8) throw ConfigInvalid("need at least 8 time points");
  const double total = periods / target_rate;
  std::vector<double> times(n);
  for (int k = 0; k < n; ++k) times[k] = total * k / (n - 1);
  return times;
}

std::vector<int> default_counts(int n_max) {
  if (n_max < 4) throw ConfigInvalid("need repetition counts up to at least 4");
  std::vector<int> counts(n_max + 1);
  for (int k = 0; k <= n_max; ++k) counts[k] = k;
  return counts;
}

namespace {

void logf(CalibrationSession& s, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  s.log.emplace_back(buf);
}

double wrap_angle(double a) {
  while (a > pi) a -= two_pi;
  while (a <= -pi) a += two_pi;
  return a;
}

}  // namespace

CalibrationSession make_session(TrajectorySource& source, double target_rate,
                                const DriveSettings& initial) {
  CalibrationSession s;
  s.source = &source;
  s.target_rate = target_rate;
  s.drive = initial;
  if (s.drive.gate_time <= 0)
    s.drive.gate_time = 0.25 / target_rate;  // half-turn echoed gate
  s.times = default_times(target_rate);
  s.counts = default_counts();
  return s;
}

CalibrationSession& cancel_crosstalk(CalibrationSession& session) {
  if (!session.source) throw ConfigInvalid("session has no trajectory source");
  if (session.target_rate <= 0) throw ConfigInvalid("target_rate must be positive");
  if (session.drive.cr_amp <= 0) throw ConfigInvalid("initial cr_amp must be positive");

  session.converged = false;
  for (int iter = 0; iter < session.max_iters; ++iter) {
    const BlochTrajectory t0 =
        session.source->continuous(session.drive, 0, session.times);
    const BlochTrajectory t1 =
        session.source->continuous(session.drive, 1, session.times);
    const EffectiveHamiltonian eh =
        hamiltonian_tomography(t0, t1, session.target_rate);
    session.tomo_history.push_back({iter, eh});
    logf(session, "tomo iter=%d zx=%.6g zy=%.6g ix=%.6g iy=%.6g zz=%.6g", iter,
         eh.zx, eh.zy, eh.ix, eh.iy, eh.zz);

    const double r = std::hypot(eh.zx, eh.zy);
    const double scale = std::abs(eh.zx);
    if (scale < 1e-3 * session.target_rate || eh.low_confidence) {
      logf(session, "tomography lost the interaction; stopping");
      break;
    }
    const double tol = session.tol;
    if (std::abs(eh.zy) < tol * scale && std::abs(eh.ix) < tol * scale &&
        std::abs(eh.iy) < tol * scale &&
        std::abs(eh.zx - session.target_rate) < tol * session.target_rate) {
      session.converged = true;
      logf(session, "converged after %d iterations", iter + 1);
      break;
    }

    // Align the drive phase, rescale to the target rate, and move the
    // residual target-axis field into the cancellation tone. Every source of
    // that field is linear in the drive, so it co-rotates and co-scales; the
    // rescale is clamped so a saturated response cannot run the drive away.
    const double delta = -std::atan2(eh.zy, eh.zx);
    const double s = std::clamp(session.target_rate / r, 0.5, 2.0);
    const double cx = session.drive.cancel_x() - eh.ix;
    const double cy = session.drive.cancel_y() - eh.iy;
    session.drive.cr_phase = wrap_angle(session.drive.cr_phase + delta);
    session.drive.cr_amp *= s;
    session.drive.set_cancel_xy(
        s * (cx * std::cos(delta) - cy * std::sin(delta)),
        s * (cx * std::sin(delta) + cy * std::cos(delta)));
    session.drive.cancel_phase = wrap_angle(session.drive.cancel_phase);
    logf(session,
         "update phase+=%.6g amp*=%.6g cancel=(%.6g, %.6g)", delta, s,
         session.drive.cancel_x(), session.drive.cancel_y());
  }
  if (!session.converged) logf(session, "cancellation did not converge");
  return session;
}

std::pair<double, double> extract_classical_crosstalk(
    const CalibrationSession& session, const DerivedCouplings& couplings) {
  if (!session.converged)
    throw NotConverged("classical cross-talk extraction needs a converged loop");
  const double w12 = session.drive.cr_amp;
  const cd drive_vec = w12 * std::exp(iu * session.drive.cr_phase);
  const cd cancel_vec = session.drive.cancel_amp *
                        std::exp(iu * session.drive.cancel_phase);
  // At cancellation: cancel = -(quantum + classical); the exchange-mediated
  // part is known from the device's measured couplings.
  const cd classical = -cancel_vec - couplings.nu * drive_vec;
  const double m12 = std::abs(classical) / w12;
  const double isolation = m12 > 1e-12 ? 20 * std::log10(m12) : -240.0;
  return {m12, isolation};
}

namespace {

DriveSettings offset_drive(const DriveSettings& base, SweepKind kind, double v) {
  DriveSettings d = base;
  switch (kind) {
    case SweepKind::global_phase:
      d.cr_phase += v;
      d.cancel_phase += v;
      break;
    case SweepKind::global_amp: {
      if (base.cr_amp <= 0) throw ConfigInvalid("cr_amp must be positive");
      const double scale = (base.cr_amp + v) / base.cr_amp;
      d.cr_amp = base.cr_amp + v;
      d.cancel_amp = base.cancel_amp * scale;
      break;
    }
    case SweepKind::cancel_x:
      d.set_cancel_xy(base.cancel_x() + v, base.cancel_y());
      break;
    case SweepKind::cancel_y:
      d.set_cancel_xy(base.cancel_x(), base.cancel_y() + v);
      break;
  }
  return d;
}

double designated_coefficient(const EffectiveHamiltonian& eh, SweepKind kind) {
  switch (kind) {
    case SweepKind::global_phase: return eh.zy;
    case SweepKind::global_amp: return eh.zx;
    case SweepKind::cancel_x: return eh.ix;
    case SweepKind::cancel_y: return eh.iy;
  }
  return 0;
}

}  // namespace

SweepResult sweep_parameter(CalibrationSession& session, SweepKind kind,
                            double half_range, int n_points, GateKind scheme) {
  if (!session.source) throw ConfigInvalid("session has no trajectory source");
  if (n_points < 3) throw ConfigInvalid("sweep needs at least 3 points");
  if (half_range <= 0) throw ConfigInvalid("sweep range must be positive");

  SweepResult sweep;
  sweep.kind = kind;
  sweep.scheme = scheme;
  // The gate realizes the negative-angle convention, so the repetition-rate
  // targets are negative quarter/eighth turns.
  const double turns = scheme == GateKind::echoed_zx ? 0.25 : 0.125;
  sweep.target = kind == SweepKind::global_amp ? -turns : 0.0;

  for (int k = 0; k < n_points; ++k) {
    const double v = -half_range + 2 * half_range * k / (n_points - 1);
    const DriveSettings d = offset_drive(session.drive, kind, v);
    const GateSpec gate = scheme == GateKind::echoed_zx
                              ? compose_echo(d, session.x_pi)
                              : compose_half(d, session.x_pi);
    const BlochTrajectory t0 = session.source->repeated(gate, 0, session.counts);
    const BlochTrajectory t1 = session.source->repeated(gate, 1, session.counts);
    const EffectiveHamiltonian eh = hamiltonian_tomography(t0, t1, turns);
    sweep.values.push_back(v);
    sweep.coefficient.push_back(designated_coefficient(eh, kind));
  }

  const LineFit lf = fit_line(sweep.values, sweep.coefficient);
  sweep.slope = lf.slope;
  sweep.intercept = lf.intercept;
  sweep.r_squared = lf.r_squared;
  sweep.reliable = lf.r_squared > 0.9;
  if (std::abs(lf.slope) < 1e-12)
    throw CrossingOutOfRange("sweep coefficient does not respond to the parameter");
  sweep.update = (sweep.target - lf.intercept) / lf.slope;
  session.sweep_history.push_back(sweep);
  logf(session, "sweep %s scheme=%s slope=%.6g intercept=%.6g r2=%.4f update=%.6g",
       sweep_kind_name(kind),
       scheme == GateKind::echoed_zx ? "echoed" : "half", sweep.slope,
       sweep.intercept, sweep.r_squared, sweep.update);
  if (std::abs(sweep.update) > half_range * (1 + 1e-9)) {
    std::ostringstream msg;
    msg << "sweep " << sweep_kind_name(kind) << " crossing " << sweep.update
        << " lies outside +-" << half_range;
    throw CrossingOutOfRange(msg.str());
  }
  return sweep;
}

void apply_sweep_update(CalibrationSession& session, const SweepResult& sweep) {
  session.drive = offset_drive(session.drive, sweep.kind, sweep.update);
  session.drive.cr_phase = wrap_angle(session.drive.cr_phase);
  session.drive.cancel_phase = wrap_angle(session.drive.cancel_phase);
  logf(session, "applied %s update %.6g", sweep_kind_name(sweep.kind),
       sweep.update);
}

CalibrationSession& correct_transients(CalibrationSession& session,
                                       const TransientOptions& opts) {
  if (!session.converged)
    throw NotConverged("transient correction needs a converged cancellation");

  struct Step {
    SweepKind kind;
    GateKind scheme;
  };
  const Step steps[] = {
      {SweepKind::global_phase, GateKind::echoed_zx},
      {SweepKind::global_amp, GateKind::echoed_zx},
      {SweepKind::cancel_x, GateKind::half_cr},
      {SweepKind::cancel_y, GateKind::half_cr},
      {SweepKind::global_amp, GateKind::echoed_zx},
  };

  double predicted_gain = 0;
  for (const Step& step : steps) {
    double range = 0;
    switch (step.kind) {
      case SweepKind::global_phase:
        range = opts.phase_range;
        break;
      case SweepKind::global_amp:
        range = opts.amp_fraction * session.drive.cr_amp;
        break;
      case SweepKind::cancel_x:
      case SweepKind::cancel_y:
        range = std::max(opts.cancel_fraction * session.drive.cancel_amp,
                         0.02 * session.drive.cr_amp);
        break;
    }
    SweepResult sweep;
    try {
      sweep = sweep_parameter(session, step.kind, range, opts.n_points,
                              step.scheme);
    } catch (const CrossingOutOfRange&) {
      session.converged = false;
      logf(session, "transient correction aborted: crossing out of range");
      throw;
    }
    // Coherent error removed by this update, as average-fidelity gain.
    const double theta = two_pi * (sweep.intercept - sweep.target);
    predicted_gain += theta * theta / 5;
    apply_sweep_update(session, sweep);
  }
  logf(session, "transient correction done, predicted fidelity gain %.3g",
       predicted_gain);
  return session;
}

void write_session_log(std::ostream& os, const CalibrationSession& session) {
  for (const auto& line : session.log) os << line << "\n";
}

}  // namespace crcal
