#include "crcal/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "crcal/errors.hpp"
#include "crcal/fitting.hpp"

namespace crcal {

double apply_shot_noise(double expectation, int shots, std::mt19937_64& rng) {
  if (shots < 1) throw ConfigInvalid("shots must be at least 1");
  const double p = std::clamp((1 + expectation) / 2, 0.0, 1.0);
  std::binomial_distribution<int> dist(shots, p);
  return 2.0 * dist(rng) / shots - 1.0;
}

namespace {

QuantumState prepared_state(const DeviceConfig& cfg, int control_prep,
                            const AcquireOptions& opts) {
  if (control_prep != 0 && control_prep != 1)
    throw ConfigInvalid("control_prep must be 0 or 1");
  const HilbertSpace space{cfg.levels};
  return pure_product(space, control_prep == 0 ? 1.0 : 0.0,
                      control_prep == 0 ? 0.0 : 1.0, opts.target0, opts.target1);
}

void record_point(BlochTrajectory& out, const QuantumState& state, double tick,
                  const AcquireOptions& opts, std::mt19937_64& rng) {
  PauliReading rx = measure_pauli(state, Qubit::target, 'x');
  PauliReading ry = measure_pauli(state, Qubit::target, 'y');
  PauliReading rz = measure_pauli(state, Qubit::target, 'z');
  double x = rx.value, y = ry.value, z = rz.value;
  if (opts.shots > 0) {
    x = apply_shot_noise(x, opts.shots, rng);
    y = apply_shot_noise(y, opts.shots, rng);
    z = apply_shot_noise(z, opts.shots, rng);
  }
  out.ticks.push_back(tick);
  out.x.push_back(x);
  out.y.push_back(y);
  out.z.push_back(z);
  out.leakage.push_back(rx.leakage);
}

}  // namespace

BlochTrajectory acquire_continuous(const DeviceConfig& cfg,
                                   const DriveSettings& drive, int control_prep,
                                   const std::vector<double>& times,
                                   const AcquireOptions& opts) {
  if (times.empty()) throw ConfigInvalid("times must be non-empty");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0 || (k > 0 && times[k] <= times[k - 1]))
      throw ConfigInvalid("times must be non-negative and strictly increasing");
  }
  const QuantumState initial = prepared_state(cfg, control_prep, opts);
  const Propagation prop =
      make_propagation(cfg, std::max(drive.cr_amp, drive.cancel_amp), opts.noise,
                       opts.step_cycles);
  std::mt19937_64 rng(opts.seed);

  BlochTrajectory out;
  out.control_prep = control_prep;
  out.per_gate = false;
  for (double t : times) {
    if (t <= 0) {
      record_point(out, initial, t, opts, rng);
      continue;
    }
    const PulseProgram program = cr_program(cfg, drive, t);
    const QuantumState state = propagate(cfg, program, initial, prop);
    record_point(out, state, t, opts, rng);
  }
  return out;
}

BlochTrajectory acquire_repeated(const DeviceConfig& cfg, const GateSpec& gate,
                                 int control_prep, const std::vector<int>& counts,
                                 const AcquireOptions& opts) {
  if (counts.empty()) throw ConfigInvalid("counts must be non-empty");
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0 || (k > 0 && counts[k] <= counts[k - 1]))
      throw ConfigInvalid("counts must be non-negative and strictly increasing");
  }
  const HilbertSpace space{cfg.levels};
  const PulseProgram program = gate_program(cfg, gate);
  const Propagation prop = make_propagation(
      cfg,
      std::max({gate.drive.cr_amp, gate.drive.cancel_amp,
                gate.x_pi.ideal ? 0.0 : gate.x_pi.amp()}),
      opts.noise, opts.step_cycles);
  std::mt19937_64 rng(opts.seed);

  // One simulation of the gate, then repeated application of its channel.
  QuantumState state = prepared_state(cfg, control_prep, opts);
  Mat u, s;
  if (opts.noise == NoiseMode::unitary)
    u = pulse_unitary(cfg, program, prop, space);
  else
    s = pulse_superop(cfg, program, prop, space);

  BlochTrajectory out;
  out.control_prep = control_prep;
  out.per_gate = true;
  std::size_t next = 0;
  for (int n = 0; next < counts.size(); ++n) {
    if (n == counts[next]) {
      record_point(out, state, double(n), opts, rng);
      ++next;
      if (next == counts.size()) break;
    }
    if (opts.noise == NoiseMode::unitary)
      state.rho = u * state.rho * u.adjoint();
    else
      state.rho = unvectorize(s * vectorize(state.rho), space.dim());
  }
  return out;
}

namespace {

Eigen::Vector3d rodrigues(const Eigen::Vector3d& axis, double angle,
                          const Eigen::Vector3d& r) {
  const double c = std::cos(angle), s = std::sin(angle);
  return r * c + axis.cross(r) * s + axis * (axis.dot(r) * (1 - c));
}

Eigen::Vector3d axis_from_angles(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

// Crude rotation-axis estimate from r x dr accumulated along the trajectory.
Eigen::Vector3d estimate_axis(const std::vector<Eigen::Vector3d>& r) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (std::size_t k = 1; k < r.size(); ++k) acc += r[k - 1].cross(r[k]);
  const double n = acc.norm();
  return n > 1e-12 ? Eigen::Vector3d(acc / n) : Eigen::Vector3d(0, 0, 1);
}

}  // namespace

RotationFit fit_rotation(const BlochTrajectory& traj, double expected_rate) {
  const std::size_t n = traj.ticks.size();
  if (n != traj.x.size() || n != traj.y.size() || n != traj.z.size())
    throw ConfigInvalid("trajectory component lengths differ");
  if (n < 4) throw FitFailure("rotation fit needs at least 4 points");

  std::vector<Eigen::Vector3d> r(n);
  for (std::size_t k = 0; k < n; ++k) r[k] = {traj.x[k], traj.y[k], traj.z[k]};

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& v : r) mean += v;
  mean /= double(n);
  Eigen::Vector3d var = Eigen::Vector3d::Zero();
  for (const auto& v : r) var += (v - mean).cwiseAbs2();
  var /= double(n);

  RotationFit fit;
  if (var.maxCoeff() < 1e-4) {
    // No resolvable rotation: flat trajectory convention.
    fit.axis = {0, 0, 1};
    fit.rate = 0;
    fit.offset = r.front();
    double ss = 0;
    for (const auto& v : r) ss += (v - mean).squaredNorm();
    fit.residual = std::sqrt(ss / double(3 * n));
    fit.degenerate = true;
    return fit;
  }

  // Normalized time: fit in cycles per span, convert back at the end.
  const double t0 = traj.ticks.front();
  const double span = traj.ticks.back() - t0;
  if (span <= 0) throw FitFailure("trajectory spans zero time");
  std::vector<double> tau(n);
  for (std::size_t k = 0; k < n; ++k) tau[k] = (traj.ticks[k] - t0) / span;

  const bool bounded = traj.per_gate;  // alias-free window in cycles/gate

  auto residuals = [&](const Eigen::VectorXd& p) {
    const Eigen::Vector3d axis = axis_from_angles(p[0], p[1]);
    const Eigen::Vector3d r0(p[3], p[4], p[5]);
    Eigen::VectorXd res(3 * n + 1);
    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::Vector3d m = rodrigues(axis, two_pi * p[2] * tau[k], r0);
      res.segment<3>(3 * k) = m - r[k];
    }
    // Soft wall at the alias-free boundary for repetition-count data:
    // p[2] is cycles per span, so cycles per gate is p[2]/span.
    res[3 * n] =
        bounded ? 1e3 * std::max(0.0, std::abs(p[2]) / span - 0.5) : 0.0;
    return res;
  };

  // Seeds: Fourier peak of the liveliest component, both signs, plus the
  // caller's expectation.
  const std::vector<double>* best_series = &traj.z;
  if (var.x() > var.z() && var.x() >= var.y()) best_series = &traj.x;
  else if (var.y() > var.z()) best_series = &traj.y;
  const double f_sample = dominant_frequency(*best_series);  // cycles/sample
  const double f_span = f_sample * double(n - 1);            // cycles/span
  std::vector<double> rate_seeds;
  if (f_span > 0) {
    rate_seeds.push_back(f_span);
    rate_seeds.push_back(-f_span);
  }
  if (expected_rate != 0) {
    rate_seeds.push_back(expected_rate * span);
    rate_seeds.push_back(-expected_rate * span);
  }
  if (rate_seeds.empty()) rate_seeds = {0.5, -0.5};

  const Eigen::Vector3d axis0 = estimate_axis(r);
  const double th0 = std::acos(std::clamp(axis0.z(), -1.0, 1.0));
  const double ph0 = std::atan2(axis0.y(), axis0.x());

  LmResult best;
  best.cost = std::numeric_limits<double>::infinity();
  for (double seed : rate_seeds) {
    Eigen::VectorXd p(6);
    p << th0, ph0, seed, r.front().x(), r.front().y(), r.front().z();
    const LmResult res = fit_least_squares(residuals, p);
    if (res.cost < best.cost) best = res;
  }

  const Eigen::VectorXd& p = best.params;
  fit.axis = axis_from_angles(p[0], p[1]);
  fit.rate = p[2] / span;  // cycles per tick unit
  fit.offset = {p[3], p[4], p[5]};
  fit.residual = std::sqrt(best.cost / double(3 * n));
  fit.degenerate = false;

  // (rate, axis) and (-rate, -axis) describe the same rotation; report the
  // representative whose dominant axis component is positive.
  int dom = 0;
  fit.axis.cwiseAbs().maxCoeff(&dom);
  if (fit.axis[dom] < 0) {
    fit.axis = -fit.axis;
    fit.rate = -fit.rate;
  }
  return fit;
}

EffectiveHamiltonian hamiltonian_tomography(const BlochTrajectory& traj0,
                                            const BlochTrajectory& traj1,
                                            double expected_rate) {
  if (traj0.control_prep != 0 || traj1.control_prep != 1)
    throw ConfigInvalid("tomography needs control preps 0 and 1 in order");
  if (traj0.per_gate != traj1.per_gate)
    throw ConfigInvalid("tomography trajectories mix tick units");

  const RotationFit f0 = fit_rotation(traj0, expected_rate);
  const RotationFit f1 = fit_rotation(traj1, expected_rate);
  const Eigen::Vector3d w0 = f0.rate * f0.axis;
  const Eigen::Vector3d w1 = f1.rate * f1.axis;

  EffectiveHamiltonian eh;
  eh.unit = traj0.per_gate ? RateUnit::per_gate : RateUnit::per_second;
  eh.zx = (w0.x() - w1.x()) / 2;
  eh.ix = (w0.x() + w1.x()) / 2;
  eh.zy = (w0.y() - w1.y()) / 2;
  eh.iy = (w0.y() + w1.y()) / 2;
  eh.zz = (w0.z() - w1.z()) / 2;
  eh.iz = (w0.z() + w1.z()) / 2;
  eh.low_confidence = f0.degenerate || f1.degenerate;
  return eh;
}

void write_trajectory_csv(std::ostream& os, const BlochTrajectory& traj) {
  os << "tick,x,y,z,leakage\n";
  char line[256];
  for (std::size_t k = 0; k < traj.ticks.size(); ++k) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  traj.ticks[k], traj.x[k], traj.y[k], traj.z[k],
                  traj.leakage[k]);
    os << line;
  }
}

}  // namespace crcal
