#include "crcal/calibration.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "crcal/errors.hpp"
#include "crcal/fitting.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace crcal;
using testing::quiet_device;

namespace {

double wrap(double a) {
  while (a > pi) a -= two_pi;
  while (a <= -pi) a += two_pi;
  return a;
}

// Noise-free source that rotates the target Bloch vector per gate according
// to a caller-supplied effective-Hamiltonian model of the composed gate.
class LinearSource final : public TrajectorySource {
 public:
  std::function<EffectiveHamiltonian(const GateSpec&)> model;

  BlochTrajectory continuous(const DriveSettings&, int,
                             const std::vector<double>&) override {
    throw ConfigInvalid("linear source provides repeated data only");
  }

  BlochTrajectory repeated(const GateSpec& gate, int prep,
                           const std::vector<int>& counts) override {
    const EffectiveHamiltonian eh = model(gate);
    const double sign = prep == 0 ? 1.0 : -1.0;
    const Eigen::Vector3d omega(eh.ix + sign * eh.zx, eh.iy + sign * eh.zy,
                                eh.iz + sign * eh.zz);
    const double rate = omega.norm();
    const Eigen::Vector3d axis =
        rate > 0 ? omega.normalized() : Eigen::Vector3d(0, 0, 1);
    BlochTrajectory t;
    t.control_prep = prep;
    t.per_gate = true;
    for (int n : counts) {
      const double ang = two_pi * rate * n;
      const double c = std::cos(ang), s = std::sin(ang);
      const Eigen::Vector3d z(0, 0, 1);
      const Eigen::Vector3d r = z * c + axis.cross(z) * s + axis * (axis.dot(z) * (1 - c));
      t.ticks.push_back(n);
      t.x.push_back(r.x());
      t.y.push_back(r.y());
      t.z.push_back(r.z());
      t.leakage.push_back(0);
    }
    return t;
  }
};

}  // namespace

TEST_CASE("line fit recovers slope, intercept and goodness") {
  const std::vector<double> x{-2, -1, 0, 1, 2};
  std::vector<double> y;
  for (double v : x) y.push_back(3.5 * v - 0.25);
  const LineFit lf = fit_line(x, y);
  CHECK(lf.slope == doctest::Approx(3.5));
  CHECK(lf.intercept == doctest::Approx(-0.25));
  CHECK(lf.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line({1.0}, {2.0}), FitFailure);
  CHECK_THROWS_AS(fit_line({1, 1, 1}, {1, 2, 3}), FitFailure);
}

TEST_CASE("dominant frequency finds the oscillation in cycles per sample") {
  std::vector<double> y(64);
  for (int k = 0; k < 64; ++k) y[k] = 0.8 * std::cos(two_pi * 0.11 * k + 0.3);
  CHECK(dominant_frequency(y) == doctest::Approx(0.11).epsilon(1e-3));
  CHECK(dominant_frequency(std::vector<double>(32, 0.7)) == 0);
}

TEST_CASE("sampling grid helpers span the requested windows") {
  const std::vector<double> times = default_times(3e6, 48, 2.0);
  CHECK(times.size() == 48);
  CHECK(times.front() == 0);
  CHECK(times.back() == doctest::Approx(2.0 / 3e6));
  CHECK(times[1] > 0);

  const std::vector<int> counts = default_counts(16);
  CHECK(counts.size() == 17);
  CHECK(counts.front() == 0);
  CHECK(counts.back() == 16);

  CHECK_THROWS_AS(default_times(0.0), ConfigInvalid);
  CHECK_THROWS_AS(default_times(3e6, 4), ConfigInvalid);
  CHECK_THROWS_AS(default_counts(2), ConfigInvalid);
}

TEST_CASE("session setup derives the gate time from the target rate") {
  LinearSource src;
  DriveSettings initial;
  initial.cr_amp = 100e6;
  CalibrationSession s = make_session(src, 3e6, initial);
  CHECK(s.drive.gate_time == doctest::Approx(0.25 / 3e6));
  CHECK(s.times.size() == 48);
  CHECK(s.counts.size() == 17);
  CHECK_FALSE(s.converged);

  initial.gate_time = 50e-9;  // explicit values are kept
  s = make_session(src, 3e6, initial);
  CHECK(s.drive.gate_time == doctest::Approx(50e-9));
}

TEST_CASE("cancellation loop validates its inputs") {
  CalibrationSession empty;
  empty.target_rate = 3e6;
  empty.drive.cr_amp = 1e6;
  CHECK_THROWS_AS(cancel_crosstalk(empty), ConfigInvalid);

  LinearSource src;
  DriveSettings initial;
  initial.cr_amp = 100e6;
  CalibrationSession s = make_session(src, 3e6, initial);
  s.target_rate = 0;
  CHECK_THROWS_AS(cancel_crosstalk(s), ConfigInvalid);
  s = make_session(src, 3e6, initial);
  s.drive.cr_amp = 0;
  CHECK_THROWS_AS(cancel_crosstalk(s), ConfigInvalid);
}

TEST_CASE("unconverged sessions refuse the downstream steps") {
  LinearSource src;
  DriveSettings initial;
  initial.cr_amp = 100e6;
  CalibrationSession s = make_session(src, 3e6, initial);
  CHECK_THROWS_AS(
      extract_classical_crosstalk(s, derived_couplings(quiet_device())),
      NotConverged);
  CHECK_THROWS_AS(correct_transients(s), NotConverged);
}

TEST_CASE("parameter sweeps solve the linear crossing") {
  LinearSource src;
  DriveSettings initial;
  initial.cr_amp = 100e6;
  initial.cr_phase = 0.3;
  initial.cancel_amp = 5e6;
  initial.cancel_phase = -0.4;
  CalibrationSession s = make_session(src, 3e6, initial);

  SUBCASE("phase sweep targets zero zy") {
    // zy responds linearly to the composed phase offset from the base value.
    src.model = [&](const GateSpec& gate) {
      EffectiveHamiltonian eh;
      const double v = wrap(gate.drive.cr_phase - pi - initial.cr_phase);
      eh.zx = -0.25;
      eh.zy = 0.3 * v + 0.02;
      return eh;
    };
    const SweepResult sweep =
        sweep_parameter(s, SweepKind::global_phase, 0.1, 9, GateKind::echoed_zx);
    CHECK(sweep.kind == SweepKind::global_phase);
    CHECK(sweep.target == 0);
    CHECK(sweep.values.size() == 9);
    CHECK(sweep.values.front() == doctest::Approx(-0.1));
    CHECK(sweep.values.back() == doctest::Approx(0.1));
    CHECK(sweep.slope == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(sweep.intercept == doctest::Approx(0.02).epsilon(1e-3));
    CHECK(sweep.r_squared > 0.999);
    CHECK(sweep.reliable);
    CHECK(sweep.update == doctest::Approx(-0.02 / 0.3).epsilon(1e-3));
    CHECK(s.sweep_history.size() == 1);

    const double before = s.drive.cr_phase;
    apply_sweep_update(s, sweep);
    CHECK(s.drive.cr_phase == doctest::Approx(before + sweep.update));
    CHECK(s.drive.cancel_phase ==
          doctest::Approx(initial.cancel_phase + sweep.update));
  }

  SUBCASE("amplitude sweep targets the quarter-turn rate") {
    src.model = [&](const GateSpec& gate) {
      EffectiveHamiltonian eh;
      const double turns = gate.kind == GateKind::echoed_zx ? 0.25 : 0.125;
      eh.zx = -turns * gate.drive.cr_amp / 104e6;
      return eh;
    };
    const SweepResult echoed =
        sweep_parameter(s, SweepKind::global_amp, 5e6, 9, GateKind::echoed_zx);
    CHECK(echoed.target == doctest::Approx(-0.25));
    CHECK(echoed.update == doctest::Approx(4e6).epsilon(1e-3));

    const SweepResult half =
        sweep_parameter(s, SweepKind::global_amp, 5e6, 9, GateKind::half_cr);
    CHECK(half.target == doctest::Approx(-0.125));
    CHECK(half.update == doctest::Approx(4e6).epsilon(1e-3));

    // Applying the update rescales the cancellation tone proportionally.
    apply_sweep_update(s, echoed);
    CHECK(s.drive.cr_amp == doctest::Approx(104e6).epsilon(1e-3));
    CHECK(s.drive.cancel_amp == doctest::Approx(5e6 * 1.04).epsilon(1e-3));
  }

  SUBCASE("cancellation quadrature sweeps move one axis at a time") {
    src.model = [&](const GateSpec& gate) {
      EffectiveHamiltonian eh;
      eh.zx = -0.125;
      eh.ix = 2e-9 * (gate.drive.cancel_x() + initial.cancel_x()) + 0.004;
      eh.iy = 3e-9 * (gate.drive.cancel_y() + initial.cancel_y());
      return eh;
    };
    // compose_* adds pi to the cancel phase, flipping both quadratures; the
    // fake folds that back so the response is linear in the session offset.
    const SweepResult sx =
        sweep_parameter(s, SweepKind::cancel_x, 2e6, 9, GateKind::half_cr);
    CHECK(sx.update == doctest::Approx(0.004 / 2e-9).epsilon(1e-3));
    const SweepResult sy =
        sweep_parameter(s, SweepKind::cancel_y, 2e6, 9, GateKind::half_cr);
    CHECK(sy.update == doctest::Approx(0.0).epsilon(1e-6));
  }

  SUBCASE("out-of-range crossings and dead responses throw") {
    src.model = [&](const GateSpec& gate) {
      EffectiveHamiltonian eh;
      const double v = wrap(gate.drive.cr_phase - pi - initial.cr_phase);
      eh.zx = -0.25;
      eh.zy = 0.3 * (v - 0.5);  // crossing far outside the window
      return eh;
    };
    CHECK_THROWS_AS(
        sweep_parameter(s, SweepKind::global_phase, 0.1, 9, GateKind::echoed_zx),
        CrossingOutOfRange);

    src.model = [&](const GateSpec&) {
      EffectiveHamiltonian eh;
      eh.zx = -0.25;
      eh.zy = 0.02;  // flat response
      return eh;
    };
    CHECK_THROWS_AS(
        sweep_parameter(s, SweepKind::global_phase, 0.1, 9, GateKind::echoed_zx),
        CrossingOutOfRange);
  }

  SUBCASE("sweep inputs are validated") {
    src.model = [](const GateSpec&) { return EffectiveHamiltonian{}; };
    CHECK_THROWS_AS(
        sweep_parameter(s, SweepKind::global_phase, 0.0, 9, GateKind::echoed_zx),
        ConfigInvalid);
    CHECK_THROWS_AS(
        sweep_parameter(s, SweepKind::global_phase, 0.1, 2, GateKind::echoed_zx),
        ConfigInvalid);
  }
}

TEST_CASE("cancellation loop converges on the simulated device") {
  const DeviceConfig cfg = quiet_device();
  const DerivedCouplings c = derived_couplings(cfg);
  // Kept well below the pair's saturation peak (zx tops out near 2.1 MHz)
  // so the multiplicative amplitude update contracts.
  const double target = 1.5e6;

  SimulatedSource source(cfg);
  DriveSettings initial;
  initial.cr_amp = target / c.mu;  // first guess from the predicted coupling
  CalibrationSession s = make_session(source, target, initial);
  s.times = default_times(target, 32, 1.5);
  cancel_crosstalk(s);

  REQUIRE(s.converged);
  CHECK(s.tomo_history.size() <= 12);
  const EffectiveHamiltonian last = s.tomo_history.back().eh;
  CHECK(last.zx == doctest::Approx(target).epsilon(0.02));
  CHECK(std::abs(last.zy) < 0.02 * last.zx);
  CHECK(std::abs(last.ix) < 0.02 * last.zx);
  CHECK(std::abs(last.iy) < 0.02 * last.zx);

  // The converged tone splits into the known exchange part plus the classical
  // leak actually present on the device.
  auto [m12, isolation] = extract_classical_crosstalk(s, c);
  CHECK(m12 == doctest::Approx(cfg.m12).epsilon(0.1));
  CHECK(isolation == doctest::Approx(-23.0).epsilon(0.05));

  // The audit log captured every round.
  std::ostringstream os;
  write_session_log(os, s);
  CHECK(os.str().find("converged") != std::string::npos);
  CHECK(!s.log.empty());
}

TEST_CASE("transient correction steers the per-gate rate onto its target") {
  DeviceConfig cfg = quiet_device();
  cfg.distortion.ringup_time = 8e-9;
  cfg.distortion.edge_phase_error = 0.03;
  const DerivedCouplings c = derived_couplings(cfg);
  // Long enough gate halves that the ramp/ring-up area deficit stays small
  // and the amplitude sweep window avoids the saturated response.
  const double target = 1.5e6;

  SimulatedSource source(cfg);
  DriveSettings initial;
  initial.cr_amp = target / c.mu;
  CalibrationSession s = make_session(source, target, initial);
  s.times = default_times(target, 32, 1.5);
  s.x_pi.ideal = true;
  cancel_crosstalk(s);
  REQUIRE(s.converged);

  correct_transients(s);
  CHECK(s.converged);
  CHECK(s.sweep_history.size() == 5);
  // The closing amplitude sweep finds the per-gate rate already on target.
  const SweepResult& final_amp = s.sweep_history.back();
  CHECK(final_amp.kind == SweepKind::global_amp);
  CHECK(std::abs(final_amp.intercept - final_amp.target) < 0.01);
  CHECK(final_amp.reliable);
}
