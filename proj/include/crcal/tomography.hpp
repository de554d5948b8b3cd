#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "crcal/device.hpp"
#include "crcal/dynamics.hpp"
#include "crcal/effective.hpp"
#include "crcal/gates.hpp"

namespace crcal {

// Target-qubit Bloch components versus pulse duration (seconds) or gate
// repetition count, for one control preparation.
struct BlochTrajectory {
  std::vector<double> ticks;
  std::vector<double> x, y, z;
  std::vector<double> leakage;
  int control_prep = 0;   // 0 or 1
  bool per_gate = false;  // ticks are integer repetition counts
};

// Fixed-axis fixed-rate rotation r(t) = R_axis(2 pi rate t) r0.
struct RotationFit {
  Eigen::Vector3d axis{0, 0, 1};
  double rate = 0;  // cycles per tick unit, signed
  Eigen::Vector3d offset{0, 0, 1};
  double residual = 0;  // RMS misfit over all components
  bool degenerate = false;
};

struct AcquireOptions {
  NoiseMode noise = NoiseMode::unitary;
  double step_cycles = 0.03;  // propagation step in cycles of fastest scale
  int shots = 0;              // 0 = exact expectations
  std::uint64_t seed = 1;     // shot-noise stream
  cd target0 = 1.0;           // initial target superposition (tests)
  cd target1 = 0.0;
};

// Binomial sampling of a Pauli expectation with the given shot count.
double apply_shot_noise(double expectation, int shots, std::mt19937_64& rng);

// Single CR(+cancellation) pulse of each duration, then target measurement
// on all three axes; control prepared by an error-free flip when prep = 1.
BlochTrajectory acquire_continuous(const DeviceConfig& cfg,
                                   const DriveSettings& drive, int control_prep,
                                   const std::vector<double>& times,
                                   const AcquireOptions& opts = {});

// The composed gate (ramps and distortion included) applied n times for each
// requested count, then target measurement.
BlochTrajectory acquire_repeated(const DeviceConfig& cfg, const GateSpec& gate,
                                 int control_prep, const std::vector<int>& counts,
                                 const AcquireOptions& opts = {});

// Least-squares rotation fit, seeded from the Fourier peak of the z trace
// (both signs) and, when nonzero, the expected rate. Flat trajectories take
// the degenerate path: rate 0, axis z. Repetition-count data is constrained
// to |rate| < 0.5 cycles per gate (the alias-free window).
RotationFit fit_rotation(const BlochTrajectory& traj, double expected_rate = 0);

// Interaction rates from paired fits with control prepared in 0 and 1:
// the difference of per-prep target rotation vectors gives the z*-terms, the
// sum gives the i*-terms.
EffectiveHamiltonian hamiltonian_tomography(const BlochTrajectory& traj0,
                                            const BlochTrajectory& traj1,
                                            double expected_rate = 0);

// CSV export: header tick,x,y,z,leakage.
void write_trajectory_csv(std::ostream& os, const BlochTrajectory& traj);

// Measurement boundary for the calibrator: it may observe the device only
// through these trajectory acquisitions.
class TrajectorySource {
 public:
  virtual ~TrajectorySource() = default;
  virtual BlochTrajectory continuous(const DriveSettings& drive, int control_prep,
                                     const std::vector<double>& times) = 0;
  virtual BlochTrajectory repeated(const GateSpec& gate, int control_prep,
                                   const std::vector<int>& counts) = 0;
};

class SimulatedSource final : public TrajectorySource {
 public:
  SimulatedSource(DeviceConfig cfg, AcquireOptions opts = {})
      : cfg_(std::move(cfg)), opts_(opts) {}

  BlochTrajectory continuous(const DriveSettings& drive, int control_prep,
                             const std::vector<double>& times) override {
    return acquire_continuous(cfg_, drive, control_prep, times, next());
  }
  BlochTrajectory repeated(const GateSpec& gate, int control_prep,
                           const std::vector<int>& counts) override {
    return acquire_repeated(cfg_, gate, control_prep, counts, next());
  }

 private:
  // Fresh shot-noise stream per acquisition, deterministic from the seed.
  AcquireOptions next() {
    AcquireOptions o = opts_;
    o.seed = opts_.seed + (counter_++) * 0x9e3779b97f4a7c15ull;
    return o;
  }

  DeviceConfig cfg_;
  AcquireOptions opts_;
  std::uint64_t counter_ = 0;
};

}  // namespace crcal
