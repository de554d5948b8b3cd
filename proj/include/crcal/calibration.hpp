#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "crcal/device.hpp"
#include "crcal/gates.hpp"
#include "crcal/tomography.hpp"

namespace crcal {

enum class SweepKind { global_phase, global_amp, cancel_x, cancel_y };

const char* sweep_kind_name(SweepKind kind);

// One parameter sweep with repeated-gate tomography at each value and a
// linear solve for the designated coefficient's target crossing.
struct SweepResult {
  SweepKind kind = SweepKind::global_phase;
  GateKind scheme = GateKind::echoed_zx;
  std::vector<double> values;       // swept offsets from the current setting
  std::vector<double> coefficient;  // fitted term at each value, cycles/gate
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  double target = 0;  // desired coefficient value, cycles/gate
  double update = 0;  // parameter value solving the crossing
  bool reliable = false;
};

struct TomographyRecord {
  int iteration = 0;
  EffectiveHamiltonian eh;
};

// Mutable calibration state. The device is reachable only through `source`;
// every drive update is recorded in the history.
struct CalibrationSession {
  TrajectorySource* source = nullptr;
  double target_rate = 0;  // desired zx, Hz
  DriveSettings drive;
  XpiSettings x_pi;
  double tol = 0.02;
  int max_iters = 12;

  std::vector<double> times;  // continuous-tomography sampling grid, s
  std::vector<int> counts;    // repeated-tomography repetition grid

  std::vector<TomographyRecord> tomo_history;
  std::vector<SweepResult> sweep_history;
  std::vector<std::string> log;
  bool converged = false;
};

// Sampling grids: n points spanning `periods` oscillation periods of the
// target rate; repetition counts 0..n_max.
std::vector<double> default_times(double target_rate, int n = 48,
                                  double periods = 2.0);
std::vector<int> default_counts(int n_max = 16);

CalibrationSession make_session(TrajectorySource& source, double target_rate,
                                const DriveSettings& initial);

// Iterative cross-talk cancellation: each round runs continuous Hamiltonian
// tomography, aligns the drive phase (zy -> 0), rescales amplitudes to the
// target rate, and subtracts the residual target field from the cancellation
// tone. Stops when |zy|, |ix|, |iy| < tol*|zx| and zx is within tol of the
// target; sets converged (best-so-far kept otherwise).
CalibrationSession& cancel_crosstalk(CalibrationSession& session);

// Splits the converged cancellation tone into its known exchange-mediated
// part and the classical leakage remainder; returns {m12, isolation_dB}.
// Throws NotConverged before a successful cancel_crosstalk.
std::pair<double, double> extract_classical_crosstalk(
    const CalibrationSession& session, const DerivedCouplings& couplings);

// Sweeps one gate parameter (+-half_range around its current value, n_points
// values), fits the designated coefficient linearly and solves the crossing:
//   global_phase -> zy = 0          global_amp -> zx = target cycles/gate
//   cancel_x     -> ix = 0          cancel_y   -> iy = 0
// The update is not applied. Throws CrossingOutOfRange when the solution
// leaves the swept range.
SweepResult sweep_parameter(CalibrationSession& session, SweepKind kind,
                            double half_range, int n_points, GateKind scheme);

// Writes the sweep's solved parameter value into the session drive.
void apply_sweep_update(CalibrationSession& session, const SweepResult& sweep);

struct TransientOptions {
  double phase_range = 0.1;      // rad
  // Wide enough that the first correction captures the pulse-edge area
  // deficit (ramps plus line ring-up) in one linear solve.
  double amp_fraction = 0.35;    // of cr_amp
  double cancel_fraction = 0.3;  // of cancel_amp, per quadrature
  int n_points = 9;
};

// Per-gate transient correction: global phase and amplitude on the echoed
// gate, the two cancellation quadratures on the bare half gate, then a final
// amplitude re-correction; each update applied before the next sweep.
CalibrationSession& correct_transients(CalibrationSession& session,
                                       const TransientOptions& opts = {});

// Human-readable audit log: one record per tomography, sweep and update.
void write_session_log(std::ostream& os, const CalibrationSession& session);

}  // namespace crcal
