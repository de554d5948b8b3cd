#pragma once

#include <vector>

#include "crcal/device.hpp"
#include "crcal/linalg.hpp"
#include "crcal/pulse.hpp"

namespace crcal {

struct HilbertSpace {
  int levels = 3;  // levels per transmon, >= 2
  int dim() const { return levels * levels; }
  // Combined index for |control=n1, target=n2>.
  int index(int n1, int n2) const { return n1 * levels + n2; }
};

// Two-transmon state as a density matrix over levels^2 basis states.
struct QuantumState {
  HilbertSpace space;
  Mat rho;
};

QuantumState ground_state(HilbertSpace space);
// Pure product state from per-transmon amplitudes over {|0>, |1>}.
QuantumState pure_product(HilbertSpace space, cd c0, cd c1, cd t0, cd t1);
// Error-free preparation flip |0> <-> |1> on the control, leakage untouched.
void apply_ideal_x_control(QuantumState& state);

enum class NoiseMode { unitary, lindblad };

struct Propagation {
  double step_size = 0;               // s
  NoiseMode noise = NoiseMode::unitary;
};

// Step size such that the fastest problem frequency advances `cycles` per
// step (default comfortably below the 0.05 validity limit).
Propagation make_propagation(const DeviceConfig& cfg, double peak_drive_amp,
                             NoiseMode noise, double cycles = 0.03);

// An ideal operation inserted between pulse samples (unit-test mode).
struct InstantGate {
  double time = 0;
  Mat u;  // dim x dim unitary
};

// Drive content of one contiguous simulation window. All envelopes share the
// timeline [0, duration]. The `cr` envelope rides on the control line at the
// target's carrier frequency (and leaks onto the target with fraction m12 and
// extra phase phi); `cancel` is applied resonantly to the target; `xpi` is a
// resonant tone on the control at its own frequency.
struct PulseProgram {
  double duration = 0;
  PulseEnvelope cr;
  PulseEnvelope cancel;
  PulseEnvelope xpi;
  std::vector<InstantGate> instants;

  double peak_drive_amp() const;
};

// Single CR pulse of the given total length with the matching cancellation
// tone, both shaped by the drive's ramp time and passed through the device's
// line distortion.
PulseProgram cr_program(const DeviceConfig& cfg, const DriveSettings& drive,
                        double duration);

// Rotating-frame Hamiltonian (angular units, rad/s) at time t, each transmon
// frame at its own qubit frequency: Duffing anharmonicity, exchange coupling
// oscillating at the detuning, the CR drive detuned in the control's frame,
// and resonant cross-talk/cancellation tones on the target.
Mat build_hamiltonian(const DeviceConfig& cfg, const PulseProgram& program,
                      double t, HilbertSpace space = {});
Mat build_hamiltonian(const DeviceConfig& cfg, const DriveSettings& drive,
                      double t, HilbertSpace space = {});

// Same physics written in the frame co-rotating with the drive carrier on
// both transmons: the detuning appears as a static control term and the
// exchange coupling is time-independent. Used for spectrum diagnostics.
Mat build_static_hamiltonian(const DeviceConfig& cfg, const PulseProgram& program,
                             double t, HilbertSpace space = {});

// Piecewise-constant midpoint propagation with exact averaging of the
// oscillating phases over each step; lindblad mode adds per-transmon
// relaxation (rate 1/T1) and pure dephasing (rate 1/T2 - 1/(2 T1)) collapse
// channels via symmetric splitting. Throws StepTooLarge when step_size
// exceeds 0.05 cycles of the fastest frequency present.
QuantumState propagate(const DeviceConfig& cfg, const PulseProgram& program,
                       const QuantumState& initial, const Propagation& prop);

// Total unitary of a program (noise mode ignored).
Mat pulse_unitary(const DeviceConfig& cfg, const PulseProgram& program,
                  const Propagation& prop, HilbertSpace space = {});

// Column-stochastic superoperator (dim^2 x dim^2, column-major vectorization)
// of a program under the given noise mode.
Mat pulse_superop(const DeviceConfig& cfg, const PulseProgram& program,
                  const Propagation& prop, HilbertSpace space = {});

// Pure relaxation/dephasing channel over the given duration with the
// coherent dynamics switched off entirely.
Mat decay_superop(const DeviceConfig& cfg, double duration,
                  HilbertSpace space = {});

enum class Qubit { control, target };

struct PauliReading {
  double value = 0;    // expectation renormalized to the computational subspace
  double leakage = 0;  // population outside both-transmon {0,1} levels
};

// Single-qubit Pauli expectation on the two-level subspace of one transmon.
PauliReading measure_pauli(const QuantumState& state, Qubit q, char axis);

double computational_population(const QuantumState& state);

}  // namespace crcal
