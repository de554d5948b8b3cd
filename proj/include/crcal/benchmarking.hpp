#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "crcal/clifford.hpp"
#include "crcal/device.hpp"
#include "crcal/gates.hpp"
#include "crcal/tomography.hpp"

namespace crcal {

// Process matrix in the two-qubit Pauli basis (pauli2 ordering II..ZZ),
// normalized so a trace-preserving channel has trace one.
struct ChiMatrix {
  Mat entries{Mat::Zero(16, 16)};
};

// Channel acting on 4x4 computational-subspace density matrices. Maps may be
// trace-decreasing (leakage).
using Channel = std::function<Mat(const Mat&)>;

// Reconstructs chi by preparing the 16 product inputs from {0, 1, +, +i} on
// each qubit, reading all Pauli expectations of the outputs, inverting the
// linear design, and projecting to the nearest Hermitian matrix with unit
// trace.
ChiMatrix chi_from_channel(const Channel& channel);

// Same, with the channel realized by simulating the gate's pulse program;
// leakage appears as trace loss of the computational block.
ChiMatrix process_tomography(const DeviceConfig& cfg, const GateSpec& gate,
                             const AcquireOptions& opts = {});

// Applies the channel described by chi to a 4x4 density matrix.
Mat apply_chi(const ChiMatrix& chi, const Mat& rho);

double process_fidelity(const ChiMatrix& chi, const Mat& ideal_u);
double average_gate_fidelity(const ChiMatrix& chi, const Mat& ideal_u);

// Average gate fidelity of a unitary on the full (possibly leaky) space,
// restricted to the computational block, against a 4x4 ideal.
double unitary_average_fidelity(const Mat& u_full, const Mat& ideal4,
                                int levels = 3);

// One benchmarkable gate: its superoperator on the full simulation space and
// the tableau of its ideal action (for recovery bookkeeping).
struct GateChannel {
  Mat superop;  // dim^2 x dim^2, column-major vectorization
  CliffordTableau tableau;
  int levels = 3;
};

GateChannel gate_channel(const DeviceConfig& cfg, const GateSpec& gate,
                         NoiseMode noise, double step_cycles = 0.03);

// Ideal 4x4 unitary followed by two-qubit depolarizing noise of the given
// strength (probability of full depolarization), embedded in the full space.
GateChannel ideal_channel_with_depolarizing(const Mat& u4, double strength,
                                            int levels = 3);

struct RbOptions {
  std::vector<int> lengths{2, 4, 8, 16, 32, 48};
  int n_sequences = 30;
  std::uint64_t seed = 7;
};

struct RbCurve {
  std::vector<int> lengths;
  std::vector<double> survival;              // mean ground population
  std::vector<std::vector<double>> samples;  // per length, per sequence
  double a = 0, p = 1, b = 0;                // survival ~ a p^m + b
  bool interleaved = false;
};

// Random Clifford sequences (ideal instantaneous Cliffords) with the channel
// interleaved after every Clifford when given; exact recovery appended; the
// fit is a bounded decay a p^m + b. Throws FitFailure when decaying data pins
// p to a bound.
RbCurve run_rb(const GateChannel* interleave, const RbOptions& opts = {},
               int levels = 3);

struct RbFidelity {
  double value = 0;
  double lo = 0, hi = 0;  // 90% confidence interval
};

// Interleaved-RB average gate fidelity 1 - (3/4)(1 - p_int/p_ref) with a
// nonparametric bootstrap over sequences for the interval.
RbFidelity interleaved_fidelity(const RbCurve& ref, const RbCurve& il,
                                int bootstrap = 1000, std::uint64_t seed = 99);

// Decoherence-limited average fidelity over the given total gate duration:
// the drive-free relaxation/dephasing channel benchmarked against identity.
double coherence_limit(const DeviceConfig& cfg, double total_duration);

struct FidelityReport {
  double process_fidelity = 0;
  double average_gate_fidelity = 0;
  double rb_fidelity = 0;
  double rb_ci_lo = 0, rb_ci_hi = 0;
  double coherence_limit = 0;
};

// CSV exports: chi as basis-labelled re/im entries; RB as per-length stats.
void write_chi_csv(std::ostream& os, const ChiMatrix& chi);
void write_rb_csv(std::ostream& os, const RbCurve& ref, const RbCurve* il);

}  // namespace crcal
