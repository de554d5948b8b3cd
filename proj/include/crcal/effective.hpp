#pragma once

namespace crcal {

// Unit for interaction rates: cycles per second (continuous tomography and
// model predictions) or cycles per gate repetition (repeated-gate tomography).
enum class RateUnit { per_second, per_gate };

// Coefficients of the two-qubit effective Hamiltonian
//   2 H / hbar = zx ZX + zy ZY + ix IX + iy IY + iz IZ + zz ZZ
//                + xi XI + yi YI + zi ZI        (angular rate = 2*pi*value)
// First letter = control (Q1), second = target (Q2). All values are ordinary
// frequencies in the unit given by `unit`. Tomography fills only the six
// target-axis terms; xi/yi/zi are populated by model prediction alone.
struct EffectiveHamiltonian {
  double zx = 0, zy = 0, ix = 0, iy = 0, iz = 0, zz = 0;
  double xi = 0, yi = 0, zi = 0;
  RateUnit unit = RateUnit::per_second;
  // Set when any contributing rotation fit was degenerate (flat trajectory).
  bool low_confidence = false;
};

}  // namespace crcal
