#include "crcal/device.hpp"

#include <cmath>
#include <sstream>

#include "crcal/errors.hpp"
#include "crcal/linalg.hpp"
#include "crcal/pulse.hpp"

namespace crcal {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    std::ostringstream msg;
    msg << "invalid device config: " << field << " " << what;
    throw ConfigInvalid(msg.str());
  }
}

void validate_transmon(const TransmonParams& q, const char* name) {
  std::string f(name);
  require(q.frequency > 0, (f + ".frequency").c_str(), "must be positive");
  require(q.anharmonicity < 0, (f + ".anharmonicity").c_str(), "must be negative");
  require(q.t1 >= 0, (f + ".t1").c_str(), "must be non-negative (0 disables)");
  require(q.t2 >= 0, (f + ".t2").c_str(), "must be non-negative (0 disables)");
  if (q.t1 > 0 && q.t2 > 0)
    require(q.t2 <= 2 * q.t1 + 1e-15, (f + ".t2").c_str(),
            "must not exceed 2*t1");
}

// Smallest magnitude a perturbative denominator may take, Hz.
constexpr double kDenominatorFloor = 1e3;

}  // namespace

void DeviceConfig::validate() const {
  validate_transmon(q1, "q1");
  validate_transmon(q2, "q2");
  require(j >= 0, "j", "must be non-negative");
  require(m12 >= 0 && m12 < 1, "m12", "must lie in [0, 1)");
  require(std::isfinite(phi), "phi", "must be finite");
  require(levels >= 2, "levels", "must be at least 2");
  require(distortion.ringup_time >= 0, "distortion.ringup_time",
          "must be non-negative");
  require(std::abs(distortion.edge_phase_error) < pi,
          "distortion.edge_phase_error", "must lie in (-pi, pi)");
  // The perturbative treatment (and the CR gate itself) needs a dispersive
  // pair: the qubit-qubit detuning must dominate the exchange coupling.
  require(std::abs(detuning(*this)) >= 10 * j - 1e-9, "j",
          "must satisfy |detuning| >= 10*j");
}

double detuning(const DeviceConfig& cfg) {
  return cfg.q1.frequency - cfg.q2.frequency;
}

DerivedCouplings derived_couplings(const DeviceConfig& cfg) {
  cfg.validate();
  const double d = detuning(cfg);
  const double a1 = cfg.q1.anharmonicity;
  const double a2 = cfg.q2.anharmonicity;
  for (double den : {d, d + a1, d - a2}) {
    if (std::abs(den) < kDenominatorFloor) {
      std::ostringstream msg;
      msg << "degenerate detuning: perturbative denominator " << den
          << " Hz is below " << kDenominatorFloor << " Hz";
      throw DegenerateDetuning(msg.str());
    }
  }
  DerivedCouplings out;
  out.delta12 = d;
  out.mu = -(cfg.j / d) * a1 / (d + a1);
  out.nu = -(cfg.j / d) * d / (d + a1);
  out.epsilon = cfg.j * cfg.j * (a1 + a2) / ((d + a1) * (d - a2));
  return out;
}

EffectiveHamiltonian predicted_effective_hamiltonian(const DeviceConfig& cfg,
                                                     const DriveSettings& drive) {
  const DerivedCouplings c = derived_couplings(cfg);
  const double a = drive.cr_amp;
  const double th = drive.cr_phase;
  EffectiveHamiltonian eh;
  eh.unit = RateUnit::per_second;
  eh.zx = c.mu * a * std::cos(th);
  eh.zy = c.mu * a * std::sin(th);
  eh.xi = a * std::cos(th);
  eh.yi = a * std::sin(th);
  eh.ix = a * (c.nu * std::cos(th) + cfg.m12 * std::cos(th + cfg.phi)) +
          drive.cancel_x();
  eh.iy = a * (c.nu * std::sin(th) + cfg.m12 * std::sin(th + cfg.phi)) +
          drive.cancel_y();
  eh.iz = 0;
  eh.zz = c.epsilon;
  eh.zi = c.delta12;
  // Perturbation theory degrades once the drive rivals the detuning.
  eh.low_confidence = a > std::abs(c.delta12) / 10;
  return eh;
}

std::pair<double, double> predicted_cancellation(const DeviceConfig& cfg,
                                                 double cr_amp, double cr_phase) {
  const DerivedCouplings c = derived_couplings(cfg);
  const cd tone = -cr_amp * (c.nu * std::exp(iu * cr_phase) +
                             cfg.m12 * std::exp(iu * (cr_phase + cfg.phi)));
  return {std::abs(tone), std::arg(tone)};
}

}  // namespace crcal
