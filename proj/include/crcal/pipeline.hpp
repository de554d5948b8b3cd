#pragma once

#include <string>
#include <vector>

#include "crcal/benchmarking.hpp"
#include "crcal/calibration.hpp"
#include "crcal/device.hpp"

namespace crcal {

// Full pipeline configuration, parsed from a versioned JSON document. Units
// are fixed by the schema: Hz, seconds, radians.
struct RunConfig {
  DeviceConfig device;
  double target_rate = 3e6;          // desired zx, Hz
  std::vector<std::string> stages;   // subset of the known stage names
  int shots = 0;                     // 0 = exact expectations
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  NoiseMode noise = NoiseMode::lindblad;
  double step_cycles = 0.03;
  RbOptions rb;

  // Throws ConfigInvalid with the offending field's path.
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  void validate() const;
};

// Stage names in dependency order.
const std::vector<std::string>& known_stages();

struct PipelineResult {
  DerivedCouplings couplings;
  DriveSettings drive;                    // final calibrated settings
  std::vector<TomographyRecord> tomo;     // cancellation history
  EffectiveHamiltonian repeated_before;   // per-gate rates pre/post transients
  EffectiveHamiltonian repeated_after;
  FidelityReport report;
  bool calibration_converged = false;
  std::vector<std::string> artifacts;     // files written
};

// Executes the requested stages in order, writing per-stage CSV artifacts, a
// session log and a JSON summary into output_dir. Deterministic for a fixed
// seed. Throws ConfigInvalid / StageFailed.
PipelineResult run_pipeline(const RunConfig& config);

}  // namespace crcal
