#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crcal/errors.hpp"
#include "crcal/pipeline.hpp"
#include "json.hpp"

namespace {

std::vector<std::string> split_stages(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::size_t end = comma == std::string::npos ? csv.size() : comma;
    if (end > start) out.push_back(csv.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void print_summary(const crcal::RunConfig& cfg, const crcal::PipelineResult& r) {
  const auto& c = r.couplings;
  std::printf("couplings: mu=%.6g nu=%.6g epsilon=%.6g Hz delta12=%.6g Hz\n",
              c.mu, c.nu, c.epsilon, c.delta12);
  auto has = [&](const char* name) {
    for (const auto& s : cfg.stages)
      if (s == name) return true;
    return false;
  };
  if (has("cancel")) {
    const double zx = r.tomo.empty() ? 0.0 : r.tomo.back().eh.zx;
    std::printf("calibration: %s after %zu rounds; zx=%.6g Hz\n",
                r.calibration_converged ? "converged" : "NOT converged",
                r.tomo.size(), zx);
  }
  if (has("echo"))
    std::printf("per-gate before: zx=%.6g zy=%.6g ix=%.6g iy=%.6g cycles\n",
                r.repeated_before.zx, r.repeated_before.zy, r.repeated_before.ix,
                r.repeated_before.iy);
  if (has("tomo-report"))
    std::printf("per-gate after:  zx=%.6g zy=%.6g ix=%.6g iy=%.6g cycles\n",
                r.repeated_after.zx, r.repeated_after.zy, r.repeated_after.ix,
                r.repeated_after.iy);
  if (has("qpt"))
    std::printf("process tomography: F_pro=%.6g F_avg=%.6g\n",
                r.report.process_fidelity, r.report.average_gate_fidelity);
  if (has("rb"))
    std::printf("interleaved rb: F=%.6g [%.6g, %.6g]  coherence limit %.6g\n",
                r.report.rb_fidelity, r.report.rb_ci_lo, r.report.rb_ci_hi,
                r.report.coherence_limit);
  std::printf("artifacts: %s (%zu files)\n", cfg.output_dir.c_str(),
              r.artifacts.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-transmon cross-resonance calibration and benchmarking"};
  app.require_subcommand(1);

  std::string config_path, out_dir, stages_csv;
  std::int64_t seed = 0;
  int shots = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration JSON")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--shots", shots, "shots per expectation (0 = exact)");
    sub->add_option("--stages", stages_csv, "comma-separated stage list");
    return sub;
  };

  CLI::App* cmd_couplings =
      add_common(app.add_subcommand("couplings", "print derived couplings"));
  CLI::App* cmd_calibrate =
      add_common(app.add_subcommand("calibrate", "cancellation + transients"));
  CLI::App* cmd_benchmark =
      add_common(app.add_subcommand("benchmark", "calibrate then qpt + rb"));
  CLI::App* cmd_run = add_common(app.add_subcommand("run", "full pipeline"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    crcal::RunConfig cfg = crcal::RunConfig::from_file(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    CLI::App* active = app.get_subcommands().front();
    if (active->count("--seed")) {
      cfg.seed = std::uint64_t(seed);
      cfg.rb.seed = std::uint64_t(seed);
    }
    if (active->count("--shots")) cfg.shots = shots;
    if (active->count("--stages")) cfg.stages = split_stages(stages_csv);

    if (active == cmd_couplings) {
      const crcal::DerivedCouplings c = crcal::derived_couplings(cfg.device);
      nlohmann::ordered_json j{{"mu", c.mu},
                               {"nu", c.nu},
                               {"epsilon", c.epsilon},
                               {"delta12", c.delta12}};
      std::printf("%s\n", j.dump(2).c_str());
      return 0;
    }
    if (active == cmd_calibrate && !active->count("--stages"))
      cfg.stages = {"cancel", "echo", "transients", "tomo-report"};
    if (active == cmd_benchmark && !active->count("--stages"))
      cfg.stages = {"cancel", "echo", "qpt", "rb"};
    (void)cmd_run;

    cfg.validate();
    const crcal::PipelineResult result = crcal::run_pipeline(cfg);
    print_summary(cfg, result);
    return 0;
  } catch (const crcal::ConfigInvalid& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const crcal::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
