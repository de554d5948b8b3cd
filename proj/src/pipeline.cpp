#include "crcal/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crcal/errors.hpp"
#include "json.hpp"

namespace crcal {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw ConfigInvalid(path + ": " + why);
}

// Typed field access that reports the offending field's path.
struct Cursor {
  const json* node;
  std::string path;

  std::string at(const char* key) const { return path + "." + key; }

  bool has(const char* key) const { return node->contains(key); }

  Cursor child(const char* key) const {
    if (!node->contains(key)) bad(at(key), "missing required object");
    const json& c = (*node)[key];
    if (!c.is_object()) bad(at(key), "must be an object");
    return {&c, at(key)};
  }

  double number(const char* key, double fallback, bool required = false) const {
    if (!node->contains(key)) {
      if (required) bad(at(key), "missing required number");
      return fallback;
    }
    const json& v = (*node)[key];
    if (!v.is_number()) bad(at(key), "must be a number");
    return v.get<double>();
  }

  std::int64_t integer(const char* key, std::int64_t fallback,
                       bool required = false) const {
    if (!node->contains(key)) {
      if (required) bad(at(key), "missing required integer");
      return fallback;
    }
    const json& v = (*node)[key];
    if (!v.is_number_integer()) bad(at(key), "must be an integer");
    return v.get<std::int64_t>();
  }

  std::string text(const char* key, const std::string& fallback) const {
    if (!node->contains(key)) return fallback;
    const json& v = (*node)[key];
    if (!v.is_string()) bad(at(key), "must be a string");
    return v.get<std::string>();
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    for (auto it = node->begin(); it != node->end(); ++it) {
      const std::string& key = it.key();
      if (std::none_of(known.begin(), known.end(),
                       [&](const char* k) { return key == k; }))
        bad(path + "." + key, "unknown field");
    }
  }
};

TransmonParams parse_transmon(const Cursor& c) {
  c.reject_unknown({"frequency", "anharmonicity", "t1", "t2"});
  TransmonParams q;
  q.frequency = c.number("frequency", 0, true);
  q.anharmonicity = c.number("anharmonicity", 0, true);
  q.t1 = c.number("t1", 0);
  q.t2 = c.number("t2", 0);
  return q;
}

json transmon_json(const TransmonParams& q) {
  return {{"frequency", q.frequency},
          {"anharmonicity", q.anharmonicity},
          {"t1", q.t1},
          {"t2", q.t2}};
}

json eh_json(const EffectiveHamiltonian& eh) {
  return {{"zx", eh.zx},
          {"zy", eh.zy},
          {"ix", eh.ix},
          {"iy", eh.iy},
          {"iz", eh.iz},
          {"zz", eh.zz},
          {"unit", eh.unit == RateUnit::per_gate ? "cycles_per_gate" : "hz"},
          {"low_confidence", eh.low_confidence}};
}

json drive_json(const DriveSettings& d) {
  return {{"cr_amp", d.cr_amp},           {"cr_phase", d.cr_phase},
          {"cancel_amp", d.cancel_amp},   {"cancel_phase", d.cancel_phase},
          {"gate_time", d.gate_time},     {"ramp_time", d.ramp_time}};
}

int stage_index(const std::string& name) {
  const auto& known = known_stages();
  const auto it = std::find(known.begin(), known.end(), name);
  return it == known.end() ? -1 : int(it - known.begin());
}

bool wants(const RunConfig& cfg, const char* name) {
  return std::find(cfg.stages.begin(), cfg.stages.end(), name) !=
         cfg.stages.end();
}

// Runs one stage, tagging any library error with the stage name.
template <typename Fn>
void run_stage(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const StageFailed&) {
    throw;
  } catch (const Error& e) {
    throw StageFailed(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageFailed(std::string(name) + ": " + e.what());
  }
}

}  // namespace

const std::vector<std::string>& known_stages() {
  static const std::vector<std::string> names{"cancel",      "echo", "transients",
                                              "tomo-report", "qpt",  "rb"};
  return names;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(std::string("document: ") + e.what());
  }
  if (!root.is_object()) bad("document", "must be a JSON object");
  Cursor top{&root, "config"};
  top.reject_unknown({"schema_version", "device", "target_rate", "stages",
                      "shots", "seed", "output_dir", "noise", "step_cycles",
                      "rb"});
  if (top.integer("schema_version", 0, true) != 1)
    bad("config.schema_version", "expected 1");

  RunConfig cfg;
  const Cursor dev = top.child("device");
  dev.reject_unknown({"q1", "q2", "j", "m12", "phi", "distortion", "levels"});
  cfg.device.q1 = parse_transmon(dev.child("q1"));
  cfg.device.q2 = parse_transmon(dev.child("q2"));
  cfg.device.j = dev.number("j", 0, true);
  cfg.device.m12 = dev.number("m12", 0);
  cfg.device.phi = dev.number("phi", 0);
  if (dev.has("distortion")) {
    const Cursor dist = dev.child("distortion");
    dist.reject_unknown({"ringup_time", "edge_phase_error"});
    cfg.device.distortion.ringup_time = dist.number("ringup_time", 0);
    cfg.device.distortion.edge_phase_error = dist.number("edge_phase_error", 0);
  }
  cfg.device.levels = int(dev.integer("levels", 3));

  cfg.target_rate = top.number("target_rate", 3e6);
  if (top.has("stages")) {
    const json& st = (*top.node)["stages"];
    if (!st.is_array()) bad("config.stages", "must be an array of strings");
    for (std::size_t i = 0; i < st.size(); ++i) {
      if (!st[i].is_string())
        bad("config.stages[" + std::to_string(i) + "]", "must be a string");
      cfg.stages.push_back(st[i].get<std::string>());
    }
  } else {
    cfg.stages = known_stages();
  }
  cfg.shots = int(top.integer("shots", 0));
  cfg.seed = std::uint64_t(top.integer("seed", 1));
  cfg.output_dir = top.text("output_dir", ".");
  const std::string noise = top.text("noise", "lindblad");
  if (noise == "lindblad")
    cfg.noise = NoiseMode::lindblad;
  else if (noise == "unitary")
    cfg.noise = NoiseMode::unitary;
  else
    bad("config.noise", "must be \"unitary\" or \"lindblad\"");
  cfg.step_cycles = top.number("step_cycles", 0.03);

  if (top.has("rb")) {
    const Cursor rb = top.child("rb");
    rb.reject_unknown({"lengths", "sequences", "seed"});
    if (rb.has("lengths")) {
      const json& ls = (*rb.node)["lengths"];
      if (!ls.is_array()) bad("config.rb.lengths", "must be an array");
      cfg.rb.lengths.clear();
      for (std::size_t i = 0; i < ls.size(); ++i) {
        if (!ls[i].is_number_integer())
          bad("config.rb.lengths[" + std::to_string(i) + "]",
              "must be an integer");
        cfg.rb.lengths.push_back(ls[i].get<int>());
      }
    }
    cfg.rb.n_sequences = int(rb.integer("sequences", cfg.rb.n_sequences));
    cfg.rb.seed = std::uint64_t(rb.integer("seed", std::int64_t(cfg.seed)));
  } else {
    cfg.rb.seed = cfg.seed;
  }

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigInvalid("document: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void RunConfig::validate() const {
  try {
    device.validate();
  } catch (const ConfigInvalid& e) {
    throw ConfigInvalid(std::string("config.device.") + e.what());
  }
  if (!(target_rate > 0)) bad("config.target_rate", "must be positive");
  if (shots < 0) bad("config.shots", "must be >= 0");
  if (!(step_cycles > 0) || step_cycles > 0.05)
    bad("config.step_cycles", "must lie in (0, 0.05]");
  if (output_dir.empty()) bad("config.output_dir", "must not be empty");

  int last = -1;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const int idx = stage_index(stages[i]);
    const std::string where = "config.stages[" + std::to_string(i) + "]";
    if (idx < 0) bad(where, "unknown stage \"" + stages[i] + "\"");
    if (idx == last) bad(where, "duplicate stage \"" + stages[i] + "\"");
    if (idx < last)
      bad(where, "stages must follow the order cancel, echo, transients, "
                 "tomo-report, qpt, rb");
    last = idx;
  }
  const bool has_cancel = std::count(stages.begin(), stages.end(), "cancel");
  const bool has_echo = std::count(stages.begin(), stages.end(), "echo");
  if (std::count(stages.begin(), stages.end(), "transients") && !has_cancel)
    bad("config.stages", "transients requires cancel");
  if (std::count(stages.begin(), stages.end(), "qpt") && !has_echo)
    bad("config.stages", "qpt requires the gate composed by echo");
  if (std::count(stages.begin(), stages.end(), "rb") && !has_echo)
    bad("config.stages", "rb requires the gate composed by echo");

  if (rb.lengths.size() < 2) bad("config.rb.lengths", "need at least 2 lengths");
  for (std::size_t i = 0; i < rb.lengths.size(); ++i) {
    const std::string where = "config.rb.lengths[" + std::to_string(i) + "]";
    if (rb.lengths[i] < 1) bad(where, "must be >= 1");
    if (i && rb.lengths[i] <= rb.lengths[i - 1]) bad(where, "must increase");
  }
  if (rb.n_sequences < 10) bad("config.rb.sequences", "must be >= 10");
}

PipelineResult run_pipeline(const RunConfig& config) {
  config.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) bad("config.output_dir", "cannot create: " + ec.message());

  PipelineResult result;
  run_stage("couplings",
            [&] { result.couplings = derived_couplings(config.device); });

  AcquireOptions aopts;
  aopts.noise = config.noise;
  aopts.step_cycles = config.step_cycles;
  aopts.shots = config.shots;
  aopts.seed = config.seed;
  SimulatedSource source(config.device, aopts);

  // Seed the drive from the perturbative model; the cancellation tone starts
  // dark (the loop has to discover the cross-talk, classical part included).
  DriveSettings initial;
  initial.cr_amp = config.target_rate / std::abs(result.couplings.mu);
  CalibrationSession session =
      make_session(source, config.target_rate, initial);

  auto path_of = [&](const std::string& name) {
    return (fs::path(config.output_dir) / name).string();
  };
  auto open_artifact = [&](const std::string& name) {
    std::ofstream os(path_of(name), std::ios::binary);
    if (!os) throw StageFailed("cannot write " + path_of(name));
    result.artifacts.push_back(name);
    return os;
  };
  char line[256];

  double m12_estimate = 0, isolation_db = 0;
  bool crosstalk_known = false;

  if (wants(config, "cancel")) {
    run_stage("cancel", [&] {
      cancel_crosstalk(session);
      result.tomo = session.tomo_history;
      result.calibration_converged = session.converged;
      if (session.converged) {
        const auto split = extract_classical_crosstalk(session, result.couplings);
        m12_estimate = split.first;
        isolation_db = split.second;
        crosstalk_known = true;
      }
      auto os = open_artifact("cancel_history.csv");
      os << "iteration,zx,zy,ix,iy,iz,zz\n";
      for (const TomographyRecord& rec : session.tomo_history) {
        std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      rec.iteration, rec.eh.zx, rec.eh.zy, rec.eh.ix, rec.eh.iy,
                      rec.eh.iz, rec.eh.zz);
        os << line;
      }
    });
  }

  GateSpec gate = compose_echo(session.drive, session.x_pi);

  if (wants(config, "echo")) {
    run_stage("echo", [&] {
      gate = compose_echo(session.drive, session.x_pi);
      const BlochTrajectory t0 = source.repeated(gate, 0, session.counts);
      const BlochTrajectory t1 = source.repeated(gate, 1, session.counts);
      result.repeated_before = hamiltonian_tomography(t0, t1, 0.25);
      {
        auto os = open_artifact("echo_prep0.csv");
        write_trajectory_csv(os, t0);
      }
      {
        auto os = open_artifact("echo_prep1.csv");
        write_trajectory_csv(os, t1);
      }
    });
  }

  if (wants(config, "transients")) {
    run_stage("transients", [&] {
      correct_transients(session);
      gate = compose_echo(session.drive, session.x_pi);
      auto os = open_artifact("transient_sweeps.csv");
      os << "sweep,kind,scheme,offset,coefficient\n";
      for (std::size_t k = 0; k < session.sweep_history.size(); ++k) {
        const SweepResult& sw = session.sweep_history[k];
        for (std::size_t i = 0; i < sw.values.size(); ++i) {
          std::snprintf(line, sizeof line, "%zu,%s,%s,%.12g,%.12g\n", k,
                        sweep_kind_name(sw.kind),
                        sw.scheme == GateKind::echoed_zx ? "echoed" : "half",
                        sw.values[i], sw.coefficient[i]);
          os << line;
        }
      }
    });
  }

  if (wants(config, "tomo-report")) {
    run_stage("tomo-report", [&] {
      const BlochTrajectory t0 = source.repeated(gate, 0, session.counts);
      const BlochTrajectory t1 = source.repeated(gate, 1, session.counts);
      result.repeated_after = hamiltonian_tomography(t0, t1, 0.25);
      {
        auto os = open_artifact("tomo_prep0.csv");
        write_trajectory_csv(os, t0);
      }
      {
        auto os = open_artifact("tomo_prep1.csv");
        write_trajectory_csv(os, t1);
      }
    });
  }

  if (wants(config, "qpt")) {
    run_stage("qpt", [&] {
      const ChiMatrix chi = process_tomography(config.device, gate, aopts);
      const Mat ideal = ideal_zx(-pi / 2);
      result.report.process_fidelity = process_fidelity(chi, ideal);
      result.report.average_gate_fidelity = average_gate_fidelity(chi, ideal);
      auto os = open_artifact("chi.csv");
      write_chi_csv(os, chi);
    });
  }

  if (wants(config, "rb")) {
    run_stage("rb", [&] {
      const GateChannel channel =
          gate_channel(config.device, gate, config.noise, config.step_cycles);
      const RbCurve ref = run_rb(nullptr, config.rb, config.device.levels);
      const RbCurve il = run_rb(&channel, config.rb, config.device.levels);
      const RbFidelity fid = interleaved_fidelity(ref, il);
      result.report.rb_fidelity = fid.value;
      result.report.rb_ci_lo = fid.lo;
      result.report.rb_ci_hi = fid.hi;
      result.report.coherence_limit =
          coherence_limit(config.device, gate.duration());
      auto os = open_artifact("rb.csv");
      write_rb_csv(os, ref, &il);
    });
  }

  {
    auto os = open_artifact("session.log");
    write_session_log(os, session);
  }
  result.drive = session.drive;

  json summary;
  summary["schema_version"] = 1;
  summary["stages"] = config.stages;
  summary["seed"] = config.seed;
  summary["device"] = {{"q1", transmon_json(config.device.q1)},
                       {"q2", transmon_json(config.device.q2)},
                       {"j", config.device.j},
                       {"levels", config.device.levels}};
  summary["couplings"] = {{"mu", result.couplings.mu},
                          {"nu", result.couplings.nu},
                          {"epsilon", result.couplings.epsilon},
                          {"delta12", result.couplings.delta12}};
  summary["drive"] = drive_json(result.drive);
  json cal;
  cal["converged"] = result.calibration_converged;
  cal["iterations"] = result.tomo.size();
  if (crosstalk_known) {
    cal["m12_estimate"] = m12_estimate;
    cal["isolation_db"] = isolation_db;
  }
  if (!result.tomo.empty())
    cal["final_rates"] = eh_json(result.tomo.back().eh);
  summary["calibration"] = cal;
  if (wants(config, "echo"))
    summary["per_gate_before"] = eh_json(result.repeated_before);
  if (wants(config, "tomo-report"))
    summary["per_gate_after"] = eh_json(result.repeated_after);
  json rep;
  if (wants(config, "qpt")) {
    rep["process_fidelity"] = result.report.process_fidelity;
    rep["average_gate_fidelity"] = result.report.average_gate_fidelity;
  }
  if (wants(config, "rb")) {
    rep["rb_fidelity"] = result.report.rb_fidelity;
    rep["rb_ci"] = {result.report.rb_ci_lo, result.report.rb_ci_hi};
    rep["coherence_limit"] = result.report.coherence_limit;
  }
  summary["fidelity"] = rep;
  {
    auto names = result.artifacts;
    names.emplace_back("summary.json");
    summary["artifacts"] = names;
  }
  {
    auto os = open_artifact("summary.json");
    os << summary.dump(2) << "\n";
  }
  return result;
}

}  // namespace crcal
