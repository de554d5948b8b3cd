#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crcal/errors.hpp"
#include "crcal/fitting.hpp"
#include "crcal/pipeline.hpp"

namespace py = pybind11;
using namespace crcal;

PYBIND11_MODULE(_core, m) {
  m.doc() = "two-transmon cross-resonance gate calibration and benchmarking";
#ifdef CRCAL_VERSION_INFO
  m.attr("__version__") = CRCAL_VERSION_INFO;
#endif

  auto exc_error = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigInvalid>(m, "ConfigInvalid", exc_error);
  py::register_exception<DegenerateDetuning>(m, "DegenerateDetuning", exc_error);
  py::register_exception<StepTooLarge>(m, "StepTooLarge", exc_error);
  py::register_exception<CrossingOutOfRange>(m, "CrossingOutOfRange", exc_error);
  py::register_exception<ReconstructionIllConditioned>(
      m, "ReconstructionIllConditioned", exc_error);
  py::register_exception<FitFailure>(m, "FitFailure", exc_error);
  py::register_exception<DivisionDegenerate>(m, "DivisionDegenerate", exc_error);
  py::register_exception<NotConverged>(m, "NotConverged", exc_error);
  py::register_exception<StageFailed>(m, "StageFailed", exc_error);

  py::class_<TransmonParams>(m, "TransmonParams")
      .def(py::init<>())
      .def_readwrite("frequency", &TransmonParams::frequency)
      .def_readwrite("anharmonicity", &TransmonParams::anharmonicity)
      .def_readwrite("t1", &TransmonParams::t1)
      .def_readwrite("t2", &TransmonParams::t2);

  py::class_<LineDistortion>(m, "LineDistortion")
      .def(py::init<>())
      .def_readwrite("ringup_time", &LineDistortion::ringup_time)
      .def_readwrite("edge_phase_error", &LineDistortion::edge_phase_error);

  py::class_<DeviceConfig>(m, "DeviceConfig")
      .def(py::init<>())
      .def_readwrite("q1", &DeviceConfig::q1)
      .def_readwrite("q2", &DeviceConfig::q2)
      .def_readwrite("j", &DeviceConfig::j)
      .def_readwrite("m12", &DeviceConfig::m12)
      .def_readwrite("phi", &DeviceConfig::phi)
      .def_readwrite("distortion", &DeviceConfig::distortion)
      .def_readwrite("levels", &DeviceConfig::levels)
      .def("validate", &DeviceConfig::validate);

  py::class_<DerivedCouplings>(m, "DerivedCouplings")
      .def_readonly("mu", &DerivedCouplings::mu)
      .def_readonly("nu", &DerivedCouplings::nu)
      .def_readonly("epsilon", &DerivedCouplings::epsilon)
      .def_readonly("delta12", &DerivedCouplings::delta12);

  py::class_<DriveSettings>(m, "DriveSettings")
      .def(py::init<>())
      .def_readwrite("cr_amp", &DriveSettings::cr_amp)
      .def_readwrite("cr_phase", &DriveSettings::cr_phase)
      .def_readwrite("cancel_amp", &DriveSettings::cancel_amp)
      .def_readwrite("cancel_phase", &DriveSettings::cancel_phase)
      .def_readwrite("gate_time", &DriveSettings::gate_time)
      .def_readwrite("ramp_time", &DriveSettings::ramp_time)
      .def("cancel_x", &DriveSettings::cancel_x)
      .def("cancel_y", &DriveSettings::cancel_y)
      .def("set_cancel_xy", &DriveSettings::set_cancel_xy);

  py::class_<XpiSettings>(m, "XpiSettings")
      .def(py::init<>())
      .def_readwrite("duration", &XpiSettings::duration)
      .def_readwrite("ramp_time", &XpiSettings::ramp_time)
      .def_readwrite("ideal", &XpiSettings::ideal)
      .def("amp", &XpiSettings::amp);

  py::enum_<GateKind>(m, "GateKind")
      .value("half_cr", GateKind::half_cr)
      .value("echoed_zx", GateKind::echoed_zx);

  py::class_<GateSpec>(m, "GateSpec")
      .def(py::init<>())
      .def_readwrite("kind", &GateSpec::kind)
      .def_readwrite("drive", &GateSpec::drive)
      .def_readwrite("x_pi", &GateSpec::x_pi)
      .def("duration", &GateSpec::duration);

  py::enum_<RateUnit>(m, "RateUnit")
      .value("per_second", RateUnit::per_second)
      .value("per_gate", RateUnit::per_gate);

  py::enum_<NoiseMode>(m, "NoiseMode")
      .value("unitary", NoiseMode::unitary)
      .value("lindblad", NoiseMode::lindblad);

  py::class_<EffectiveHamiltonian>(m, "EffectiveHamiltonian")
      .def(py::init<>())
      .def_readwrite("zx", &EffectiveHamiltonian::zx)
      .def_readwrite("zy", &EffectiveHamiltonian::zy)
      .def_readwrite("ix", &EffectiveHamiltonian::ix)
      .def_readwrite("iy", &EffectiveHamiltonian::iy)
      .def_readwrite("iz", &EffectiveHamiltonian::iz)
      .def_readwrite("zz", &EffectiveHamiltonian::zz)
      .def_readwrite("xi", &EffectiveHamiltonian::xi)
      .def_readwrite("yi", &EffectiveHamiltonian::yi)
      .def_readwrite("zi", &EffectiveHamiltonian::zi)
      .def_readwrite("unit", &EffectiveHamiltonian::unit)
      .def_readwrite("low_confidence", &EffectiveHamiltonian::low_confidence);

  py::class_<AcquireOptions>(m, "AcquireOptions")
      .def(py::init<>())
      .def_readwrite("noise", &AcquireOptions::noise)
      .def_readwrite("step_cycles", &AcquireOptions::step_cycles)
      .def_readwrite("shots", &AcquireOptions::shots)
      .def_readwrite("seed", &AcquireOptions::seed)
      .def_readwrite("target0", &AcquireOptions::target0)
      .def_readwrite("target1", &AcquireOptions::target1);

  py::class_<BlochTrajectory>(m, "BlochTrajectory")
      .def(py::init<>())
      .def_readwrite("ticks", &BlochTrajectory::ticks)
      .def_readwrite("x", &BlochTrajectory::x)
      .def_readwrite("y", &BlochTrajectory::y)
      .def_readwrite("z", &BlochTrajectory::z)
      .def_readwrite("leakage", &BlochTrajectory::leakage)
      .def_readwrite("control_prep", &BlochTrajectory::control_prep)
      .def_readwrite("per_gate", &BlochTrajectory::per_gate);

  py::class_<RotationFit>(m, "RotationFit")
      .def_readonly("axis", &RotationFit::axis)
      .def_readonly("rate", &RotationFit::rate)
      .def_readonly("offset", &RotationFit::offset)
      .def_readonly("residual", &RotationFit::residual)
      .def_readonly("degenerate", &RotationFit::degenerate);

  py::class_<TrajectorySource>(m, "TrajectorySource");
  py::class_<SimulatedSource, TrajectorySource>(m, "SimulatedSource")
      .def(py::init<DeviceConfig, AcquireOptions>(), py::arg("device"),
           py::arg("options") = AcquireOptions{})
      .def("continuous", &SimulatedSource::continuous)
      .def("repeated", &SimulatedSource::repeated);

  py::enum_<SweepKind>(m, "SweepKind")
      .value("global_phase", SweepKind::global_phase)
      .value("global_amp", SweepKind::global_amp)
      .value("cancel_x", SweepKind::cancel_x)
      .value("cancel_y", SweepKind::cancel_y);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("kind", &SweepResult::kind)
      .def_readonly("scheme", &SweepResult::scheme)
      .def_readonly("values", &SweepResult::values)
      .def_readonly("coefficient", &SweepResult::coefficient)
      .def_readonly("slope", &SweepResult::slope)
      .def_readonly("intercept", &SweepResult::intercept)
      .def_readonly("r_squared", &SweepResult::r_squared)
      .def_readonly("target", &SweepResult::target)
      .def_readonly("update", &SweepResult::update)
      .def_readonly("reliable", &SweepResult::reliable);

  py::class_<TomographyRecord>(m, "TomographyRecord")
      .def_readonly("iteration", &TomographyRecord::iteration)
      .def_readonly("eh", &TomographyRecord::eh);

  py::class_<CalibrationSession>(m, "CalibrationSession")
      .def_readwrite("target_rate", &CalibrationSession::target_rate)
      .def_readwrite("drive", &CalibrationSession::drive)
      .def_readwrite("x_pi", &CalibrationSession::x_pi)
      .def_readwrite("tol", &CalibrationSession::tol)
      .def_readwrite("max_iters", &CalibrationSession::max_iters)
      .def_readwrite("times", &CalibrationSession::times)
      .def_readwrite("counts", &CalibrationSession::counts)
      .def_readonly("tomo_history", &CalibrationSession::tomo_history)
      .def_readonly("sweep_history", &CalibrationSession::sweep_history)
      .def_readonly("log", &CalibrationSession::log)
      .def_readonly("converged", &CalibrationSession::converged);

  py::class_<TransientOptions>(m, "TransientOptions")
      .def(py::init<>())
      .def_readwrite("phase_range", &TransientOptions::phase_range)
      .def_readwrite("amp_fraction", &TransientOptions::amp_fraction)
      .def_readwrite("cancel_fraction", &TransientOptions::cancel_fraction)
      .def_readwrite("n_points", &TransientOptions::n_points);

  py::class_<ChiMatrix>(m, "ChiMatrix")
      .def(py::init<>())
      .def_readwrite("entries", &ChiMatrix::entries);

  py::class_<GateChannel>(m, "GateChannel")
      .def_readonly("superop", &GateChannel::superop)
      .def_readonly("levels", &GateChannel::levels);

  py::class_<RbOptions>(m, "RbOptions")
      .def(py::init<>())
      .def_readwrite("lengths", &RbOptions::lengths)
      .def_readwrite("n_sequences", &RbOptions::n_sequences)
      .def_readwrite("seed", &RbOptions::seed);

  py::class_<RbCurve>(m, "RbCurve")
      .def_readonly("lengths", &RbCurve::lengths)
      .def_readonly("survival", &RbCurve::survival)
      .def_readonly("samples", &RbCurve::samples)
      .def_readonly("a", &RbCurve::a)
      .def_readonly("p", &RbCurve::p)
      .def_readonly("b", &RbCurve::b)
      .def_readonly("interleaved", &RbCurve::interleaved);

  py::class_<RbFidelity>(m, "RbFidelity")
      .def_readonly("value", &RbFidelity::value)
      .def_readonly("lo", &RbFidelity::lo)
      .def_readonly("hi", &RbFidelity::hi);

  py::class_<FidelityReport>(m, "FidelityReport")
      .def_readonly("process_fidelity", &FidelityReport::process_fidelity)
      .def_readonly("average_gate_fidelity", &FidelityReport::average_gate_fidelity)
      .def_readonly("rb_fidelity", &FidelityReport::rb_fidelity)
      .def_readonly("rb_ci_lo", &FidelityReport::rb_ci_lo)
      .def_readonly("rb_ci_hi", &FidelityReport::rb_ci_hi)
      .def_readonly("coherence_limit", &FidelityReport::coherence_limit);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("device", &RunConfig::device)
      .def_readwrite("target_rate", &RunConfig::target_rate)
      .def_readwrite("stages", &RunConfig::stages)
      .def_readwrite("shots", &RunConfig::shots)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("noise", &RunConfig::noise)
      .def_readwrite("step_cycles", &RunConfig::step_cycles)
      .def_readwrite("rb", &RunConfig::rb)
      .def_static("from_json_text", &RunConfig::from_json_text)
      .def_static("from_file", &RunConfig::from_file)
      .def("validate", &RunConfig::validate);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("couplings", &PipelineResult::couplings)
      .def_readonly("drive", &PipelineResult::drive)
      .def_readonly("tomo", &PipelineResult::tomo)
      .def_readonly("repeated_before", &PipelineResult::repeated_before)
      .def_readonly("repeated_after", &PipelineResult::repeated_after)
      .def_readonly("report", &PipelineResult::report)
      .def_readonly("calibration_converged", &PipelineResult::calibration_converged)
      .def_readonly("artifacts", &PipelineResult::artifacts);

  m.def("detuning", &detuning);
  m.def("derived_couplings", &derived_couplings);
  m.def("predicted_effective_hamiltonian", &predicted_effective_hamiltonian);
  m.def("predicted_cancellation", &predicted_cancellation);
  m.def("compose_half", &compose_half, py::arg("drive"),
        py::arg("x_pi") = XpiSettings{});
  m.def("compose_echo", &compose_echo, py::arg("drive"),
        py::arg("x_pi") = XpiSettings{});
  m.def("ideal_zx", &ideal_zx);
  m.def(
      "gate_unitary",
      [](const DeviceConfig& cfg, const GateSpec& gate, double step_cycles) {
        const PulseProgram program = gate_program(cfg, gate);
        const Propagation prop = make_propagation(
            cfg, program.peak_drive_amp(), NoiseMode::unitary, step_cycles);
        return pulse_unitary(cfg, program, prop, HilbertSpace{cfg.levels});
      },
      py::arg("device"), py::arg("gate"), py::arg("step_cycles") = 0.03);

  m.def("acquire_continuous", &acquire_continuous, py::arg("device"),
        py::arg("drive"), py::arg("control_prep"), py::arg("times"),
        py::arg("options") = AcquireOptions{});
  m.def("acquire_repeated", &acquire_repeated, py::arg("device"),
        py::arg("gate"), py::arg("control_prep"), py::arg("counts"),
        py::arg("options") = AcquireOptions{});
  m.def("fit_rotation", &fit_rotation, py::arg("trajectory"),
        py::arg("expected_rate") = 0.0);
  m.def("hamiltonian_tomography", &hamiltonian_tomography, py::arg("traj0"),
        py::arg("traj1"), py::arg("expected_rate") = 0.0);

  m.def("default_times", &default_times, py::arg("target_rate"),
        py::arg("n") = 48, py::arg("periods") = 2.0);
  m.def("default_counts", &default_counts, py::arg("n_max") = 16);
  m.def("make_session", &make_session, py::arg("source"),
        py::arg("target_rate"), py::arg("initial"),
        py::keep_alive<0, 1>());
  m.def("cancel_crosstalk",
        [](CalibrationSession& s) { cancel_crosstalk(s); });
  m.def("extract_classical_crosstalk", &extract_classical_crosstalk);
  m.def("sweep_parameter", &sweep_parameter, py::arg("session"),
        py::arg("kind"), py::arg("half_range"), py::arg("n_points"),
        py::arg("scheme"));
  m.def("apply_sweep_update", &apply_sweep_update);
  m.def("correct_transients",
        [](CalibrationSession& s, const TransientOptions& o) {
          correct_transients(s, o);
        },
        py::arg("session"), py::arg("options") = TransientOptions{});

  m.def("chi_from_channel", &chi_from_channel);
  m.def("process_tomography", &process_tomography, py::arg("device"),
        py::arg("gate"), py::arg("options") = AcquireOptions{});
  m.def("apply_chi", &apply_chi);
  m.def("process_fidelity", &process_fidelity);
  m.def("average_gate_fidelity", &average_gate_fidelity);
  m.def("unitary_average_fidelity", &unitary_average_fidelity,
        py::arg("u_full"), py::arg("ideal4"), py::arg("levels") = 3);
  m.def("gate_channel", &gate_channel, py::arg("device"), py::arg("gate"),
        py::arg("noise"), py::arg("step_cycles") = 0.03);
  m.def("ideal_channel_with_depolarizing", &ideal_channel_with_depolarizing,
        py::arg("u4"), py::arg("strength"), py::arg("levels") = 3);
  m.def(
      "run_rb",
      [](const GateChannel* interleave, const RbOptions& opts, int levels) {
        return run_rb(interleave, opts, levels);
      },
      py::arg("interleave").none(true) = nullptr,
      py::arg("options") = RbOptions{}, py::arg("levels") = 3);
  m.def("interleaved_fidelity", &interleaved_fidelity, py::arg("reference"),
        py::arg("interleaved"), py::arg("bootstrap") = 1000,
        py::arg("seed") = 99);
  m.def("coherence_limit", &coherence_limit);

  m.def("known_stages", [] { return known_stages(); });
  m.def("run_pipeline", &run_pipeline);
}
