#include "crcal/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "crcal/errors.hpp"

namespace crcal {

namespace {

Mat lowering(int levels) {
  Mat a = Mat::Zero(levels, levels);
  for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

// sin(x)/x, continuous at zero.
double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 : std::sin(x) / x; }

// Static operators of the two-transmon space (angular units where rates
// enter; drive/exchange matrices are unscaled and get their coefficients at
// assembly time).
// Second-order exchange dressing of each transmon's 0->1 frequency, averaged
// over the other transmon's qubit states. A calibrated experiment references
// its frame and drive carriers to the dressed frequencies it measures, so the
// simulation frame subtracts these from the bare ones; idle coherence then
// shows no z drift while the sector-dependent part (the zz coupling) remains.
struct DressedShifts {
  double control = 0, target = 0;  // Hz
};

DressedShifts dressed_shifts(const DeviceConfig& cfg) {
  const double j2 = cfg.j * cfg.j;
  auto repulsion = [&](double den) {
    return std::abs(den) > 1e3 ? j2 / den : 0.0;  // dispersive regime only
  };
  const double r1 = repulsion(detuning(cfg));
  const double r2 = repulsion(detuning(cfg) + cfg.q1.anharmonicity);
  const double r3 = repulsion(detuning(cfg) - cfg.q2.anharmonicity);
  return {r1 - r2 + r3, -r1 - r2 + r3};
}

struct Operators {
  HilbertSpace space;
  Vec duffing;   // diagonal of the two anharmonicity terms, rad/s
  Mat exchange;  // a1^dag a2
  Mat drive1;    // a1
  Mat drive2;    // a2

  double frame_delta = 0;  // detuning between the two frames, rad/s

  Operators(const DeviceConfig& cfg, HilbertSpace sp) : space(sp) {
    const int levels = sp.levels;
    const int dim = sp.dim();
    const auto [shift1, shift2] = dressed_shifts(cfg);
    duffing = Vec::Zero(dim);
    for (int n1 = 0; n1 < levels; ++n1)
      for (int n2 = 0; n2 < levels; ++n2)
        duffing[sp.index(n1, n2)] =
            two_pi * (0.5 * cfg.q1.anharmonicity * n1 * (n1 - 1) +
                      0.5 * cfg.q2.anharmonicity * n2 * (n2 - 1) -
                      shift1 * n1 - shift2 * n2);
    frame_delta = two_pi * (detuning(cfg) + shift1 - shift2);
    const Mat a = lowering(levels);
    const Mat id = Mat::Identity(levels, levels);
    drive1 = kron(a, id);
    drive2 = kron(id, a);
    exchange = drive1.adjoint() * drive2;
  }
};

// Complex drive coefficients at time t. The CR tone leaks onto the target
// with fraction m12 and extra phase phi; the cancellation tone and the echo
// pi-pulse are resonant on their respective transmons.
struct DriveSample {
  cd cr;      // on the control, carrier at the target frequency
  cd target;  // resonant on the target (cross-talk leak + cancellation)
  cd xpi;     // resonant on the control
};

DriveSample sample_drives(const DeviceConfig& cfg, const PulseProgram& program,
                          double t) {
  DriveSample s;
  s.cr = program.cr.value(t);
  s.target = program.cancel.value(t) + cfg.m12 * std::exp(iu * cfg.phi) * s.cr;
  s.xpi = program.xpi.value(t);
  return s;
}

// Assembles the frame-of-each-transmon Hamiltonian with the oscillating
// phases averaged exactly over [t - dt/2, t + dt/2]: a term with static phase
// exp(i w t) integrates to exp(i w t) * sinc(w dt / 2). dt = 0 gives the
// instantaneous Hamiltonian.
void assemble(const DeviceConfig& cfg, const Operators& ops,
              const DriveSample& s, double t, double dt, Mat& h) {
  const double delta = ops.frame_delta;
  const cd frame = std::exp(iu * (delta * t)) * sinc(delta * dt / 2);
  const cd ex = two_pi * cfg.j * frame;
  // The CR carrier sits at the target frequency: in the control's own frame
  // its raising-operator coefficient rotates with the detuning, like the
  // exchange term.
  const cd cr = pi * s.cr * frame;
  const cd tgt = pi * s.target;
  const cd xp = pi * s.xpi;

  h.setZero();
  h.diagonal() = ops.duffing;
  h.noalias() += ex * ops.exchange;
  h.noalias() += std::conj(ex) * ops.exchange.adjoint();
  h.noalias() += std::conj(cr) * ops.drive1;
  h.noalias() += cr * ops.drive1.adjoint();
  h.noalias() += std::conj(tgt) * ops.drive2;
  h.noalias() += tgt * ops.drive2.adjoint();
  h.noalias() += std::conj(xp) * ops.drive1;
  h.noalias() += xp * ops.drive1.adjoint();
}

// Taylor expansion of exp(-i h dt), built Horner style. The order is chosen
// from the spectral-radius bound so the truncation error sits at rounding
// level; with theta <= 0.05 cycles this stays in single digits.
int taylor_order(double theta) {
  double term = 1;
  for (int k = 1; k < 30; ++k) {
    term *= theta / k;
    if (term < 1e-17) return std::max(k, 3);
  }
  return 30;
}

void expm_taylor(const Mat& h, double dt, int order, Mat& u, Mat& tmp) {
  const Eigen::Index n = h.rows();
  u = Mat::Identity(n, n);
  for (int k = order; k >= 1; --k) {
    tmp.noalias() = h * u;
    u = Mat::Identity(n, n) + (-iu * dt / double(k)) * tmp;
  }
}

// Elementwise Lindblad dissipator for per-transmon relaxation and pure
// dephasing. Density-matrix update is second order in dt.
struct Dissipator {
  bool active = false;
  int levels = 3;
  double relax1 = 0, relax2 = 0;    // 1/T1, 1/s
  double dephase1 = 0, dephase2 = 0;  // 1/T2 - 1/(2 T1), 1/s

  Dissipator() = default;
  Dissipator(const DeviceConfig& cfg, HilbertSpace space) : levels(space.levels) {
    auto rates = [](const TransmonParams& q, double& relax, double& dephase) {
      relax = q.t1 > 0 ? 1.0 / q.t1 : 0.0;
      const double total = q.t2 > 0 ? 1.0 / q.t2 : 0.0;
      dephase = std::max(0.0, total - relax / 2);
    };
    rates(cfg.q1, relax1, dephase1);
    rates(cfg.q2, relax2, dephase2);
    active = relax1 > 0 || relax2 > 0 || dephase1 > 0 || dephase2 > 0;
  }

  // out = D(rho)
  void derivative(const Mat& rho, Mat& out) const {
    const int L = levels;
    const int dim = L * L;
    for (int r = 0; r < dim; ++r) {
      const int n1r = r / L, n2r = r % L;
      for (int c = 0; c < dim; ++c) {
        const int n1c = c / L, n2c = c % L;
        cd acc = 0;
        if (n1r + 1 < L && n1c + 1 < L)
          acc += relax1 * std::sqrt(double(n1r + 1) * double(n1c + 1)) *
                 rho(r + L, c + L);
        if (n2r + 1 < L && n2c + 1 < L)
          acc += relax2 * std::sqrt(double(n2r + 1) * double(n2c + 1)) *
                 rho(r + 1, c + 1);
        const double decay =
            0.5 * relax1 * double(n1r + n1c) + 0.5 * relax2 * double(n2r + n2c) +
            dephase1 * double((n1r - n1c) * (n1r - n1c)) +
            dephase2 * double((n2r - n2c) * (n2r - n2c));
        out(r, c) = acc - decay * rho(r, c);
      }
    }
  }

  void apply(Mat& rho, double dt, Mat& k1, Mat& k2) const {
    derivative(rho, k1);
    derivative(k1, k2);
    rho += dt * k1 + (0.5 * dt * dt) * k2;
  }
};

double fastest_frequency(const DeviceConfig& cfg, double peak_drive_amp) {
  return std::max({std::abs(detuning(cfg)), std::abs(cfg.q1.anharmonicity),
                   std::abs(cfg.q2.anharmonicity), peak_drive_amp});
}

void check_step(const DeviceConfig& cfg, const PulseProgram& program,
                const Propagation& prop, HilbertSpace space) {
  if (prop.step_size <= 0) throw ConfigInvalid("step_size must be positive");
  const double cycles =
      prop.step_size * fastest_frequency(cfg, program.peak_drive_amp());
  if (cycles > 0.05 * (1 + 1e-9)) {
    throw StepTooLarge("step advances " + std::to_string(cycles) +
                       " cycles of the fastest frequency (limit 0.05)");
  }
  for (const auto& g : program.instants) {
    if (g.time < 0 || g.time > program.duration + 1e-15)
      throw ConfigInvalid("instant gate time lies outside the program");
    if (g.u.rows() != space.dim() || g.u.cols() != space.dim())
      throw ConfigInvalid("instant gate dimension does not match the space");
  }
}

// Walks the program timeline: uniform midpoint steps between envelope
// breakpoints, calling on_step(u) per step and on_instant(u) for inserted
// ideal gates. Breakpoints keep segment edges aligned with step boundaries.
template <class StepFn, class InstantFn>
void run_steps(const DeviceConfig& cfg, const PulseProgram& program,
               const Propagation& prop, HilbertSpace space, StepFn&& on_step,
               InstantFn&& on_instant) {
  check_step(cfg, program, prop, space);
  const Operators ops(cfg, space);
  const int dim = space.dim();
  Mat h(dim, dim), u(dim, dim), tmp(dim, dim);

  std::set<double> cuts{0.0, program.duration};
  auto add_edges = [&](const PulseEnvelope& env) {
    if (env.sampled()) {
      if (env.duration() < program.duration) cuts.insert(env.duration());
      return;
    }
    double t = 0;
    for (const auto& seg : env.segments()) {
      t += seg.duration;
      if (t < program.duration) cuts.insert(t);
    }
  };
  add_edges(program.cr);
  add_edges(program.cancel);
  add_edges(program.xpi);
  std::vector<InstantGate> instants = program.instants;
  std::sort(instants.begin(), instants.end(),
            [](const InstantGate& a, const InstantGate& b) { return a.time < b.time; });
  for (const auto& g : instants)
    if (g.time > 0 && g.time < program.duration) cuts.insert(g.time);

  const std::vector<double> edges(cuts.begin(), cuts.end());
  std::size_t next_instant = 0;
  auto fire_instants = [&](double t) {
    while (next_instant < instants.size() && instants[next_instant].time <= t + 1e-15) {
      on_instant(instants[next_instant].u);
      ++next_instant;
    }
  };

  fire_instants(0.0);
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
    const double t0 = edges[e], t1 = edges[e + 1];
    const double len = t1 - t0;
    if (len <= 0) continue;
    const int n = std::max(1, int(std::ceil(len / prop.step_size - 1e-9)));
    const double dt = len / n;
    for (int k = 0; k < n; ++k) {
      const double tm = t0 + (k + 0.5) * dt;
      assemble(cfg, ops, sample_drives(cfg, program, tm), tm, dt, h);
      // Gershgorin bound of |H| dt picks the Taylor order exactly.
      const double theta = h.cwiseAbs().rowwise().sum().maxCoeff() * dt;
      expm_taylor(h, dt, taylor_order(theta), u, tmp);
      on_step(u, dt);
    }
    fire_instants(t1);
  }
  fire_instants(program.duration);
}

}  // namespace

double PulseProgram::peak_drive_amp() const {
  return std::max({cr.peak_amp(), cancel.peak_amp(), xpi.peak_amp()});
}

QuantumState ground_state(HilbertSpace space) {
  QuantumState s{space, Mat::Zero(space.dim(), space.dim())};
  s.rho(0, 0) = 1;
  return s;
}

QuantumState pure_product(HilbertSpace space, cd c0, cd c1, cd t0, cd t1) {
  Vec psi = Vec::Zero(space.dim());
  psi[space.index(0, 0)] = c0 * t0;
  psi[space.index(0, 1)] = c0 * t1;
  psi[space.index(1, 0)] = c1 * t0;
  psi[space.index(1, 1)] = c1 * t1;
  const double norm = psi.norm();
  if (norm < 1e-12) throw ConfigInvalid("product state amplitudes are all zero");
  psi /= norm;
  return {space, psi * psi.adjoint()};
}

void apply_ideal_x_control(QuantumState& state) {
  const int L = state.space.levels;
  Mat p = Mat::Identity(L, L);
  p(0, 0) = p(1, 1) = 0;
  p(0, 1) = p(1, 0) = 1;
  const Mat full = kron(p, Mat::Identity(L, L));
  state.rho = full * state.rho * full;
}

Propagation make_propagation(const DeviceConfig& cfg, double peak_drive_amp,
                             NoiseMode noise, double cycles) {
  Propagation prop;
  prop.noise = noise;
  prop.step_size = cycles / fastest_frequency(cfg, peak_drive_amp);
  return prop;
}

PulseProgram cr_program(const DeviceConfig& cfg, const DriveSettings& drive,
                        double duration) {
  const double tail = ringdown_window(cfg.distortion);
  auto padded = [&](double amp, double phase) {
    auto env = PulseEnvelope::tone(amp, phase, duration, drive.ramp_time);
    if (tail > 0) env.append_gap(tail);
    return apply_distortion(env, cfg.distortion);
  };
  PulseProgram p;
  p.duration = duration + tail;
  p.cr = padded(drive.cr_amp, drive.cr_phase);
  if (drive.cancel_amp > 0) p.cancel = padded(drive.cancel_amp, drive.cancel_phase);
  return p;
}

Mat build_hamiltonian(const DeviceConfig& cfg, const PulseProgram& program,
                      double t, HilbertSpace space) {
  const Operators ops(cfg, space);
  Mat h(space.dim(), space.dim());
  assemble(cfg, ops, sample_drives(cfg, program, t), t, 0.0, h);
  return h;
}

Mat build_hamiltonian(const DeviceConfig& cfg, const DriveSettings& drive,
                      double t, HilbertSpace space) {
  // Always-on plateau: flat drives covering any requested time.
  PulseProgram p;
  p.duration = std::max({drive.gate_time, t, 0.0}) + 1e-9;
  PulseEnvelope cr;
  cr.append({p.duration, SegmentShape::flat, drive.cr_amp, drive.cr_phase});
  p.cr = cr;
  if (drive.cancel_amp > 0) {
    PulseEnvelope cc;
    cc.append({p.duration, SegmentShape::flat, drive.cancel_amp, drive.cancel_phase});
    p.cancel = cc;
  }
  return build_hamiltonian(cfg, p, t, space);
}

Mat build_static_hamiltonian(const DeviceConfig& cfg, const PulseProgram& program,
                             double t, HilbertSpace space) {
  const Operators ops(cfg, space);
  const DriveSample s = sample_drives(cfg, program, t);
  const double delta = two_pi * detuning(cfg);
  const int L = space.levels;
  Mat h = Mat::Zero(space.dim(), space.dim());
  // Bare-frame diagonal: anharmonicity ladders plus the detuning on the
  // control, without the dressed-frame shifts used for propagation.
  for (int n1 = 0; n1 < L; ++n1)
    for (int n2 = 0; n2 < L; ++n2)
      h(space.index(n1, n2), space.index(n1, n2)) =
          two_pi * (0.5 * cfg.q1.anharmonicity * n1 * (n1 - 1) +
                    0.5 * cfg.q2.anharmonicity * n2 * (n2 - 1)) +
          delta * n1;
  const cd ex = two_pi * cfg.j;
  h.noalias() += ex * ops.exchange + std::conj(ex) * ops.exchange.adjoint();
  const cd cr = pi * s.cr;
  h.noalias() += std::conj(cr) * ops.drive1 + cr * ops.drive1.adjoint();
  const cd tgt = pi * s.target;
  h.noalias() += std::conj(tgt) * ops.drive2 + tgt * ops.drive2.adjoint();
  // The echo tone carrier is the control frequency: detuned by -delta in the
  // shared target-frequency frame.
  const cd xp = pi * s.xpi * std::exp(-iu * (delta * t));
  h.noalias() += std::conj(xp) * ops.drive1 + xp * ops.drive1.adjoint();
  return h;
}

QuantumState propagate(const DeviceConfig& cfg, const PulseProgram& program,
                       const QuantumState& initial, const Propagation& prop) {
  QuantumState state = initial;
  const HilbertSpace space = initial.space;
  const int dim = space.dim();
  Mat work(dim, dim), k1(dim, dim), k2(dim, dim);
  Dissipator diss;
  if (prop.noise == NoiseMode::lindblad) diss = Dissipator(cfg, space);

  run_steps(
      cfg, program, prop, space,
      [&](const Mat& u, double dt) {
        if (diss.active) diss.apply(state.rho, dt / 2, k1, k2);
        work.noalias() = u * state.rho;
        state.rho.noalias() = work * u.adjoint();
        if (diss.active) diss.apply(state.rho, dt / 2, k1, k2);
      },
      [&](const Mat& g) {
        work.noalias() = g * state.rho;
        state.rho.noalias() = work * g.adjoint();
      });
  return state;
}

Mat pulse_unitary(const DeviceConfig& cfg, const PulseProgram& program,
                  const Propagation& prop, HilbertSpace space) {
  const int dim = space.dim();
  Mat total = Mat::Identity(dim, dim);
  Mat work(dim, dim);
  run_steps(
      cfg, program, prop, space,
      [&](const Mat& u, double) {
        work.noalias() = u * total;
        total.swap(work);
      },
      [&](const Mat& g) {
        work.noalias() = g * total;
        total.swap(work);
      });
  return total;
}

Mat pulse_superop(const DeviceConfig& cfg, const PulseProgram& program,
                  const Propagation& prop, HilbertSpace space) {
  const int dim = space.dim();
  if (prop.noise == NoiseMode::unitary) {
    const Mat u = pulse_unitary(cfg, program, prop, space);
    return kron(u.conjugate(), u);
  }
  const Dissipator diss(cfg, space);
  Mat s = Mat::Identity(dim * dim, dim * dim);
  Mat rho(dim, dim), work(dim, dim), k1(dim, dim), k2(dim, dim);
  auto for_columns = [&](auto&& update) {
    for (int j = 0; j < dim * dim; ++j) {
      Eigen::Map<Mat> col(s.col(j).data(), dim, dim);
      rho = col;
      update(rho);
      col = rho;
    }
  };
  run_steps(
      cfg, program, prop, space,
      [&](const Mat& u, double dt) {
        for_columns([&](Mat& r) {
          if (diss.active) diss.apply(r, dt / 2, k1, k2);
          work.noalias() = u * r;
          r.noalias() = work * u.adjoint();
          if (diss.active) diss.apply(r, dt / 2, k1, k2);
        });
      },
      [&](const Mat& g) {
        for_columns([&](Mat& r) {
          work.noalias() = g * r;
          r.noalias() = work * g.adjoint();
        });
      });
  return s;
}

Mat decay_superop(const DeviceConfig& cfg, double duration, HilbertSpace space) {
  if (duration < 0) throw ConfigInvalid("duration must be non-negative");
  const int dim = space.dim();
  Mat s = Mat::Identity(dim * dim, dim * dim);
  const Dissipator diss(cfg, space);
  if (!diss.active || duration == 0) return s;
  // Second-order elementwise integration; the rates are slow, so a modest
  // step count reaches rounding-level accuracy.
  const double max_rate = std::max({diss.relax1, diss.relax2, diss.dephase1,
                                    diss.dephase2});
  const int n = std::max(64, int(std::ceil(duration * max_rate * 64)));
  const double dt = duration / n;
  Mat rho(dim, dim), k1(dim, dim), k2(dim, dim);
  for (int j = 0; j < dim * dim; ++j) {
    Eigen::Map<Mat> col(s.col(j).data(), dim, dim);
    rho = col;
    for (int k = 0; k < n; ++k) diss.apply(rho, dt, k1, k2);
    col = rho;
  }
  return s;
}

PauliReading measure_pauli(const QuantumState& state, Qubit q, char axis) {
  const HilbertSpace& sp = state.space;
  const Mat& rho = state.rho;
  double pop = 0;
  for (int n1 = 0; n1 < 2; ++n1)
    for (int n2 = 0; n2 < 2; ++n2)
      pop += rho(sp.index(n1, n2), sp.index(n1, n2)).real();

  // Reduced single-qubit matrix elements traced over the spectator's {0,1}.
  cd coh = 0;     // <0| rho_q |1>
  double z = 0;   // <0|rho|0> - <1|rho|1>
  for (int other = 0; other < 2; ++other) {
    if (q == Qubit::control) {
      coh += rho(sp.index(0, other), sp.index(1, other));
      z += rho(sp.index(0, other), sp.index(0, other)).real() -
           rho(sp.index(1, other), sp.index(1, other)).real();
    } else {
      coh += rho(sp.index(other, 0), sp.index(other, 1));
      z += rho(sp.index(other, 0), sp.index(other, 0)).real() -
           rho(sp.index(other, 1), sp.index(other, 1)).real();
    }
  }

  PauliReading out;
  out.leakage = std::max(0.0, 1.0 - pop);
  const double norm = std::max(pop, 1e-12);
  switch (axis) {
    case 'x':
    case 'X':
      out.value = 2 * coh.real() / norm;
      break;
    case 'y':
    case 'Y':
      out.value = -2 * coh.imag() / norm;
      break;
    case 'z':
    case 'Z':
      out.value = z / norm;
      break;
    default:
      throw ConfigInvalid("pauli axis must be one of x, y, z");
  }
  return out;
}

double computational_population(const QuantumState& state) {
  const HilbertSpace& sp = state.space;
  double pop = 0;
  for (int n1 = 0; n1 < 2; ++n1)
    for (int n2 = 0; n2 < 2; ++n2)
      pop += state.rho(sp.index(n1, n2), sp.index(n1, n2)).real();
  return pop;
}

}  // namespace crcal
