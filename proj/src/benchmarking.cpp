#include "crcal/benchmarking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "crcal/errors.hpp"
#include "crcal/fitting.hpp"

namespace crcal {

namespace {

// Indices of the computational product states within the full space.
std::array<int, 4> computational_indices(int levels) {
  return {0, 1, levels, levels + 1};
}

// Embeds a 4x4 computational-subspace operator as identity on the rest.
Mat embed_computational(const Mat& op4, int levels) {
  const int dim = levels * levels;
  Mat full = Mat::Identity(dim, dim);
  const auto idx = computational_indices(levels);
  for (int r = 0; r < 4; ++r) {
    full(idx[r], idx[r]) = 0;
    for (int c = 0; c < 4; ++c) full(idx[r], idx[c]) = op4(r, c);
  }
  return full;
}

Mat computational_block(const Mat& full, int levels) {
  const auto idx = computational_indices(levels);
  Mat block(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) block(r, c) = full(idx[r], idx[c]);
  return block;
}

// Pauli coefficients of a 4x4 operator, normalized so unitaries give a unit
// vector: a_m = tr(P_m u) / 4.
Vec pauli_coefficients(const Mat& u) {
  Vec a(16);
  for (int m = 0; m < 16; ++m) a[m] = (pauli2(m) * u).trace() / 4.0;
  return a;
}

// Linear map between the Pauli transfer matrix and chi, built once:
// R_ij = sum_mn chi_mn (1/4) tr(P_i P_m P_j P_n).
const Eigen::PartialPivLU<Mat>& ptm_chi_basis() {
  static const Eigen::PartialPivLU<Mat> lu = [] {
    Mat b(256, 256);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j)
        for (int m = 0; m < 16; ++m)
          for (int n = 0; n < 16; ++n)
            b(i + 16 * j, m + 16 * n) =
                (pauli2(i) * pauli2(m) * pauli2(j) * pauli2(n)).trace() / 4.0;
    return Eigen::PartialPivLU<Mat>(b);
  }();
  return lu;
}

Mat qubit_state(int which) {
  Vec k(2);
  const double s = 1 / std::sqrt(2.0);
  switch (which) {
    case 0: k << 1, 0; break;
    case 1: k << 0, 1; break;
    case 2: k << s, s; break;
    default: k << s, s * iu; break;
  }
  return k * k.adjoint();
}

}  // namespace

ChiMatrix chi_from_channel(const Channel& channel) {
  // Prepare the 16 product inputs, record input/output Pauli expectations.
  Mat s(16, 16), t(16, 16);
  int col = 0;
  for (int qc = 0; qc < 4; ++qc) {
    for (int qt = 0; qt < 4; ++qt, ++col) {
      const Mat rho_in = kron(qubit_state(qc), qubit_state(qt));
      const Mat rho_out = channel(rho_in);
      for (int i = 0; i < 16; ++i) {
        s(i, col) = (pauli2(i) * rho_in).trace();
        t(i, col) = (pauli2(i) * rho_out).trace();
      }
    }
  }
  Eigen::JacobiSVD<Mat> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond = svd.singularValues()(0) /
                      svd.singularValues()(svd.singularValues().size() - 1);
  if (!std::isfinite(cond) || cond > 1e8)
    throw ReconstructionIllConditioned("input design matrix is singular");
  const Mat r = t * svd.solve(Mat::Identity(16, 16));

  // chi via the fixed basis change, then the nearest Hermitian unit-trace
  // matrix (Frobenius projection).
  Vec rvec(256);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) rvec[i + 16 * j] = r(i, j);
  const Vec cvec = ptm_chi_basis().solve(rvec);
  ChiMatrix chi;
  for (int n = 0; n < 16; ++n)
    for (int m = 0; m < 16; ++m) chi.entries(m, n) = cvec[m + 16 * n];
  chi.entries = (chi.entries + chi.entries.adjoint()) / 2;
  const double trace = chi.entries.trace().real();
  chi.entries += ((1.0 - trace) / 16.0) * Mat::Identity(16, 16);
  return chi;
}

ChiMatrix process_tomography(const DeviceConfig& cfg, const GateSpec& gate,
                             const AcquireOptions& opts) {
  const HilbertSpace space{cfg.levels};
  const PulseProgram program = gate_program(cfg, gate);
  const Propagation prop = make_propagation(cfg, program.peak_drive_amp(),
                                            opts.noise, opts.step_cycles);
  const Mat s = pulse_superop(cfg, program, prop, space);
  const int levels = cfg.levels;
  const int dim = space.dim();
  auto channel = [&](const Mat& rho4) {
    Mat rho = Mat::Zero(dim, dim);
    const auto idx = computational_indices(levels);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) rho(idx[r], idx[c]) = rho4(r, c);
    const Mat out = unvectorize(s * vectorize(rho), dim);
    return computational_block(out, levels);
  };
  return chi_from_channel(channel);
}

Mat apply_chi(const ChiMatrix& chi, const Mat& rho) {
  Mat out = Mat::Zero(4, 4);
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n) {
      if (std::abs(chi.entries(m, n)) < 1e-15) continue;
      out += chi.entries(m, n) * pauli2(m) * rho * pauli2(n);
    }
  return out;
}

double process_fidelity(const ChiMatrix& chi, const Mat& ideal_u) {
  const Vec a = pauli_coefficients(ideal_u);
  return std::real(a.dot(chi.entries * a));  // a^dag chi a
}

double average_gate_fidelity(const ChiMatrix& chi, const Mat& ideal_u) {
  return (4 * process_fidelity(chi, ideal_u) + 1) / 5;
}

double unitary_average_fidelity(const Mat& u_full, const Mat& ideal4,
                                int levels) {
  const Mat block = computational_block(u_full, levels);
  const double d = 4;
  const double pop = (block * block.adjoint()).trace().real();
  const double overlap = std::norm((ideal4.adjoint() * block).trace());
  return (pop + overlap) / (d * (d + 1));
}

GateChannel gate_channel(const DeviceConfig& cfg, const GateSpec& gate,
                         NoiseMode noise, double step_cycles) {
  if (gate.kind != GateKind::echoed_zx)
    throw ConfigInvalid("only the echoed gate has a Clifford ideal action");
  const HilbertSpace space{cfg.levels};
  const PulseProgram program = gate_program(cfg, gate);
  const Propagation prop = make_propagation(cfg, program.peak_drive_amp(),
                                            noise, step_cycles);
  GateChannel ch;
  ch.levels = cfg.levels;
  ch.superop = pulse_superop(cfg, program, prop, space);
  ch.tableau = tableau_of_unitary(ideal_zx(-pi / 2));
  return ch;
}

GateChannel ideal_channel_with_depolarizing(const Mat& u4, double strength,
                                            int levels) {
  if (strength < 0 || strength > 1)
    throw ConfigInvalid("depolarizing strength must lie in [0, 1]");
  const int dim = levels * levels;
  const Mat u = embed_computational(u4, levels);
  Mat s = kron(u.conjugate(), u);
  // rho -> (1-s) rho + s * tr(P rho) * P/4 on the computational block.
  Mat proj = Mat::Zero(dim, dim);
  const auto idx = computational_indices(levels);
  for (int r = 0; r < 4; ++r) proj(idx[r], idx[r]) = 1;
  const Vec vproj = vectorize(proj);
  Mat dep = (1 - strength) * Mat::Identity(dim * dim, dim * dim);
  dep.noalias() += (strength / 4.0) * vproj * vproj.adjoint();
  GateChannel ch;
  ch.levels = levels;
  ch.superop = dep * s;
  ch.tableau = tableau_of_unitary(u4);
  return ch;
}

namespace {

// Least-squares (a, b) for survival ~ a p^m + b at fixed p.
struct DecayFit {
  double a = 0, b = 0, cost = 0;
};

DecayFit solve_ab(const std::vector<int>& lengths,
                  const std::vector<double>& mean, double p) {
  const std::size_t n = lengths.size();
  double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = std::pow(p, lengths[k]);
    s1 += 1;
    sx += x;
    sxx += x * x;
    sy += mean[k];
    sxy += x * mean[k];
  }
  const double det = sxx * s1 - sx * sx;
  DecayFit fit;
  if (std::abs(det) < 1e-14) {
    // p^m constant across lengths: only the offset is identifiable.
    fit.a = 0;
    fit.b = sy / s1;
  } else {
    fit.a = (sxy * s1 - sx * sy) / det;
    fit.b = (sxx * sy - sx * sxy) / det;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double m = fit.a * std::pow(p, lengths[k]) + fit.b;
    fit.cost += (m - mean[k]) * (m - mean[k]);
  }
  return fit;
}

void fit_decay(RbCurve& curve) {
  double lo = 1e9, hi = -1e9;
  for (double v : curve.survival) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-9) {
    // No decay present at all (e.g. a perfect reference): survival is flat.
    curve.a = 0;
    curve.p = 1;
    curve.b = curve.survival.empty() ? 1 : curve.survival.front();
    return;
  }
  const double p = minimize_scalar(
      [&](double q) { return solve_ab(curve.lengths, curve.survival, q).cost; },
      0.0, 1.0, 1e-12);
  const DecayFit fit = solve_ab(curve.lengths, curve.survival, p);
  if (p < 1e-6 || p > 1 - 1e-9)
    throw FitFailure("decay fit pinned p to a bound");
  curve.a = fit.a;
  curve.b = fit.b;
  curve.p = p;
}

double refit_p(const std::vector<int>& lengths, const std::vector<double>& mean) {
  double lo = 1e9, hi = -1e9;
  for (double v : mean) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1e-9) return 1.0;
  return minimize_scalar(
      [&](double q) { return solve_ab(lengths, mean, q).cost; }, 0.0, 1.0,
      1e-10);
}

}  // namespace

RbCurve run_rb(const GateChannel* interleave, const RbOptions& opts, int levels) {
  if (opts.lengths.size() < 2) throw ConfigInvalid("need at least 2 RB lengths");
  if (opts.n_sequences < 10) throw ConfigInvalid("need at least 10 RB sequences");
  const CliffordGroup& group = CliffordGroup::instance();
  const int dim = levels * levels;

  RbCurve curve;
  curve.lengths = opts.lengths;
  curve.interleaved = interleave != nullptr;
  curve.samples.resize(opts.lengths.size());

  Mat rho0 = Mat::Zero(dim, dim);
  rho0(0, 0) = 1;

  for (std::size_t li = 0; li < opts.lengths.size(); ++li) {
    const int m = opts.lengths[li];
    double total = 0;
    for (int seq = 0; seq < opts.n_sequences; ++seq) {
      std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ull * (li * 1000 + seq));
      Mat rho = rho0;
      CliffordTableau net;
      for (int k = 0; k < m; ++k) {
        const CliffordElement& c = group.sample(rng);
        const Mat u = embed_computational(c.u, levels);
        rho = u * rho * u.adjoint();
        net = compose(c.tableau, net);
        if (interleave) {
          rho = unvectorize(interleave->superop * vectorize(rho), dim);
          net = compose(interleave->tableau, net);
        }
      }
      const CliffordElement& rec = group.inverse_of(net);
      const Mat ur = embed_computational(rec.u, levels);
      rho = ur * rho * ur.adjoint();
      const double survival = rho(0, 0).real();
      curve.samples[li].push_back(survival);
      total += survival;
    }
    curve.survival.push_back(total / opts.n_sequences);
  }
  fit_decay(curve);
  return curve;
}

RbFidelity interleaved_fidelity(const RbCurve& ref, const RbCurve& il,
                                int bootstrap, std::uint64_t seed) {
  if (ref.p < 1e-3) throw DivisionDegenerate("reference decay is ~0");
  RbFidelity out;
  out.value = 1 - 0.75 * (1 - il.p / ref.p);

  std::mt19937_64 rng(seed);
  std::vector<double> samples;
  samples.reserve(bootstrap);
  auto resample = [&](const RbCurve& c) {
    std::vector<double> means(c.lengths.size());
    for (std::size_t li = 0; li < c.lengths.size(); ++li) {
      const auto& pool = c.samples[li];
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      double acc = 0;
      for (std::size_t k = 0; k < pool.size(); ++k) acc += pool[pick(rng)];
      means[li] = acc / double(pool.size());
    }
    return refit_p(c.lengths, means);
  };
  for (int b = 0; b < bootstrap; ++b) {
    const double pr = resample(ref);
    const double pi_ = resample(il);
    if (pr < 1e-3) continue;
    samples.push_back(1 - 0.75 * (1 - pi_ / pr));
  }
  if (samples.empty()) throw DivisionDegenerate("bootstrap lost the reference");
  std::sort(samples.begin(), samples.end());
  out.lo = samples[std::size_t(0.05 * (samples.size() - 1))];
  out.hi = samples[std::size_t(0.95 * (samples.size() - 1))];
  return out;
}

double coherence_limit(const DeviceConfig& cfg, double total_duration) {
  const HilbertSpace space{cfg.levels};
  const Mat s = decay_superop(cfg, total_duration, space);
  const int levels = cfg.levels;
  auto channel = [&](const Mat& rho4) {
    Mat rho = Mat::Zero(space.dim(), space.dim());
    const auto idx = computational_indices(levels);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) rho(idx[r], idx[c]) = rho4(r, c);
    const Mat out = unvectorize(s * vectorize(rho), space.dim());
    return computational_block(out, levels);
  };
  const ChiMatrix chi = chi_from_channel(channel);
  return average_gate_fidelity(chi, Mat::Identity(4, 4));
}

void write_chi_csv(std::ostream& os, const ChiMatrix& chi) {
  os << "basis";
  for (int n = 0; n < 16; ++n)
    os << "," << pauli2_label(n) << "_re," << pauli2_label(n) << "_im";
  os << "\n";
  char buf[64];
  for (int m = 0; m < 16; ++m) {
    os << pauli2_label(m);
    for (int n = 0; n < 16; ++n) {
      std::snprintf(buf, sizeof buf, ",%.12g,%.12g", chi.entries(m, n).real(),
                    chi.entries(m, n).imag());
      os << buf;
    }
    os << "\n";
  }
}

void write_rb_csv(std::ostream& os, const RbCurve& ref, const RbCurve* il) {
  os << "length,mode,mean,stderr\n";
  auto dump = [&](const RbCurve& c, const char* mode) {
    char buf[128];
    for (std::size_t li = 0; li < c.lengths.size(); ++li) {
      const auto& pool = c.samples[li];
      double var = 0;
      for (double v : pool) var += (v - c.survival[li]) * (v - c.survival[li]);
      const double se =
          pool.size() > 1 ? std::sqrt(var / (pool.size() * (pool.size() - 1)))
                          : 0.0;
      std::snprintf(buf, sizeof buf, "%d,%s,%.12g,%.12g\n", c.lengths[li], mode,
                    c.survival[li], se);
      os << buf;
    }
  };
  dump(ref, "reference");
  if (il) dump(*il, "interleaved");
}

}  // namespace crcal
