#include <array>
#include <random>
#include <sstream>
#include <string>

#include "crcal/benchmarking.hpp"
#include "crcal/errors.hpp"
#include "doctest.h"
#include "test_util.hpp"

namespace crcal {
namespace {

using testing::mat_distance;
using testing::quiet_device;
using testing::reference_device;

Channel unitary_channel(const Mat& u) {
  return [u](const Mat& rho) { return Mat(u * rho * u.adjoint()); };
}

Channel depolarized_unitary(const Mat& u, double strength) {
  return [u, strength](const Mat& rho) {
    const Mat pure = u * rho * u.adjoint();
    return Mat((1 - strength) * pure + strength * (rho.trace() / 4.0) *
                                           Mat::Identity(4, 4));
  };
}

Mat random_density(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Mat g(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) g(r, c) = cd(n(rng), n(rng));
  Mat rho = g * g.adjoint();
  return rho / rho.trace().real();
}

// Identity-padded embedding of a computational-subspace operator.
Mat embed4(const Mat& op4, int levels = 3) {
  const std::array<int, 4> idx{0, 1, levels, levels + 1};
  Mat full = Mat::Identity(levels * levels, levels * levels);
  for (int r = 0; r < 4; ++r) {
    full(idx[r], idx[r]) = 0;
    for (int c = 0; c < 4; ++c) full(idx[r], idx[c]) = op4(r, c);
  }
  return full;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("identity channel reconstructs a pure identity process matrix") {
  const ChiMatrix chi = chi_from_channel([](const Mat& rho) { return rho; });
  CHECK(std::abs(chi.entries(0, 0) - 1.0) < 1e-10);
  double off = 0;
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n)
      if (m || n) off = std::max(off, std::abs(chi.entries(m, n)));
  CHECK(off < 1e-10);
  CHECK(process_fidelity(chi, Mat::Identity(4, 4)) == doctest::Approx(1.0));
  CHECK(average_gate_fidelity(chi, Mat::Identity(4, 4)) == doctest::Approx(1.0));
}

TEST_CASE("unitary channel gives the rank-one pauli outer product") {
  const Mat u = ideal_zx(-pi / 2);  // (II + i ZX) / sqrt(2)
  const ChiMatrix chi = chi_from_channel(unitary_channel(u));
  CHECK(std::abs(chi.entries(0, 0) - 0.5) < 1e-9);
  CHECK(std::abs(chi.entries(13, 13) - 0.5) < 1e-9);
  CHECK(std::abs(chi.entries(0, 13) - cd(0, -0.5)) < 1e-9);
  CHECK(std::abs(chi.entries(13, 0) - cd(0, 0.5)) < 1e-9);
  CHECK(process_fidelity(chi, u) == doctest::Approx(1.0));
  CHECK(average_gate_fidelity(chi, u) == doctest::Approx(1.0));
}

TEST_CASE("doing nothing scores one half against a quarter turn") {
  const ChiMatrix chi = chi_from_channel([](const Mat& rho) { return rho; });
  CHECK(process_fidelity(chi, ideal_zx(-pi / 2)) == doctest::Approx(0.5));
  CHECK(average_gate_fidelity(chi, ideal_zx(-pi / 2)) == doctest::Approx(0.6));
}

TEST_CASE("chi reproduces the channel action on arbitrary states") {
  const Channel channel = depolarized_unitary(ideal_zx(0.7), 0.25);
  const ChiMatrix chi = chi_from_channel(channel);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 4; ++k) {
    const Mat rho = random_density(rng);
    CHECK(mat_distance(apply_chi(chi, rho), channel(rho)) < 1e-8);
  }
}

TEST_CASE("trace projection spreads leakage loss over the identity") {
  const ChiMatrix chi =
      chi_from_channel([](const Mat& rho) { return Mat(0.9 * rho); });
  CHECK(chi.entries.trace().real() == doctest::Approx(1.0));
  CHECK(chi.entries(0, 0).real() == doctest::Approx(0.9 + 0.1 / 16));
}

TEST_CASE("unitary average fidelity measures the computational block") {
  const Mat u = ideal_zx(-pi / 2);
  CHECK(unitary_average_fidelity(embed4(u), u) == doctest::Approx(1.0));
  // Overlap |tr(u)|^2 = 8 and full population: (8 + 4) / 20, matching the
  // identity-channel score against the same quarter turn.
  CHECK(unitary_average_fidelity(embed4(u), Mat::Identity(4, 4)) ==
        doctest::Approx(0.6));
  // A uniformly lossy block scales both terms by the survival.
  CHECK(unitary_average_fidelity(embed4(std::sqrt(0.9) * u), u) ==
        doctest::Approx(0.9));
  CHECK(unitary_average_fidelity(u, u, 2) == doctest::Approx(1.0));
}

TEST_CASE("depolarizing channel builder validates and acts exactly") {
  CHECK_THROWS_AS(ideal_channel_with_depolarizing(Mat::Identity(4, 4), -0.01),
                  ConfigInvalid);
  CHECK_THROWS_AS(ideal_channel_with_depolarizing(Mat::Identity(4, 4), 1.01),
                  ConfigInvalid);

  const GateChannel ch =
      ideal_channel_with_depolarizing(Mat::Identity(4, 4), 0.2);
  CHECK(ch.levels == 3);
  CHECK(ch.tableau == CliffordTableau{});
  Mat rho = Mat::Zero(9, 9);
  rho(0, 0) = 1;
  const Mat out = unvectorize(ch.superop * vectorize(rho), 9);
  CHECK(out(0, 0).real() == doctest::Approx(0.8 + 0.05));
  CHECK(out(1, 1).real() == doctest::Approx(0.05));
  CHECK(out(3, 3).real() == doctest::Approx(0.05));
  CHECK(out(4, 4).real() == doctest::Approx(0.05));
  CHECK(out.trace().real() == doctest::Approx(1.0));

  // States outside the computational block only feel the uniform loss.
  Mat leaked = Mat::Zero(9, 9);
  leaked(8, 8) = 1;
  const Mat lout = unvectorize(ch.superop * vectorize(leaked), 9);
  CHECK(lout(8, 8).real() == doctest::Approx(0.8));

  const GateChannel rot =
      ideal_channel_with_depolarizing(ideal_zx(-pi / 2), 0.0);
  CHECK(rot.tableau == tableau_of_unitary(ideal_zx(-pi / 2)));
  Mat rrho = Mat::Zero(9, 9);
  rrho(0, 0) = 1;
  const Mat rout = unvectorize(rot.superop * vectorize(rrho), 9);
  CHECK(rout(0, 0).real() == doctest::Approx(0.5));
  CHECK(rout(1, 1).real() == doctest::Approx(0.5));
  // u|00> = (|00> + i|01>)/sqrt2, so the 00-01 coherence is -i/2.
  CHECK(std::abs(rout(0, 1) - cd(0, -0.5)) < 1e-12);
}

TEST_CASE("rb input validation") {
  RbOptions opts;
  opts.lengths = {8};
  CHECK_THROWS_AS(run_rb(nullptr, opts), ConfigInvalid);
  opts.lengths = {2, 4};
  opts.n_sequences = 9;
  CHECK_THROWS_AS(run_rb(nullptr, opts), ConfigInvalid);
}

TEST_CASE("reference rb with perfect cliffords stays flat") {
  RbOptions opts;
  opts.lengths = {1, 2, 4};
  opts.n_sequences = 10;
  const RbCurve curve = run_rb(nullptr, opts);
  CHECK(!curve.interleaved);
  REQUIRE(curve.samples.size() == 3);
  CHECK(curve.samples[0].size() == 10);
  for (double v : curve.survival) CHECK(std::abs(v - 1.0) < 1e-9);
  CHECK(curve.a == 0);
  CHECK(curve.p == 1);
  CHECK(curve.b == doctest::Approx(1.0));
}

TEST_CASE("interleaved depolarizing noise decays at the channel strength") {
  const double strength = 0.2;
  const GateChannel ch =
      ideal_channel_with_depolarizing(ideal_zx(-pi / 2), strength);
  RbOptions opts;
  opts.lengths = {2, 4, 8, 16};
  opts.n_sequences = 10;
  const RbCurve curve = run_rb(&ch, opts);
  CHECK(curve.interleaved);
  // Depolarizing commutes with every Clifford, so each sequence survives at
  // exactly 0.75 (1-s)^m + 0.25.
  for (std::size_t k = 0; k < curve.lengths.size(); ++k) {
    const double expect = 0.75 * std::pow(1 - strength, curve.lengths[k]) + 0.25;
    CHECK(std::abs(curve.survival[k] - expect) < 1e-9);
  }
  CHECK(std::abs(curve.p - (1 - strength)) < 1e-7);
  CHECK(curve.a == doctest::Approx(0.75));
  CHECK(curve.b == doctest::Approx(0.25));
}

TEST_CASE("interleaved fidelity combines the two decays") {
  RbOptions opts;
  opts.lengths = {2, 4, 8, 16};
  opts.n_sequences = 10;
  const RbCurve ref = run_rb(nullptr, opts);
  const GateChannel ch =
      ideal_channel_with_depolarizing(ideal_zx(-pi / 2), 0.2);
  const RbCurve il = run_rb(&ch, opts);

  const RbFidelity fid = interleaved_fidelity(ref, il, 200);
  CHECK(fid.value == doctest::Approx(1 - 0.75 * 0.2));
  CHECK(fid.lo <= fid.value + 1e-9);
  CHECK(fid.value <= fid.hi + 1e-9);
  // Noise-free samples leave nothing for the bootstrap to spread.
  CHECK(fid.hi - fid.lo < 1e-6);

  RbCurve dead = ref;
  dead.p = 1e-4;
  CHECK_THROWS_AS(interleaved_fidelity(dead, il), DivisionDegenerate);
}

TEST_CASE("gate channel requires the echoed gate") {
  DriveSettings drive;
  drive.cr_amp = 1e6;
  drive.gate_time = 100e-9;
  const DeviceConfig cfg = quiet_device();
  CHECK_THROWS_AS(gate_channel(cfg, compose_half(drive), NoiseMode::unitary),
                  ConfigInvalid);

  XpiSettings xpi;
  xpi.ideal = true;
  const GateChannel ch =
      gate_channel(cfg, compose_echo(drive, xpi), NoiseMode::unitary);
  CHECK(ch.levels == 3);
  CHECK(ch.superop.rows() == 81);
  CHECK(ch.tableau == tableau_of_unitary(ideal_zx(-pi / 2)));
}

TEST_CASE("process tomography of an echoed idle is the identity channel") {
  DeviceConfig cfg = quiet_device();
  cfg.j = 0;
  cfg.m12 = 0;
  DriveSettings drive;
  drive.gate_time = 80e-9;
  XpiSettings xpi;
  xpi.ideal = true;
  const GateSpec gate = compose_echo(drive, xpi);

  const ChiMatrix chi = process_tomography(cfg, gate);
  CHECK(std::abs(chi.entries(0, 0) - 1.0) < 1e-9);
  double off = 0;
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n)
      if (m || n) off = std::max(off, std::abs(chi.entries(m, n)));
  CHECK(off < 1e-9);
  CHECK(process_fidelity(chi, ideal_zx(-pi / 2)) == doctest::Approx(0.5));
}

TEST_CASE("coherence limit matches the product of single-qubit decay channels") {
  const DeviceConfig cfg = reference_device();
  const double t = 200e-9;
  auto qubit_fidelity = [t](const TransmonParams& q) {
    return (1 + 2 * std::exp(-t / q.t2) + std::exp(-t / q.t1)) / 4;
  };
  const double f_pro = qubit_fidelity(cfg.q1) * qubit_fidelity(cfg.q2);
  const double expected = (4 * f_pro + 1) / 5;
  CHECK(coherence_limit(cfg, t) == doctest::Approx(expected).epsilon(1e-6));
  CHECK(std::abs(coherence_limit(quiet_device(), t) - 1.0) < 1e-9);
}

TEST_CASE("chi csv layout") {
  const ChiMatrix chi = chi_from_channel([](const Mat& rho) { return rho; });
  std::ostringstream os;
  write_chi_csv(os, chi);
  const std::string text = os.str();
  CHECK(text.rfind("basis,II_re,II_im,IX_re,IX_im", 0) == 0);
  CHECK(count_lines(text) == 17);
  const std::string second = text.substr(text.find('\n') + 1);
  CHECK(second.rfind("II,1,", 0) == 0);
}

TEST_CASE("rb csv layout") {
  RbCurve ref;
  ref.lengths = {2};
  ref.survival = {0.6};
  ref.samples = {{0.5, 0.7}};
  RbCurve il = ref;
  il.interleaved = true;
  il.survival = {0.4};
  il.samples = {{0.4, 0.4}};
  std::ostringstream os;
  write_rb_csv(os, ref, &il);
  const std::string text = os.str();
  CHECK(text.rfind("length,mode,mean,stderr", 0) == 0);
  CHECK(count_lines(text) == 3);
  CHECK(text.find("2,reference,0.6,0.1\n") != std::string::npos);
  CHECK(text.find("2,interleaved,0.4,0\n") != std::string::npos);
}

}  // namespace crcal
