#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <numbers>

namespace crcal {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cd iu{0.0, 1.0};  // imaginary unit

// Kronecker product, first factor = most significant index.
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Single-qubit Paulis; index order {I, X, Y, Z}.
inline const Mat& pauli1(int k) {
  static const Mat p[4] = {
      (Mat(2, 2) << 1, 0, 0, 1).finished(),
      (Mat(2, 2) << 0, 1, 1, 0).finished(),
      (Mat(2, 2) << 0, cd(0, -1), cd(0, 1), 0).finished(),
      (Mat(2, 2) << 1, 0, 0, -1).finished()};
  return p[k];
}

// Two-qubit Pauli basis in control-first order: index = 4*c + t, so the
// sequence runs II, IX, IY, IZ, XI, XX, ... with the first letter = control.
inline const Mat& pauli2(int k) {
  static const std::array<Mat, 16> basis = [] {
    std::array<Mat, 16> b;
    for (int c = 0; c < 4; ++c)
      for (int t = 0; t < 4; ++t) b[4 * c + t] = kron(pauli1(c), pauli1(t));
    return b;
  }();
  return basis[k];
}

inline const char* pauli2_label(int k) {
  static const char* labels[16] = {"II", "IX", "IY", "IZ", "XI", "XX",
                                   "XY", "XZ", "YI", "YX", "YY", "YZ",
                                   "ZI", "ZX", "ZY", "ZZ"};
  return labels[k];
}

// Column-major vectorization: vec(A X B) = kron(B^T, A) vec(X).
inline Vec vectorize(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat unvectorize(const Vec& v, Eigen::Index rows) {
  return Eigen::Map<const Mat>(v.data(), rows, v.size() / rows);
}

// exp(-i * H * t) for Hermitian H via eigendecomposition (exactly unitary).
inline Mat expm_hermitian(const Mat& h, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Vec phases = (-iu * t * es.eigenvalues().array().cast<cd>()).exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace crcal
