#include "crcal/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "crcal/errors.hpp"
#include "crcal/linalg.hpp"

namespace crcal {

LmResult fit_least_squares(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
    Eigen::VectorXd initial, const LmOptions& opts) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  const auto n = initial.size();
  VectorXd p = std::move(initial);
  VectorXd r = residuals(p);
  double cost = r.squaredNorm();
  double lambda = opts.lambda0;

  LmResult out;
  for (out.iters = 0; out.iters < opts.max_iters; ++out.iters) {
    MatrixXd jac(r.size(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(p[j]));
      VectorXd pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      jac.col(j) = (residuals(pp) - residuals(pm)) / (2 * h);
    }
    const VectorXd g = jac.transpose() * r;
    const MatrixXd jtj = jac.transpose() * jac;

    bool improved = false;
    for (int inner = 0; inner < 12 && !improved; ++inner) {
      MatrixXd damped = jtj;
      for (Eigen::Index j = 0; j < n; ++j)
        damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
      const VectorXd step = damped.ldlt().solve(-g);
      const VectorXd p2 = p + step;
      const VectorXd r2 = residuals(p2);
      const double cost2 = r2.squaredNorm();
      if (cost2 < cost) {
        const double gain = cost - cost2;
        p = p2;
        r = r2;
        cost = cost2;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (gain < opts.tol * (cost + 1e-300)) {
          out.converged = true;
          out.params = p;
          out.cost = cost;
          return out;
        }
      } else {
        lambda *= 4;
        if (lambda > 1e14) break;
      }
    }
    if (!improved) {
      out.converged = true;  // stuck at a (local) minimum
      break;
    }
  }
  out.params = p;
  out.cost = cost;
  return out;
}

double minimize_scalar(const std::function<double(double)>& f, double lo,
                       double hi, double tol) {
  const double gr = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * (1 + std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2;
}

double dominant_frequency(const std::vector<double>& y) {
  const auto n = y.size();
  if (n < 4) return 0;
  double mean = 0;
  for (double v : y) mean += v;
  mean /= double(n);

  auto power = [&](double f) {
    cd acc = 0;
    for (std::size_t k = 0; k < n; ++k)
      acc += (y[k] - mean) * std::exp(-iu * (two_pi * f * double(k)));
    return std::norm(acc);
  };

  // Zero-padded scan (8x oversampling), then a parabolic refinement.
  const std::size_t grid = 8 * n;
  double best_f = 0, best_p = 0;
  const double df = 0.5 / double(grid);
  for (std::size_t k = 1; k <= grid; ++k) {
    const double f = double(k) * df;
    const double p = power(f);
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  if (best_p < 1e-18) return 0;
  const double pm = power(best_f - df), pp = power(best_f + df);
  const double denom = pm - 2 * best_p + pp;
  double shift = 0;
  if (std::abs(denom) > 1e-300) shift = 0.5 * (pm - pp) / denom;
  return std::clamp(best_f + shift * df, 0.0, 0.5);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw FitFailure("line fit needs at least two (x, y) pairs");
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
    syy += y[k] * y[k];
  }
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double cov = sxy - sx * sy / n;
  if (vx < 1e-300) throw FitFailure("line fit abscissa is degenerate");
  LineFit out;
  out.slope = cov / vx;
  out.intercept = (sy - out.slope * sx) / n;
  out.r_squared = vy > 1e-300 ? (cov * cov) / (vx * vy) : 1.0;
  return out;
}

}  // namespace crcal
