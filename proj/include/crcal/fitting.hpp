#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace crcal {

struct LmOptions {
  int max_iters = 200;
  double tol = 1e-12;      // relative cost improvement to stop
  double lambda0 = 1e-3;   // initial damping
};

struct LmResult {
  Eigen::VectorXd params;
  double cost = 0;  // sum of squared residuals
  bool converged = false;
  int iters = 0;
};

// Levenberg-Marquardt on a residual vector with a central-difference
// Jacobian. Suited to the small (<= 8 parameter) problems used here.
LmResult fit_least_squares(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
    Eigen::VectorXd initial, const LmOptions& opts = {});

// Golden-section minimum of a unimodal scalar function on [lo, hi].
double minimize_scalar(const std::function<double(double)>& f, double lo,
                       double hi, double tol = 1e-10);

// Dominant nonzero frequency of a mean-removed series sampled at unit
// spacing, in cycles per sample (0 .. 0.5]; zero-padded discrete Fourier
// scan refined by parabolic interpolation. Returns 0 for a flat series.
double dominant_frequency(const std::vector<double>& y);

// Ordinary least squares y ~ a*x + b; returns {slope, intercept, r_squared}.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace crcal
