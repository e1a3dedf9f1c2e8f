#pragma once

#include <algorithm>
#include <cmath>

#include "loewner/types.hpp"

namespace loewner::detail {

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  long max_steps = 1'000'000;
};

struct OdeStats {
  long steps_accepted = 0;
  long steps_rejected = 0;
  double error_accum = 0.0;
};

// Dormand-Prince 5(4) pair on a complex state vector; real coefficients act
// on the real-flattened system identically. The error norm is the max over
// components of |e_i| / (atol + rtol * max(|y_i|, |y_new_i|)).
template <class Rhs, class OnAccept>
void rk45_integrate(Rhs&& rhs, double a, double b, CVec& y, const OdeOptions& opts,
                    OdeStats& stats, OnAccept&& on_accept) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (b <= a) return;
  double t = a;
  double h = std::min(b - a, 0.1);

  CVec k1 = rhs(t, y);
  while (t < b) {
    if (stats.steps_accepted + stats.steps_rejected >= opts.max_steps)
      throw numerical_error("integration step budget exhausted before tolerance met");
    const bool last = h >= b - t;
    if (last) h = b - t;

    const CVec k2 = rhs(t + c2 * h, y + h * (a21 * k1));
    const CVec k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const CVec k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const CVec k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const CVec k6 =
        rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const CVec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const CVec k7 = rhs(t + h, y5);
    const CVec err_vec =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double scale =
          opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(err_vec[i]) / scale);
    }

    if (err <= 1.0) {
      t = last ? b : t + h;
      y = y5;
      k1 = k7;  // FSAL
      ++stats.steps_accepted;
      stats.error_accum += err_vec.cwiseAbs().maxCoeff();
      on_accept(t, y);
    } else {
      ++stats.steps_rejected;
    }
    const double factor =
        (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
    if (!(h > 0.0) || t + h == t)
      throw numerical_error("step size underflow in adaptive integration");
  }
}

}  // namespace loewner::detail
