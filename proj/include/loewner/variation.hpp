#pragma once

#include <vector>

#include "loewner/loewner.hpp"

namespace loewner {

/// Needle data: replace the field by h on the window (T - eps, T).
struct NeedleSpec {
  double T = 0.0;
  MapDescriptor h;
  double eps = 0.0;
};

/// The field equal to G outside (T - eps, T) and to h inside, realized by
/// breakpoint insertion. The closed window [T - eps, T] must not meet an
/// existing breakpoint and T must be a regular time.
HerglotzField needle_field(const HerglotzField& g, const NeedleSpec& spec);

/// First-order term of the needle deformation of phi_{s,t} at each point:
///   d(phi_{s,t})_z [d(phi_{s,T})_z]^{-1} [h(phi_{s,T}) - G(phi_{s,T}, T)].
std::vector<CVec> first_order_term(const HerglotzField& g, const MapDescriptor& h,
                                   double s, double T, double t,
                                   const std::vector<CVec>& points,
                                   const IntegrationOptions& opts = {});

/// Scaled version: the derivative of e^t phi^eps_{s,t} (of f_s when t = inf):
///   d(e^t phi_{s,t})_z [d(e^T phi_{s,T})_z]^{-1} e^T [h(phi_{s,T}) - G(phi_{s,T}, T)].
/// Pass t = infinity for the limit map direction.
std::vector<CVec> scaled_first_order_term(const HerglotzField& g,
                                          const MapDescriptor& h, double s, double T,
                                          double t, const std::vector<CVec>& points,
                                          const IntegrationOptions& opts = {},
                                          const ScaledLimitOptions& limit_opts = {});

/// Jet of the scaled first-order term (t finite or infinity).
Jet scaled_first_order_jet(const HerglotzField& g, const MapDescriptor& h, double s,
                           double T, double t, int degree,
                           const IntegrationOptions& opts = {},
                           const ScaledLimitOptions& limit_opts = {});

/// First-order deformation of the time-t slice of the limit chain:
///   d(f_t)_z [d(e^T phi_{t,T})_z]^{-1} e^T [h(phi_{t,T}) - G(phi_{t,T}, T)]
/// for t < T, and zero for t >= T.
std::vector<CVec> chain_variation(const HerglotzField& g, const MapDescriptor& h,
                                  double T, double t, const std::vector<CVec>& points,
                                  const IntegrationOptions& opts = {},
                                  const ScaledLimitOptions& limit_opts = {});

/// Fundamental solution of the scaled linearized flow, normalized to the
/// identity at t = T:  Y(t) = d(e^t phi_{s,t})_z [d(e^T phi_{s,T})_z]^{-1}.
CMat fundamental_solution(const HerglotzField& g, double s, double T, double t,
                          const CVec& z, const IntegrationOptions& opts = {});

struct ResidualReport {
  double s = 0.0;
  double T = 0.0;
  double t = 0.0;  // may be infinity
  std::vector<double> ladder;      // strictly decreasing widths
  std::vector<double> residuals;   // sup over points of the rung residual
  std::vector<double> decay_ratios;
  bool pass = false;
  double threshold = 0.75;
  double floor = 1e-10;            // residuals below this count as converged
  double term_norm = 0.0;          // sup-norm of the predicted term
  double normalized_terminal = 0.0;
};

struct VariationCheckOptions {
  std::vector<double> ladder;      // default: halving from 1e-1 down to ~1e-4
  double decay_threshold = 0.75;
  double residual_floor = 1e-10;
  IntegrationOptions integ{1e-12, 1e-12, 1'000'000, 1};
  ScaledLimitOptions limit{};
};

std::vector<double> default_ladder();

/// Integrates the needle field for each rung, forms the difference quotient
/// against the base flow (scaled for t = inf), subtracts the predicted term
/// and records sup-norm residuals with their decay ratios.
ResidualReport verify_variation(const HerglotzField& g, const MapDescriptor& h,
                                double s, double T, double t,
                                const std::vector<CVec>& points,
                                const VariationCheckOptions& opts = {});

}  // namespace loewner
