#pragma once

#include <optional>
#include <vector>

#include "loewner/holomap.hpp"
#include "loewner/jet.hpp"
#include "loewner/types.hpp"

namespace loewner {

struct IntegrationOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  long max_steps = 1'000'000;
  int threads = 1;
};

/// Piecewise-constant-in-time field t -> G(.,t) with values in the sampled
/// class: piece i is active on [breakpoints[i], breakpoints[i+1]), the last
/// piece on [breakpoints.back(), infinity). breakpoints.front() == 0.
class HerglotzField {
 public:
  HerglotzField(std::vector<double> breakpoints, std::vector<MapDescriptor> pieces,
                bool validate = true);

  static HerglotzField constant(MapDescriptor piece, bool validate = true);

  int dim() const { return pieces_.front().dim(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<MapDescriptor>& pieces() const { return pieces_; }

  int piece_index(double t) const;
  const MapDescriptor& piece_at(double t) const;

  /// Regular times: every t >= 0 that is not an interior breakpoint.
  bool is_regular(double t) const;

  CVec eval(const CVec& z, double t) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<MapDescriptor> pieces_;
};

struct FlowResult {
  double s = 0.0;
  double t = 0.0;
  std::vector<CVec> points;
  std::vector<CVec> values;      // phi_{s,t}(z_j)
  std::vector<CMat> jacobians;   // d(phi_{s,t})_{z_j}
  long steps_taken = 0;
  double error_estimate = 0.0;   // accumulated local truncation estimates
};

/// Integrates dz/dtau = G(z,tau) from z(s) = z_j with the variational
/// equation dJ/dtau = dG_z(phi,tau) J alongside, never stepping across a
/// breakpoint.
FlowResult integrate_flow(const HerglotzField& g, double s, double t,
                          const std::vector<CVec>& points,
                          const IntegrationOptions& opts = {});

/// The same flow in scaled variables v = e^tau phi_{s,tau} (values stay O(1)
/// for large tau): values hold e^t phi_{s,t}, jacobians hold d(e^t phi_{s,t}).
FlowResult integrate_scaled_flow(const HerglotzField& g, double s, double t,
                                 const std::vector<CVec>& points,
                                 const IntegrationOptions& opts = {});

struct EvolutionCheck {
  FlowResult direct;              // phi_{u,t}(z)
  std::vector<CVec> composed;     // phi_{s,t}(phi_{u,s}(z))
  double residual = 0.0;          // max deviation over points
};

/// Consistency diagnostic for the two-parameter composition identity.
EvolutionCheck evolution_map(const HerglotzField& g, double u, double s, double t,
                             const std::vector<CVec>& points,
                             const IntegrationOptions& opts = {});

/// Taylor jet of phi_{s,t} at 0, integrated through the coefficient ODE
/// induced by composing the jet of the active piece with the current jet.
Jet flow_jet(const HerglotzField& g, double s, double t, int degree,
             const IntegrationOptions& opts = {});

/// Jet of e^t phi_{s,t} at 0.
Jet scaled_flow_jet(const HerglotzField& g, double s, double t, int degree,
                    const IntegrationOptions& opts = {});

struct ScaledLimitOptions {
  double tol = 1e-8;
  double horizon_cap = 40.0;
  double checkpoint_dt = 4.0;
  IntegrationOptions integ = {};
};

struct ScaledLimit {
  double s = 0.0;
  double horizon = 0.0;          // T actually used
  std::vector<CVec> points;
  std::vector<CVec> values;      // f_s(z_j) = lim e^t phi_{s,t}(z_j)
  std::vector<CMat> jacobians;   // d(f_s)_{z_j}
  std::optional<Jet> jet;        // jet of f_s when requested
  double truncation_bound = 0.0; // a-priori tail bound at the used horizon
};

/// Error-controlled infinite-horizon limit f_s = lim_{t->inf} e^t phi_{s,t},
/// stabilized over doubling checkpoints with an a-priori exponential decay
/// guard; fails when the horizon cap is reached first.
ScaledLimit scaled_limit(const HerglotzField& g, double s,
                         const std::vector<CVec>& points,
                         const ScaledLimitOptions& opts = {});

/// Jet variant of the limit.
ScaledLimit scaled_limit_jet(const HerglotzField& g, double s, int degree,
                             const ScaledLimitOptions& opts = {});

/// Reference solution for constant slice-Moebius fields in dimension one:
/// solves the transfer relation k_zeta(phi_{s,t}) = e^{-(t-s)} k_zeta(z) for
/// the root inside the unit disc.
Cplx koebe_oracle(Cplx zeta, double s, double t, Cplx z);

/// The classical extremal map k_zeta(z) = z / (1 + conj(zeta) z)^2.
Cplx koebe_function(Cplx zeta, Cplx z);

}  // namespace loewner
