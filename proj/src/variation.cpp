#include "loewner/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "loewner/parallel.hpp"

namespace loewner {

namespace {

bool is_inf(double t) { return std::isinf(t); }

CVec needle_defect(const HerglotzField& g, const MapDescriptor& h, double T,
                   const CVec& w) {
  return eval_map(h, w) - g.eval(w, T);
}

}  // namespace

HerglotzField needle_field(const HerglotzField& g, const NeedleSpec& spec) {
  require(spec.h.dim() == g.dim(), "needle dimension mismatch");
  require(spec.eps > 0.0 && spec.eps < spec.T, "need 0 < eps < T");
  require(g.is_regular(spec.T), "needle time must be a regular time of the field");
  const double lo = spec.T - spec.eps;
  for (double b : g.breakpoints())
    require(b < lo || b > spec.T, "needle window collides with an existing breakpoint");

  const MembershipReport member = check_class_membership(spec.h);
  if (!member.pass)
    throw std::invalid_argument("needle map fails class membership");

  std::vector<double> breakpoints;
  std::vector<MapDescriptor> pieces;
  const auto& bp = g.breakpoints();
  const auto& parts = g.pieces();
  for (size_t i = 0; i < bp.size(); ++i) {
    if (bp[i] < lo) {
      breakpoints.push_back(bp[i]);
      pieces.push_back(parts[i]);
    }
  }
  const MapDescriptor& host = g.piece_at(spec.T);
  breakpoints.push_back(lo);
  pieces.push_back(spec.h);
  breakpoints.push_back(spec.T);
  pieces.push_back(host);
  for (size_t i = 0; i < bp.size(); ++i) {
    if (bp[i] > spec.T) {
      breakpoints.push_back(bp[i]);
      pieces.push_back(parts[i]);
    }
  }
  // pieces were validated on the base field and for the needle above
  return HerglotzField(std::move(breakpoints), std::move(pieces), false);
}

std::vector<CVec> first_order_term(const HerglotzField& g, const MapDescriptor& h,
                                   double s, double T, double t,
                                   const std::vector<CVec>& points,
                                   const IntegrationOptions& opts) {
  require(0.0 <= s && s <= T && T <= t, "need 0 <= s <= T <= t");
  require(g.is_regular(T), "needle time must be a regular time of the field");
  const FlowResult at_T = integrate_flow(g, s, T, points, opts);
  const FlowResult at_t = integrate_flow(g, s, t, points, opts);
  std::vector<CVec> out(points.size());
  for (size_t j = 0; j < points.size(); ++j) {
    const CVec defect = needle_defect(g, h, T, at_T.values[j]);
    out[j] = at_t.jacobians[j] * guarded_solve(at_T.jacobians[j], defect);
  }
  return out;
}

std::vector<CVec> scaled_first_order_term(const HerglotzField& g,
                                          const MapDescriptor& h, double s, double T,
                                          double t, const std::vector<CVec>& points,
                                          const IntegrationOptions& opts,
                                          const ScaledLimitOptions& limit_opts) {
  require(0.0 <= s && s <= T && (is_inf(t) || T <= t), "need 0 <= s <= T <= t");
  require(g.is_regular(T), "needle time must be a regular time of the field");
  const FlowResult at_T = integrate_scaled_flow(g, s, T, points, opts);

  std::vector<CMat> outer(points.size());
  if (is_inf(t)) {
    ScaledLimitOptions lo = limit_opts;
    lo.integ = opts;
    const ScaledLimit lim = scaled_limit(g, s, points, lo);
    outer = lim.jacobians;
  } else {
    outer = integrate_scaled_flow(g, s, t, points, opts).jacobians;
  }

  const double scale = std::exp(T);
  std::vector<CVec> out(points.size());
  for (size_t j = 0; j < points.size(); ++j) {
    const CVec w = std::exp(-T) * at_T.values[j];
    const CVec defect = scale * needle_defect(g, h, T, w);
    out[j] = outer[j] * guarded_solve(at_T.jacobians[j], defect);
  }
  return out;
}

Jet scaled_first_order_jet(const HerglotzField& g, const MapDescriptor& h, double s,
                           double T, double t, int degree,
                           const IntegrationOptions& opts,
                           const ScaledLimitOptions& limit_opts) {
  require(0.0 <= s && s <= T && (is_inf(t) || T <= t), "need 0 <= s <= T <= t");
  require(g.is_regular(T), "needle time must be a regular time of the field");

  const Jet v_T = scaled_flow_jet(g, s, T, degree, opts);
  Jet outer_jet(g.dim(), degree);
  if (is_inf(t)) {
    ScaledLimitOptions lo = limit_opts;
    lo.integ = opts;
    outer_jet = *scaled_limit_jet(g, s, degree, lo).jet;
  } else {
    outer_jet = scaled_flow_jet(g, s, t, degree, opts);
  }

  // e^T [ (h - G_T) o phi_{s,T} ] as a jet, through the scaled flow jet.
  Jet defect = jet_from_closed_form(h, degree);
  defect -= jet_from_closed_form(g.piece_at(T), degree);
  Jet phi_T = v_T;
  phi_T *= Cplx(std::exp(-T), 0);
  Jet rhs = jet_compose(defect, phi_T, degree);
  rhs *= Cplx(std::exp(T), 0);

  const MatrixJet outer_mat = jacobian_jet(outer_jet);
  const MatrixJet inner_inv = jacobian_jet(v_T).inverse();
  return (outer_mat * inner_inv).apply(rhs);
}

std::vector<CVec> chain_variation(const HerglotzField& g, const MapDescriptor& h,
                                  double T, double t, const std::vector<CVec>& points,
                                  const IntegrationOptions& opts,
                                  const ScaledLimitOptions& limit_opts) {
  require(t >= 0.0, "chain time must be nonnegative");
  require(g.is_regular(T), "needle time must be a regular time of the field");
  if (t >= T) {
    std::vector<CVec> zero(points.size());
    for (size_t j = 0; j < points.size(); ++j) zero[j] = CVec::Zero(g.dim());
    return zero;
  }
  ScaledLimitOptions lo = limit_opts;
  lo.integ = opts;
  const ScaledLimit f_t = scaled_limit(g, t, points, lo);
  const FlowResult at_T = integrate_scaled_flow(g, t, T, points, opts);
  const double scale = std::exp(T);
  std::vector<CVec> out(points.size());
  for (size_t j = 0; j < points.size(); ++j) {
    const CVec w = std::exp(-T) * at_T.values[j];
    const CVec defect = scale * needle_defect(g, h, T, w);
    out[j] = f_t.jacobians[j] * guarded_solve(at_T.jacobians[j], defect);
  }
  return out;
}

CMat fundamental_solution(const HerglotzField& g, double s, double T, double t,
                          const CVec& z, const IntegrationOptions& opts) {
  require(0.0 <= s && s <= T && T <= t, "need 0 <= s <= T <= t");
  const std::vector<CVec> pts{z};
  const CMat v_T = integrate_scaled_flow(g, s, T, pts, opts).jacobians[0];
  const CMat v_t = integrate_scaled_flow(g, s, t, pts, opts).jacobians[0];
  return right_solve(v_t, v_T);
}

std::vector<double> default_ladder() {
  std::vector<double> ladder;
  for (double eps = 1e-1; eps > 0.9e-4; eps *= 0.5) ladder.push_back(eps);
  return ladder;
}

ResidualReport verify_variation(const HerglotzField& g, const MapDescriptor& h,
                                double s, double T, double t,
                                const std::vector<CVec>& points,
                                const VariationCheckOptions& opts) {
  ResidualReport report;
  report.s = s;
  report.T = T;
  report.t = t;
  report.ladder = opts.ladder.empty() ? default_ladder() : opts.ladder;
  report.threshold = opts.decay_threshold;
  report.floor = opts.residual_floor;
  for (size_t i = 1; i < report.ladder.size(); ++i)
    require(report.ladder[i] < report.ladder[i - 1],
            "ladder must be strictly decreasing");
  require(report.ladder.front() < T, "ladder must stay inside (0, T)");

  const bool scaled = is_inf(t);
  std::vector<CVec> term;
  std::vector<CVec> base;
  double horizon = t;
  if (scaled) {
    ScaledLimitOptions lo = opts.limit;
    lo.integ = opts.integ;
    const ScaledLimit lim = scaled_limit(g, s, points, lo);
    horizon = lim.horizon;  // common horizon for base and needle flows
    base = integrate_scaled_flow(g, s, horizon, points, opts.integ).values;
    term = scaled_first_order_term(g, h, s, T, t, points, opts.integ, lo);
  } else {
    base = integrate_flow(g, s, t, points, opts.integ).values;
    term = first_order_term(g, h, s, T, t, points, opts.integ);
  }
  for (const CVec& v : term) report.term_norm = std::max(report.term_norm, v.norm());

  report.residuals.resize(report.ladder.size());
  parallel_for(static_cast<int>(report.ladder.size()), opts.integ.threads, [&](int i) {
    const double eps = report.ladder[i];
    const HerglotzField needled = needle_field(g, NeedleSpec{T, h, eps});
    const std::vector<CVec> bumped =
        scaled ? integrate_scaled_flow(needled, s, horizon, points, opts.integ).values
               : integrate_flow(needled, s, horizon, points, opts.integ).values;
    double worst = 0.0;
    for (size_t j = 0; j < points.size(); ++j) {
      const CVec res = (bumped[j] - base[j]) / eps - term[j];
      worst = std::max(worst, res.norm());
    }
    report.residuals[i] = worst;
  });

  report.pass = true;
  for (size_t i = 1; i < report.residuals.size(); ++i) {
    const double prev = report.residuals[i - 1];
    const double cur = report.residuals[i];
    const double ratio = cur <= report.floor                ? 0.0
                         : prev <= report.floor             ? 1.0
                                                            : cur / prev;
    report.decay_ratios.push_back(ratio);
    if (ratio > report.threshold) report.pass = false;
  }
  report.normalized_terminal =
      report.residuals.back() / std::max(report.term_norm, 1e-300);
  return report;
}

}  // namespace loewner
