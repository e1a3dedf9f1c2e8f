#include "loewner/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "loewner/parallel.hpp"

namespace loewner {

LinearFunctional::LinearFunctional(int dim, std::vector<PointAtom> point_atoms,
                                   std::vector<CoeffAtom> coeff_atoms)
    : dim_(dim),
      point_atoms_(std::move(point_atoms)),
      coeff_atoms_(std::move(coeff_atoms)) {
  require(dim_ >= 1, "dimension must be >= 1");
  require(!point_atoms_.empty() || !coeff_atoms_.empty(),
          "functional needs at least one atom");
  for (const auto& a : point_atoms_) {
    require(a.z.size() == dim_, "atom dimension mismatch");
    require(a.z.norm() < 1.0, "point atoms must be strictly interior");
    require(a.component >= 0 && a.component < dim_, "atom component out of range");
  }
  for (const auto& a : coeff_atoms_) {
    require(static_cast<int>(a.alpha.size()) == dim_, "atom multi-index mismatch");
    require(total_degree(a.alpha) >= 1, "coefficient atoms need |alpha| >= 1");
    require(a.component >= 0 && a.component < dim_, "atom component out of range");
  }
}

LinearFunctional LinearFunctional::point_eval(CVec z, int component, Cplx weight) {
  const int n = static_cast<int>(z.size());
  return LinearFunctional(n, {PointAtom{std::move(z), component, weight}}, {});
}

LinearFunctional LinearFunctional::coefficient(MultiIndex alpha, int component,
                                               Cplx weight) {
  const int n = static_cast<int>(alpha.size());
  return LinearFunctional(n, {}, {CoeffAtom{std::move(alpha), component, weight}});
}

int LinearFunctional::max_coeff_degree() const {
  int d = 0;
  for (const auto& a : coeff_atoms_) d = std::max(d, total_degree(a.alpha));
  return d;
}

Cplx eval_functional(const LinearFunctional& l, const MapSample& g) {
  require(g.point_values.size() == l.point_atoms().size(),
          "sample is missing point-atom values");
  Cplx out(0, 0);
  for (size_t i = 0; i < l.point_atoms().size(); ++i) {
    const PointAtom& a = l.point_atoms()[i];
    require(g.point_values[i].size() == l.dim(), "sample value dimension mismatch");
    out += a.weight * g.point_values[i][a.component];
  }
  if (!l.coeff_atoms().empty()) {
    require(g.jet.has_value(), "sample is missing a jet for coefficient atoms");
    require(g.jet->degree() >= l.max_coeff_degree(),
            "sample jet degree too small for coefficient atoms");
    for (const CoeffAtom& a : l.coeff_atoms())
      out += a.weight * g.jet->coeff(a.component, a.alpha);
  }
  return out;
}

Cplx eval_functional(const LinearFunctional& l, const MapDescriptor& g) {
  require(g.dim() == l.dim(), "functional/map dimension mismatch");
  MapSample sample;
  sample.point_values.reserve(l.point_atoms().size());
  for (const PointAtom& a : l.point_atoms()) sample.point_values.push_back(eval_map(g, a.z));
  if (!l.coeff_atoms().empty())
    sample.jet = jet_from_closed_form(g, std::max(1, l.max_coeff_degree()));
  return eval_functional(l, sample);
}

Cplx eval_functional(const LinearFunctional& l, const Jet& g) {
  require(g.dim() == l.dim(), "functional/jet dimension mismatch");
  MapSample sample;
  sample.point_values.reserve(l.point_atoms().size());
  for (const PointAtom& a : l.point_atoms()) sample.point_values.push_back(g.eval(a.z));
  sample.jet = g;
  return eval_functional(l, sample);
}

ControlFamily ControlFamily::slice_grid(SliceGrid spec) {
  require(spec.zeta_count >= 1, "family needs at least one grid angle");
  ControlFamily f;
  f.grid_ = spec;
  return f;
}

ControlFamily ControlFamily::explicit_list(std::vector<MapDescriptor> items) {
  require(!items.empty(), "family list must be nonempty");
  ControlFamily f;
  f.items_ = std::move(items);
  return f;
}

FunctionalFrame FunctionalFrame::build(const LinearFunctional& l,
                                       const HerglotzField& g,
                                       const ScaledLimitOptions& opts) {
  require(l.dim() == g.dim(), "functional/field dimension mismatch");
  FunctionalFrame frame{l, {}, {}, {}, {}, {}, 0.0};

  // Deduplicate point-atom locations.
  auto key = [](const CVec& z) {
    std::vector<std::pair<double, double>> k;
    for (Eigen::Index i = 0; i < z.size(); ++i) k.emplace_back(z[i].real(), z[i].imag());
    return k;
  };
  std::map<std::vector<std::pair<double, double>>, int> seen;
  for (const PointAtom& a : l.point_atoms()) {
    auto [it, inserted] = seen.try_emplace(key(a.z), static_cast<int>(frame.atom_points.size()));
    if (inserted) frame.atom_points.push_back(a.z);
    frame.atom_slot.push_back(it->second);
  }

  if (!frame.atom_points.empty()) {
    const ScaledLimit lim = scaled_limit(g, 0.0, frame.atom_points, opts);
    frame.f_values = lim.values;
    frame.f_jacobians = lim.jacobians;
    frame.horizon = lim.horizon;
  }
  if (!l.coeff_atoms().empty()) {
    const ScaledLimit lim = scaled_limit_jet(g, 0.0, l.max_coeff_degree(), opts);
    frame.f_jet = lim.jet;
    frame.horizon = std::max(frame.horizon, lim.horizon);
  }
  return frame;
}

Cplx FunctionalFrame::eval_on_target() const {
  MapSample sample;
  for (size_t i = 0; i < functional.point_atoms().size(); ++i)
    sample.point_values.push_back(f_values[atom_slot[i]]);
  sample.jet = f_jet;
  return eval_functional(functional, sample);
}

TransportContext TransportContext::build(const FunctionalFrame& frame,
                                         const HerglotzField& g, double t,
                                         const IntegrationOptions& opts) {
  require(g.is_regular(t), "transport time must be a regular time of the field");
  TransportContext ctx;
  ctx.frame_ = &frame;
  ctx.t_ = t;
  ctx.exp_t_ = std::exp(t);

  if (!frame.atom_points.empty()) {
    const FlowResult flow = integrate_scaled_flow(g, 0.0, t, frame.atom_points, opts);
    ctx.points_.reserve(frame.atom_points.size());
    for (size_t j = 0; j < frame.atom_points.size(); ++j) {
      PointData pd;
      pd.f_jac = frame.f_jacobians[j];
      pd.lu = Eigen::PartialPivLU<CMat>(flow.jacobians[j]);
      if (pd.lu.rcond() < 1e-12)
        throw numerical_error("near-singular flow Jacobian during transport");
      pd.v = flow.values[j];
      pd.w = std::exp(-t) * flow.values[j];
      ctx.points_.push_back(std::move(pd));
    }
  }
  if (frame.f_jet.has_value()) {
    const int degree = frame.f_jet->degree();
    ctx.scaled_jet_ = scaled_flow_jet(g, 0.0, t, degree, opts);
    const MatrixJet f_mat = jacobian_jet(*frame.f_jet);
    const MatrixJet flow_mat = jacobian_jet(*ctx.scaled_jet_);
    ctx.transport_mat_ = f_mat * flow_mat.inverse();
  }
  return ctx;
}

Cplx TransportContext::eval(const MapDescriptor& h) const {
  const LinearFunctional& l = frame_->functional;
  require(h.dim() == l.dim(), "map dimension mismatch");
  Cplx out(0, 0);

  for (size_t i = 0; i < l.point_atoms().size(); ++i) {
    const PointAtom& a = l.point_atoms()[i];
    const PointData& pd = points_[frame_->atom_slot[i]];
    // e^t h(w) = e^t (h(w) + w) - v, formed without cancellation.
    const CVec rhs = exp_t_ * eval_plus_identity(h, pd.w) - pd.v;
    const CVec transported = pd.f_jac * pd.lu.solve(rhs);
    out += a.weight * transported[a.component];
  }

  if (!l.coeff_atoms().empty()) {
    const int degree = scaled_jet_->degree();
    Jet h_jet = jet_from_closed_form(h, degree);
    Jet inner = *scaled_jet_;
    inner *= Cplx(std::exp(-t_), 0);
    Jet composed = jet_compose(h_jet, inner, degree);
    composed *= Cplx(exp_t_, 0);
    const Jet transported = transport_mat_->apply(composed);
    for (const CoeffAtom& a : l.coeff_atoms())
      out += a.weight * transported.coeff(a.component, a.alpha);
  }
  return out;
}

Cplx transported_functional(const LinearFunctional& l, const HerglotzField& g,
                            double t, const MapDescriptor& h,
                            const IntegrationOptions& opts,
                            const ScaledLimitOptions& limit_opts) {
  ScaledLimitOptions lo = limit_opts;
  lo.integ = opts;
  const FunctionalFrame frame = FunctionalFrame::build(l, g, lo);
  return TransportContext::build(frame, g, t, opts).eval(h);
}

namespace {

Maximizer maximize_over_family(const TransportContext& ctx, const ControlFamily& family,
                               int dim) {
  Maximizer best;
  double best_re = -std::numeric_limits<double>::infinity();

  if (!family.is_grid()) {
    for (size_t i = 0; i < family.items().size(); ++i) {
      const Cplx v = ctx.eval(family.items()[i]);
      if (v.real() > best_re) {
        best_re = v.real();
        best.index = static_cast<int>(i);
        best.value = v;
        best.label = "item " + std::to_string(i);
      }
    }
    return best;
  }

  const ControlFamily::SliceGrid& grid = family.grid();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<CVec> u_set;
  if (dim == 1) {
    CVec u(1);
    u[0] = Cplx(1, 0);
    u_set.push_back(std::move(u));
  } else {
    u_set = sphere_design(dim, grid.u_count);
  }

  auto value_at = [&](double theta, const CVec& u) {
    const Cplx zeta(std::cos(theta), std::sin(theta));
    return ctx.eval(MapDescriptor::slice_moebius(zeta, u));
  };

  int best_u = 0;
  int best_k = 0;
  for (size_t ui = 0; ui < u_set.size(); ++ui) {
    for (int k = 0; k < grid.zeta_count; ++k) {
      const double theta = two_pi * k / grid.zeta_count;
      const Cplx v = value_at(theta, u_set[ui]);
      if (v.real() > best_re) {  // ties keep the smallest grid index
        best_re = v.real();
        best_u = static_cast<int>(ui);
        best_k = k;
        best.value = v;
      }
    }
  }
  double theta_best = two_pi * best_k / grid.zeta_count;

  if (grid.refine) {
    // Golden-section ascent on the bracket spanned by the grid neighbors.
    const double step = two_pi / grid.zeta_count;
    double lo = theta_best - step;
    double hi = theta_best + step;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = value_at(x1, u_set[best_u]).real();
    double f2 = value_at(x2, u_set[best_u]).real();
    while (hi - lo > grid.refine_tol) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = value_at(x2, u_set[best_u]).real();
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = value_at(x1, u_set[best_u]).real();
      }
    }
    const double theta_ref = 0.5 * (lo + hi);
    const Cplx v = value_at(theta_ref, u_set[best_u]);
    if (v.real() > best_re) {
      best_re = v.real();
      best.value = v;
      theta_best = theta_ref;
    }
  }

  best.index = best_k;
  best.zeta = Cplx(std::cos(theta_best), std::sin(theta_best));
  best.u = u_set[best_u];
  best.label = "slice_moebius";
  return best;
}

}  // namespace

HamiltonianScan hamiltonian_scan(const LinearFunctional& l, const HerglotzField& g,
                                 const ControlFamily& family,
                                 const std::vector<double>& t_grid,
                                 const IntegrationOptions& opts,
                                 const ScaledLimitOptions& limit_opts) {
  require(!t_grid.empty(), "scan grid must be nonempty");
  for (double t : t_grid)
    require(g.is_regular(t), "scan grid must avoid interior breakpoints");

  ScaledLimitOptions lo = limit_opts;
  lo.integ = opts;
  const FunctionalFrame frame = FunctionalFrame::build(l, g, lo);

  HamiltonianScan scan;
  scan.entries.resize(t_grid.size());
  parallel_for(static_cast<int>(t_grid.size()), opts.threads, [&](int i) {
    const TransportContext ctx = TransportContext::build(frame, g, t_grid[i], opts);
    ScanEntry entry;
    entry.t = t_grid[i];
    entry.maximizer = maximize_over_family(ctx, family, g.dim());
    entry.m = entry.maximizer.value.real();
    scan.entries[i] = std::move(entry);
  });

  const double m0 = scan.entries.front().m;
  for (const ScanEntry& e : scan.entries)
    scan.constancy_deviation = std::max(scan.constancy_deviation, std::abs(e.m - m0));
  return scan;
}

PontryaginReport pontryagin_check(const LinearFunctional& l, const HerglotzField& g,
                                  const ControlFamily& family,
                                  const std::vector<double>& t_grid, double slack,
                                  const IntegrationOptions& opts,
                                  const ScaledLimitOptions& limit_opts) {
  require(slack >= 0.0, "slack must be >= 0");
  require(!t_grid.empty(), "grid must be nonempty");
  for (double t : t_grid)
    require(g.is_regular(t), "grid must avoid interior breakpoints");

  ScaledLimitOptions lo = limit_opts;
  lo.integ = opts;
  const FunctionalFrame frame = FunctionalFrame::build(l, g, lo);

  PontryaginReport report;
  report.slack_allowed = slack;
  report.rows.resize(t_grid.size());
  parallel_for(static_cast<int>(t_grid.size()), opts.threads, [&](int i) {
    const TransportContext ctx = TransportContext::build(frame, g, t_grid[i], opts);
    PontryaginRow row;
    row.t = t_grid[i];
    row.maximizer = maximize_over_family(ctx, family, g.dim());
    row.m = row.maximizer.value.real();
    row.field_value = ctx.eval(g.piece_at(t_grid[i])).real();
    row.slack = row.m - row.field_value;
    report.rows[i] = std::move(row);
  });

  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (const PontryaginRow& row : report.rows) {
    if (row.slack > report.worst_violation) {
      report.worst_violation = row.slack;
      report.worst_t = row.t;
      report.worst_witness = row.maximizer;
    }
  }
  report.pass = report.worst_violation <= slack;
  return report;
}

PommerenkeReport pommerenke_check(const LinearFunctional& l, const HerglotzField& g,
                                  const ControlFamily& family, double t_limit,
                                  double tol, const IntegrationOptions& opts,
                                  const ScaledLimitOptions& limit_opts) {
  require(t_limit > 0.0, "limit time must be positive");
  require(tol > 0.0, "tolerance must be positive");
  require(g.is_regular(t_limit), "limit time must avoid interior breakpoints");

  const HamiltonianScan scan =
      hamiltonian_scan(l, g, family, {0.0, t_limit}, opts, limit_opts);
  ScaledLimitOptions lo = limit_opts;
  lo.integ = opts;
  const FunctionalFrame frame = FunctionalFrame::build(l, g, lo);

  PommerenkeReport report;
  report.t_limit = t_limit;
  report.tol = tol;
  report.m0 = scan.entries[0].m;
  report.m_limit = scan.entries[1].m;
  report.re_l_target = frame.eval_on_target().real();
  report.limit_deviation = std::abs(report.m_limit + report.re_l_target);
  report.zero_deviation = std::abs(report.m0 + report.re_l_target);
  report.limit_ok = report.limit_deviation <= tol;
  return report;
}

namespace {

// Compass search over directions on the unit sphere of C^n, ascending the
// margin at fixed radius. Deterministic; only ever raises the estimate.
std::pair<double, CVec> refine_direction(const MapDescriptor& piece, double radius,
                                         const CVec& start, double start_margin) {
  const int n = static_cast<int>(start.size());
  RVec x(2 * n);
  for (int k = 0; k < n; ++k) {
    x[2 * k] = start[k].real() / radius;
    x[2 * k + 1] = start[k].imag() / radius;
  }
  auto margin_at = [&](const RVec& coords) {
    RVec d = coords / coords.norm();
    CVec z(n);
    for (int k = 0; k < n; ++k) z[k] = radius * Cplx(d[2 * k], d[2 * k + 1]);
    return std::make_pair(inner(eval_map(piece, z), z).real() / z.squaredNorm(), z);
  };
  double best = start_margin;
  CVec best_point = start;
  double step = 0.3;
  while (step > 1e-7) {
    bool improved = false;
    for (int i = 0; i < 2 * n; ++i) {
      for (double sign : {1.0, -1.0}) {
        RVec probe = x;
        probe[i] += sign * step;
        if (probe.norm() < 1e-9) continue;
        auto [m, z] = margin_at(probe);
        if (m > best) {
          best = m;
          best_point = z;
          x = probe / probe.norm();
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {best, best_point};
}

}  // namespace

ScreenResult support_screen(const HerglotzField& g, double T, const BallGrid& grid,
                            double margin) {
  require(g.is_regular(T), "screen time must be a regular time of the field");
  require(!grid.radii.empty() && grid.directions >= 1, "empty screen grid");
  const MapDescriptor& piece = g.piece_at(T);
  const int n = g.dim();

  ScreenResult result;
  result.T = T;
  result.margin = margin;
  result.sup_value = -std::numeric_limits<double>::infinity();

  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (double r : grid.radii) {
    double best = -std::numeric_limits<double>::infinity();
    CVec best_point;
    if (n == 1) {
      int best_k = 0;
      for (int k = 0; k < grid.directions; ++k) {
        const double theta = two_pi * k / grid.directions;
        CVec z(1);
        z[0] = r * Cplx(std::cos(theta), std::sin(theta));
        const double m = inner(eval_map(piece, z), z).real() / z.squaredNorm();
        if (m > best) {
          best = m;
          best_point = z;
          best_k = k;
        }
      }
      // Golden-section ascent around the best angle.
      const double step = two_pi / grid.directions;
      double lo = two_pi * best_k / grid.directions - step;
      double hi = two_pi * best_k / grid.directions + step;
      auto margin_at = [&](double theta) {
        CVec z(1);
        z[0] = r * Cplx(std::cos(theta), std::sin(theta));
        return std::make_pair(inner(eval_map(piece, z), z).real() / (r * r), z);
      };
      const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
      double x1 = hi - inv_phi * (hi - lo);
      double x2 = lo + inv_phi * (hi - lo);
      double f1 = margin_at(x1).first;
      double f2 = margin_at(x2).first;
      while (hi - lo > 1e-10) {
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = margin_at(x2).first;
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = margin_at(x1).first;
        }
      }
      auto [m, z] = margin_at(0.5 * (lo + hi));
      if (m > best) {
        best = m;
        best_point = z;
      }
    } else {
      const std::vector<CVec> dirs = sphere_design(n, grid.directions);
      CVec seed;
      for (const CVec& d : dirs) {
        const CVec z = r * d;
        const double m = inner(eval_map(piece, z), z).real() / z.squaredNorm();
        if (m > best) {
          best = m;
          seed = z;
        }
      }
      auto [m, z] = refine_direction(piece, r, seed, best);
      best = m;
      best_point = z;
    }
    if (best > result.sup_value) {
      result.sup_value = best;
      result.sup_point = best_point;
    }
  }
  result.fires = result.sup_value < -margin;
  return result;
}

NonconstancyReport nonconstancy_probe(const LinearFunctional& l,
                                      const HerglotzField& g, double t, int degree,
                                      double witness_threshold,
                                      const IntegrationOptions& opts,
                                      const ScaledLimitOptions& limit_opts) {
  require(degree >= 2, "probe degree must be >= 2");
  ScaledLimitOptions lo = limit_opts;
  lo.integ = opts;
  const FunctionalFrame frame = FunctionalFrame::build(l, g, lo);
  const TransportContext ctx = TransportContext::build(frame, g, t, opts);

  const int n = g.dim();
  const auto basis = JetBasis::get(n, degree);
  NonconstancyReport report;
  for (int col = 0; col < basis->size(); ++col) {
    const MultiIndex& alpha = basis->index(col);
    if (total_degree(alpha) < 2) continue;
    for (int k = 0; k < n; ++k) {
      Jet p(n, degree);
      p.set_coeff(k, alpha, Cplx(1, 0));
      ProbeEntry entry{alpha, k, ctx.eval(MapDescriptor::poly(std::move(p)))};
      if (std::abs(entry.value) > report.max_abs) {
        report.max_abs = std::abs(entry.value);
        report.witness = entry;
      }
      report.probes.push_back(std::move(entry));
    }
  }
  report.witnessed = report.max_abs > witness_threshold;
  return report;
}

}  // namespace loewner
