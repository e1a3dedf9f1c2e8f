#include "loewner/loewner.hpp"

#include <algorithm>
#include <cmath>

#include "loewner/parallel.hpp"
#include "rk45.hpp"

namespace loewner {

CMat right_solve(const CMat& a, const CMat& b) {
  Eigen::PartialPivLU<CMat> lu(b.transpose());
  if (lu.rcond() < 1e-12) throw numerical_error("near-singular matrix in right solve");
  return lu.solve(a.transpose()).transpose();
}

CVec guarded_solve(const CMat& b, const CVec& y) {
  Eigen::PartialPivLU<CMat> lu(b);
  if (lu.rcond() < 1e-12) throw numerical_error("near-singular Jacobian in solve");
  return lu.solve(y);
}

HerglotzField::HerglotzField(std::vector<double> breakpoints,
                             std::vector<MapDescriptor> pieces, bool validate)
    : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
  require(!pieces_.empty(), "field needs at least one piece");
  require(breakpoints_.size() == pieces_.size(),
          "need exactly one breakpoint per piece");
  require(breakpoints_.front() == 0.0, "first breakpoint must be 0");
  for (size_t i = 1; i < breakpoints_.size(); ++i)
    require(breakpoints_[i] > breakpoints_[i - 1],
            "breakpoints must be strictly increasing");
  const int n = pieces_.front().dim();
  for (const auto& p : pieces_) require(p.dim() == n, "piece dimension mismatch");
  if (validate) {
    for (size_t i = 0; i < pieces_.size(); ++i) {
      const MembershipReport r = check_class_membership(pieces_[i]);
      if (!r.pass)
        throw std::invalid_argument("field piece " + std::to_string(i) +
                                    " fails class membership (worst margin " +
                                    std::to_string(r.worst_margin) + ")");
    }
  }
}

HerglotzField HerglotzField::constant(MapDescriptor piece, bool validate) {
  std::vector<MapDescriptor> pieces;
  pieces.push_back(std::move(piece));
  return HerglotzField({0.0}, std::move(pieces), validate);
}

int HerglotzField::piece_index(double t) const {
  require(t >= 0.0, "time must be nonnegative");
  int lo = 0;
  for (size_t i = 1; i < breakpoints_.size(); ++i) {
    if (breakpoints_[i] <= t) lo = static_cast<int>(i);
  }
  return lo;
}

const MapDescriptor& HerglotzField::piece_at(double t) const {
  return pieces_[piece_index(t)];
}

bool HerglotzField::is_regular(double t) const {
  if (t < 0.0) return false;
  for (size_t i = 1; i < breakpoints_.size(); ++i)
    if (breakpoints_[i] == t) return false;
  return true;
}

CVec HerglotzField::eval(const CVec& z, double t) const {
  return eval_map(piece_at(t), z);
}

namespace {

using detail::OdeOptions;
using detail::OdeStats;

OdeOptions ode_options(const IntegrationOptions& opts) {
  return OdeOptions{opts.abs_tol, opts.rel_tol, opts.max_steps};
}

// Sub-intervals of [s,t] on which the field is constant.
std::vector<std::pair<double, double>> piece_spans(const HerglotzField& g, double s,
                                                   double t) {
  std::vector<std::pair<double, double>> spans;
  double cur = s;
  while (cur < t) {
    double next = t;
    for (double b : g.breakpoints())
      if (b > cur && b < next) next = b;
    spans.emplace_back(cur, next);
    cur = next;
  }
  return spans;
}

struct PointState {
  CVec z;
  CMat jac;
};

CVec pack(const PointState& st) {
  const int n = static_cast<int>(st.z.size());
  CVec y(n + n * n);
  y.head(n) = st.z;
  y.tail(n * n) = Eigen::Map<const CVec>(st.jac.data(), n * n);
  return y;
}

PointState unpack(const CVec& y, int n) {
  PointState st;
  st.z = y.head(n);
  st.jac = Eigen::Map<const CMat>(y.tail(n * n).data(), n, n);
  return st;
}

// Drives one point + Jacobian through all pieces of [s,t].
PointState flow_one(const HerglotzField& g, double s, double t, const CVec& z0,
                    const IntegrationOptions& opts, OdeStats& stats, bool scaled) {
  const int n = g.dim();
  PointState st;
  st.z = scaled ? CVec(std::exp(s) * z0) : z0;
  st.jac = scaled ? CMat(std::exp(s) * CMat::Identity(n, n))
                  : CMat(CMat::Identity(n, n));
  if (t == s) return st;

  CVec y = pack(st);
  double prev_norm = z0.norm();
  for (const auto& [a, b] : piece_spans(g, s, t)) {
    const MapDescriptor& piece = g.piece_at(a);
    auto rhs = [&](double tau, const CVec& state) -> CVec {
      const PointState cur = unpack(state, n);
      CVec out(state.size());
      if (scaled) {
        const double decay = std::exp(-tau);
        const CVec w = decay * cur.z;
        out.head(n) = std::exp(tau) * eval_plus_identity(piece, w);
        const CMat jp = jacobian_plus_identity(piece, w) * cur.jac;
        out.tail(n * n) = Eigen::Map<const CVec>(jp.data(), n * n);
      } else {
        out.head(n) = eval_map(piece, cur.z);
        const CMat jp = jacobian_map(piece, cur.z) * cur.jac;
        out.tail(n * n) = Eigen::Map<const CVec>(jp.data(), n * n);
      }
      return out;
    };
    auto on_accept = [&](double tau, const CVec& state) {
      // Schwarz-type contraction along every accepted step, with slack at
      // the scale of the local error control.
      const double norm =
          scaled ? std::exp(-tau) * state.head(n).norm() : state.head(n).norm();
      const double slack =
          100.0 * (opts.abs_tol + opts.rel_tol * (1.0 + prev_norm)) + 1e-12;
      if (norm > prev_norm + slack)
        throw numerical_error("contraction violated along trajectory");
      prev_norm = norm;
    };
    detail::rk45_integrate(rhs, a, b, y, ode_options(opts), stats, on_accept);
  }
  return unpack(y, n);
}

}  // namespace

FlowResult integrate_flow_impl(const HerglotzField& g, double s, double t,
                               const std::vector<CVec>& points,
                               const IntegrationOptions& opts, bool scaled) {
  require(s >= 0.0 && s <= t, "need 0 <= s <= t");
  for (const CVec& z : points) {
    require(z.size() == g.dim(), "point dimension mismatch");
    require(z.norm() < 1.0, "points must lie in the open unit ball");
  }
  FlowResult result;
  result.s = s;
  result.t = t;
  result.points = points;
  result.values.resize(points.size());
  result.jacobians.resize(points.size());
  std::vector<OdeStats> stats(points.size());
  parallel_for(static_cast<int>(points.size()), opts.threads, [&](int j) {
    const PointState st = flow_one(g, s, t, points[j], opts, stats[j], scaled);
    result.values[j] = st.z;
    result.jacobians[j] = st.jac;
  });
  for (const OdeStats& st : stats) {
    result.steps_taken += st.steps_accepted;
    result.error_estimate = std::max(result.error_estimate, st.error_accum);
  }
  return result;
}

FlowResult integrate_flow(const HerglotzField& g, double s, double t,
                          const std::vector<CVec>& points,
                          const IntegrationOptions& opts) {
  return integrate_flow_impl(g, s, t, points, opts, false);
}

FlowResult integrate_scaled_flow(const HerglotzField& g, double s, double t,
                                 const std::vector<CVec>& points,
                                 const IntegrationOptions& opts) {
  return integrate_flow_impl(g, s, t, points, opts, true);
}

EvolutionCheck evolution_map(const HerglotzField& g, double u, double s, double t,
                             const std::vector<CVec>& points,
                             const IntegrationOptions& opts) {
  require(0.0 <= u && u <= s && s <= t, "need 0 <= u <= s <= t");
  EvolutionCheck check;
  check.direct = integrate_flow(g, u, t, points, opts);
  const FlowResult leg1 = integrate_flow(g, u, s, points, opts);
  const FlowResult leg2 = integrate_flow(g, s, t, leg1.values, opts);
  check.composed = leg2.values;
  for (size_t j = 0; j < points.size(); ++j)
    check.residual =
        std::max(check.residual, (check.composed[j] - check.direct.values[j]).norm());
  return check;
}

namespace {

Jet unpack_jet(const CVec& y, int n, int degree) {
  Jet j(n, degree);
  j.table() = Eigen::Map<const CMat>(y.data(), n, j.basis().size());
  return j;
}

CVec pack_jet(const Jet& j) {
  return Eigen::Map<const CVec>(j.table().data(), j.table().size());
}

Jet flow_jet_impl(const HerglotzField& g, double s, double t, int degree,
                  const IntegrationOptions& opts, bool scaled) {
  require(s >= 0.0 && s <= t, "need 0 <= s <= t");
  require(degree >= 1, "jet degree must be >= 1");
  const int n = g.dim();
  Jet w = Jet::identity(n, degree);
  if (scaled) w *= Cplx(std::exp(s), 0);
  if (t == s) return w;

  CVec y = pack_jet(w);
  OdeStats stats;
  for (const auto& [a, b] : piece_spans(g, s, t)) {
    const MapDescriptor& piece = g.piece_at(a);
    const Jet piece_jet = jet_from_closed_form(piece, degree);
    Jet piece_plus = piece_jet;
    piece_plus += Jet::identity(n, degree);
    auto rhs = [&](double tau, const CVec& state) -> CVec {
      Jet cur = unpack_jet(state, n, degree);
      if (scaled) {
        // d/dt jet(e^t phi) = e^t * jet((G + id) o (e^{-t} v))
        cur *= Cplx(std::exp(-tau), 0);
        Jet dv = jet_compose(piece_plus, cur, degree);
        dv *= Cplx(std::exp(tau), 0);
        return pack_jet(dv);
      }
      return pack_jet(jet_compose(piece_jet, cur, degree));
    };
    detail::rk45_integrate(rhs, a, b, y, ode_options(opts), stats,
                           [](double, const CVec&) {});
  }
  return unpack_jet(y, n, degree);
}

}  // namespace

Jet flow_jet(const HerglotzField& g, double s, double t, int degree,
             const IntegrationOptions& opts) {
  return flow_jet_impl(g, s, t, degree, opts, false);
}

Jet scaled_flow_jet(const HerglotzField& g, double s, double t, int degree,
                    const IntegrationOptions& opts) {
  return flow_jet_impl(g, s, t, degree, opts, true);
}

namespace {

// Empirical quadratic-remainder constant sup ||h(z)+z|| / ||z||^2 over the
// default grid and all pieces; feeds the a-priori tail bound.
double remainder_constant(const HerglotzField& g) {
  const std::vector<CVec> pts = grid_points(g.dim(), default_membership_grid());
  double m = 0.0;
  for (const auto& piece : g.pieces())
    for (const CVec& z : pts)
      m = std::max(m, eval_plus_identity(piece, z).norm() / z.squaredNorm());
  return m;
}

double tail_bound(double m_const, double horizon, const std::vector<CVec>& points) {
  double worst = 0.0;
  for (const CVec& z : points) {
    const double r = z.norm();
    const double c = r * r / std::pow(1.0 - r, 4);
    worst = std::max(worst, c);
  }
  return m_const * std::exp(-horizon) * worst;
}

}  // namespace

ScaledLimit scaled_limit(const HerglotzField& g, double s,
                         const std::vector<CVec>& points,
                         const ScaledLimitOptions& opts) {
  require(opts.tol > 0.0, "stabilization tolerance must be > 0");
  require(!points.empty(), "scaled limit needs at least one sample point");
  require(s >= 0.0 && s < opts.horizon_cap, "base time must lie below the horizon cap");

  ScaledLimit out;
  out.s = s;
  out.points = points;

  FlowResult prev = integrate_scaled_flow(g, s, s, points, opts.integ);
  double horizon = s;
  bool stable = false;
  while (horizon < opts.horizon_cap) {
    const double next = std::min(horizon + opts.checkpoint_dt, opts.horizon_cap);
    FlowResult cur = integrate_scaled_flow(g, s, next, points, opts.integ);
    double diff = 0.0;
    for (size_t j = 0; j < points.size(); ++j) {
      diff = std::max(diff, (cur.values[j] - prev.values[j]).norm());
      diff = std::max(diff, (cur.jacobians[j] - prev.jacobians[j]).norm());
    }
    prev = std::move(cur);
    horizon = next;
    if (horizon > s && diff <= opts.tol) {
      stable = true;
      break;
    }
  }
  if (!stable)
    throw numerical_error("horizon cap reached before the scaled flow stabilized");

  out.horizon = horizon;
  out.values = prev.values;
  out.jacobians = prev.jacobians;
  out.truncation_bound = tail_bound(remainder_constant(g), horizon, points);
  return out;
}

ScaledLimit scaled_limit_jet(const HerglotzField& g, double s, int degree,
                             const ScaledLimitOptions& opts) {
  require(opts.tol > 0.0, "stabilization tolerance must be > 0");
  require(s >= 0.0 && s < opts.horizon_cap, "base time must lie below the horizon cap");

  ScaledLimit out;
  out.s = s;

  Jet prev = scaled_flow_jet(g, s, s, degree, opts.integ);
  double horizon = s;
  bool stable = false;
  while (horizon < opts.horizon_cap) {
    const double next = std::min(horizon + opts.checkpoint_dt, opts.horizon_cap);
    Jet cur = scaled_flow_jet(g, s, next, degree, opts.integ);
    Jet delta = cur;
    delta -= prev;
    const double diff = delta.max_abs_coeff();
    prev = std::move(cur);
    horizon = next;
    if (horizon > s && diff <= opts.tol) {
      stable = true;
      break;
    }
  }
  if (!stable)
    throw numerical_error("horizon cap reached before the scaled jet stabilized");

  out.horizon = horizon;
  out.jet = prev;
  CVec ref(g.dim());
  ref.setConstant(Cplx(0.5 / std::sqrt(static_cast<double>(g.dim())), 0));
  out.truncation_bound = tail_bound(remainder_constant(g), horizon, {ref});
  return out;
}

Cplx koebe_function(Cplx zeta, Cplx z) {
  const Cplx d = 1.0 + std::conj(zeta) * z;
  return z / (d * d);
}

Cplx koebe_oracle(Cplx zeta, double s, double t, Cplx z) {
  require(std::abs(std::abs(zeta) - 1.0) < 1e-9, "zeta must be unimodular");
  require(std::abs(z) < 1.0, "point must lie in the open unit disc");
  require(0.0 <= s && s <= t, "need 0 <= s <= t");
  const Cplx zb = std::conj(zeta);
  const Cplx c = std::exp(-(t - s)) * koebe_function(zeta, z);
  if (std::abs(c) == 0.0) return Cplx(0, 0);

  // c * zb^2 * phi^2 + (2 c zb - 1) phi + c = 0; the two roots multiply to
  // zeta^2, so exactly one lies inside the closed unit disc.
  const Cplx a = c * zb * zb;
  const Cplx b = 2.0 * c * zb - 1.0;
  const Cplx disc = b * b - 4.0 * a * c;
  const Cplx sq = std::sqrt(disc);
  const Cplx big = (std::abs(b + sq) >= std::abs(b - sq)) ? (b + sq) : (b - sq);
  const Cplx q = -0.5 * big;
  const Cplx r1 = q / a;
  const Cplx r2 = c / q;
  const Cplx phi = (std::abs(r1) <= std::abs(r2)) ? r1 : r2;
  if (!(std::abs(phi) < 1.0))
    throw numerical_error("transfer equation produced no root inside the disc");
  return phi;
}

}  // namespace loewner
