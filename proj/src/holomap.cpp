#include "loewner/holomap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace loewner {

namespace {

constexpr double kUnitTol = 1e-9;

void check_point(const MapDescriptor& m, const CVec& z) {
  require(z.size() == m.dim(), "point dimension mismatch");
  require(z.norm() < 1.0, "point must lie in the open unit ball");
}

Cplx slice_variable(const SliceMoebius& s, const CVec& z) { return inner(z, s.u); }

}  // namespace

MapDescriptor MapDescriptor::linear_radial(int dim) {
  require(dim >= 1, "dimension must be >= 1");
  return MapDescriptor(dim, LinearRadial{});
}

MapDescriptor MapDescriptor::slice_moebius(Cplx zeta, CVec u) {
  require(std::abs(std::abs(zeta) - 1.0) < kUnitTol, "zeta must be unimodular");
  require(u.size() >= 1, "u must be nonempty");
  require(std::abs(u.norm() - 1.0) < kUnitTol, "u must be a unit vector");
  zeta /= std::abs(zeta);
  u /= u.norm();
  const int n = static_cast<int>(u.size());
  return MapDescriptor(n, SliceMoebius{zeta, std::move(u)});
}

MapDescriptor MapDescriptor::slice_moebius(Cplx zeta) {
  CVec u(1);
  u[0] = Cplx(1, 0);
  return slice_moebius(zeta, std::move(u));
}

MapDescriptor MapDescriptor::poly(Jet jet) {
  const int n = jet.dim();
  return MapDescriptor(n, PolyJet{std::move(jet)});
}

MapDescriptor MapDescriptor::convex(std::vector<double> weights,
                                    std::vector<MapDescriptor> parts) {
  require(!parts.empty(), "convex combination needs at least one part");
  require(weights.size() == parts.size(), "weights/parts size mismatch");
  double sum = 0.0;
  for (double w : weights) {
    require(w >= 0.0, "convex weights must be nonnegative");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-12, "convex weights must sum to 1");
  const int n = parts.front().dim();
  for (const auto& p : parts) require(p.dim() == n, "convex parts dimension mismatch");
  return MapDescriptor(n, ConvexCombo{std::move(weights), std::move(parts)});
}

CVec eval_map(const MapDescriptor& m, const CVec& z) {
  check_point(m, z);
  return std::visit(
      [&](const auto& v) -> CVec {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearRadial>) {
          return -z;
        } else if constexpr (std::is_same_v<T, SliceMoebius>) {
          const Cplx w = slice_variable(v, z);
          return -z * ((v.zeta + w) / (v.zeta - w));
        } else if constexpr (std::is_same_v<T, PolyJet>) {
          return v.jet.eval(z);
        } else {
          CVec out = CVec::Zero(z.size());
          for (size_t i = 0; i < v.parts.size(); ++i)
            out += v.weights[i] * eval_map(v.parts[i], z);
          return out;
        }
      },
      m.payload());
}

CMat jacobian_map(const MapDescriptor& m, const CVec& z) {
  check_point(m, z);
  const int n = m.dim();
  return std::visit(
      [&](const auto& v) -> CMat {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearRadial>) {
          return -CMat::Identity(n, n);
        } else if constexpr (std::is_same_v<T, SliceMoebius>) {
          const Cplx w = slice_variable(v, z);
          const Cplx g = (v.zeta + w) / (v.zeta - w);
          const Cplx gp = 2.0 * v.zeta / ((v.zeta - w) * (v.zeta - w));
          return -g * CMat::Identity(n, n) - gp * (z * v.u.adjoint());
        } else if constexpr (std::is_same_v<T, PolyJet>) {
          return v.jet.jacobian(z);
        } else {
          CMat out = CMat::Zero(n, n);
          for (size_t i = 0; i < v.parts.size(); ++i)
            out += v.weights[i] * jacobian_map(v.parts[i], z);
          return out;
        }
      },
      m.payload());
}

CVec eval_plus_identity(const MapDescriptor& m, const CVec& z) {
  check_point(m, z);
  return std::visit(
      [&](const auto& v) -> CVec {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearRadial>) {
          return CVec::Zero(z.size());
        } else if constexpr (std::is_same_v<T, SliceMoebius>) {
          // z + h(z) = -2 z <z,u> / (zeta - <z,u>), quadratic at the origin.
          const Cplx w = slice_variable(v, z);
          return z * (-2.0 * w / (v.zeta - w));
        } else if constexpr (std::is_same_v<T, PolyJet>) {
          CVec out = v.jet.eval(z);
          out += z;
          return out;
        } else {
          CVec out = CVec::Zero(z.size());
          for (size_t i = 0; i < v.parts.size(); ++i)
            out += v.weights[i] * eval_plus_identity(v.parts[i], z);
          return out;
        }
      },
      m.payload());
}

CMat jacobian_plus_identity(const MapDescriptor& m, const CVec& z) {
  check_point(m, z);
  const int n = m.dim();
  return std::visit(
      [&](const auto& v) -> CMat {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearRadial>) {
          return CMat::Zero(n, n);
        } else if constexpr (std::is_same_v<T, SliceMoebius>) {
          const Cplx w = slice_variable(v, z);
          const Cplx one_minus_g = -2.0 * w / (v.zeta - w);
          const Cplx gp = 2.0 * v.zeta / ((v.zeta - w) * (v.zeta - w));
          return one_minus_g * CMat::Identity(n, n) - gp * (z * v.u.adjoint());
        } else if constexpr (std::is_same_v<T, PolyJet>) {
          CMat out = v.jet.jacobian(z);
          out += CMat::Identity(n, n);
          return out;
        } else {
          CMat out = CMat::Zero(n, n);
          for (size_t i = 0; i < v.parts.size(); ++i)
            out += v.weights[i] * jacobian_plus_identity(v.parts[i], z);
          return out;
        }
      },
      m.payload());
}

Jet jet_from_closed_form(const MapDescriptor& m, int degree) {
  require(degree >= 1, "jet degree must be >= 1");
  const int n = m.dim();
  return std::visit(
      [&](const auto& v) -> Jet {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LinearRadial>) {
          Jet j = Jet::identity(n, degree);
          j *= Cplx(-1, 0);
          return j;
        } else if constexpr (std::is_same_v<T, SliceMoebius>) {
          // h(z) = -z * g(w), w = <z,u>, g(w) = 1 + 2 sum_{m>=1} (w/zeta)^m.
          Jet w(n, degree);
          for (int k = 0; k < n; ++k) {
            MultiIndex e(n, 0);
            e[k] = 1;
            w.set_coeff(0, e, std::conj(v.u[k]));
          }
          // g(w) - 1 as a jet in component 0 (valuation 1).
          Jet series(n, degree);
          Jet pw = w;
          Cplx scale = 2.0 / v.zeta;
          for (int p = 1; p <= degree - 1; ++p) {
            Jet term = pw;
            term *= scale;
            series += term;
            if (p + 1 <= degree - 1) {
              // pw <- pw * w (component-0 polynomial product via composition
              // machinery is overkill; multiply rows directly)
              Jet next(n, degree);
              const JetBasis& basis = next.basis();
              for (int i = 0; i < basis.size(); ++i) {
                if (pw.table()(0, i) == Cplx(0, 0)) continue;
                for (int j = 0; j < basis.size(); ++j) {
                  if (w.table()(0, j) == Cplx(0, 0)) continue;
                  const int t = basis.product(i, j);
                  if (t >= 0) next.table()(0, t) += pw.table()(0, i) * w.table()(0, j);
                }
              }
              pw = next;
              scale /= v.zeta;
            }
          }
          // assemble -z_k * (1 + series)
          Jet out(n, degree);
          const JetBasis& basis = out.basis();
          for (int k = 0; k < n; ++k) {
            MultiIndex e(n, 0);
            e[k] = 1;
            out.add_coeff(k, e, Cplx(-1, 0));
            const int zcol = basis.find(e);
            for (int j = 0; j < basis.size(); ++j) {
              const Cplx c = series.table()(0, j);
              if (c == Cplx(0, 0)) continue;
              const int t = basis.product(zcol, j);
              if (t >= 0) out.table()(k, t) -= c;
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, PolyJet>) {
          return v.jet.truncated(degree);
        } else {
          Jet out(n, degree);
          for (size_t i = 0; i < v.parts.size(); ++i) {
            Jet part = jet_from_closed_form(v.parts[i], degree);
            part *= Cplx(v.weights[i], 0);
            out += part;
          }
          return out;
        }
      },
      m.payload());
}

BallGrid default_membership_grid() {
  return BallGrid{{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95}, 64};
}

BallGrid boundary_refined_grid() {
  BallGrid g = default_membership_grid();
  for (double r : {0.99, 0.999, 0.9999, 1.0 - 1e-5, 1.0 - 1e-6, 1.0 - 1e-7})
    g.radii.push_back(r);
  return g;
}

namespace {

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * (index % base);
    index /= base;
  }
  return r;
}

std::vector<int> first_primes(int count) {
  std::vector<int> primes;
  for (int x = 2; static_cast<int>(primes.size()) < count; ++x) {
    bool is_prime = true;
    for (int p : primes) {
      if (p * p > x) break;
      if (x % p == 0) {
        is_prime = false;
        break;
      }
    }
    if (is_prime) primes.push_back(x);
  }
  return primes;
}

}  // namespace

std::vector<CVec> sphere_design(int dim, int count) {
  require(dim >= 1 && count >= 1, "sphere design needs dim >= 1, count >= 1");
  const int coords = 2 * dim;
  const std::vector<int> primes = first_primes(coords);
  std::vector<CVec> out;
  out.reserve(count);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int i = 1; out.size() < static_cast<size_t>(count); ++i) {
    RVec g(coords);
    for (int m = 0; m + 1 < coords; m += 2) {
      const double u1 = halton(i, primes[m]);
      const double u2 = halton(i, primes[m + 1]);
      const double rad = std::sqrt(-2.0 * std::log(std::max(u1, 1e-300)));
      g[m] = rad * std::cos(two_pi * u2);
      g[m + 1] = rad * std::sin(two_pi * u2);
    }
    const double norm = g.norm();
    if (norm < 1e-12) continue;
    g /= norm;
    CVec z(dim);
    for (int k = 0; k < dim; ++k) z[k] = Cplx(g[2 * k], g[2 * k + 1]);
    out.push_back(std::move(z));
  }
  return out;
}

std::vector<CVec> grid_points(int dim, const BallGrid& grid) {
  require(!grid.radii.empty() && grid.directions >= 1, "empty sample grid");
  std::vector<CVec> dirs;
  if (dim == 1) {
    dirs.reserve(grid.directions);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int k = 0; k < grid.directions; ++k) {
      CVec z(1);
      const double theta = two_pi * k / grid.directions;
      z[0] = Cplx(std::cos(theta), std::sin(theta));
      dirs.push_back(std::move(z));
    }
  } else {
    dirs = sphere_design(dim, grid.directions);
  }
  std::vector<CVec> out;
  out.reserve(grid.radii.size() * dirs.size());
  for (double r : grid.radii) {
    require(r > 0.0 && r < 1.0, "grid radii must lie in (0,1)");
    for (const CVec& d : dirs) out.push_back(r * d);
  }
  return out;
}

MembershipReport check_class_membership(const MapDescriptor& m,
                                        const std::vector<double>& radii,
                                        int directions_per_radius, double tol) {
  return check_class_membership(m, BallGrid{radii, directions_per_radius}, tol);
}

MembershipReport check_class_membership(const MapDescriptor& m, const BallGrid& grid,
                                        double tol) {
  require(tol >= 0.0, "tolerance must be >= 0");
  const int n = m.dim();
  MembershipReport report;
  report.tolerance = tol;

  const CVec origin = CVec::Zero(n);
  const double origin_err = eval_map(m, origin).norm();
  const double jac_err = (jacobian_map(m, origin) + CMat::Identity(n, n)).norm();
  report.normalization_ok = origin_err <= tol && jac_err <= std::max(tol, 1e-12);

  const std::vector<CVec> pts = grid_points(n, grid);
  double worst = -std::numeric_limits<double>::infinity();
  report.worst_point = pts.front();
  for (const CVec& z : pts) {
    const double margin = inner(eval_map(m, z), z).real() / z.squaredNorm();
    if (margin > worst) {
      worst = margin;
      report.worst_point = z;
    }
  }
  report.worst_margin = worst;
  report.pass = report.normalization_ok && worst <= tol;
  return report;
}

MembershipReport check_class_membership(const MapDescriptor& m) {
  return check_class_membership(m, default_membership_grid(), 1e-12);
}

double membership_radius(const Jet& p, double tol) {
  require(tol > 0.0, "tolerance must be > 0");
  const int n = p.dim();
  for (int k = 0; k < n; ++k) {
    for (int col = 0; col < p.basis().size(); ++col) {
      if (total_degree(p.basis().index(col)) == 1)
        require(p.table()(k, col) == Cplx(0, 0),
                "perturbation must have no linear term");
    }
  }
  if (p.max_abs_coeff() == 0.0) return std::numeric_limits<double>::infinity();

  const BallGrid grid = boundary_refined_grid();
  const Jet id = Jet::identity(n, p.degree());
  auto passes = [&](double eps) {
    Jet j = p;
    j *= Cplx(eps, 0);
    j -= id;
    return check_class_membership(MapDescriptor::poly(std::move(j)), grid, 1e-12).pass;
  };

  constexpr double cap = 1e9;
  double lo = 0.0, hi = 1.0;
  while (passes(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) return std::numeric_limits<double>::infinity();
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (passes(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace loewner
