// Acceptance suite: one pass/fail line per criterion, exit code = #failures.
// Every tolerance is pinned in code next to the check it gates.

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "loewner/control.hpp"
#include "oracles.hpp"

using namespace loewner;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int failures = 0;

void report(int index, const std::string& label, bool ok, const std::string& detail) {
  std::printf("[%s] %2d. %s — %s\n", ok ? "PASS" : "FAIL", index, label.c_str(),
              detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

CVec pt1(double re, double im = 0.0) {
  CVec z(1);
  z[0] = Cplx(re, im);
  return z;
}

HerglotzField koebe_field() {
  return HerglotzField::constant(MapDescriptor::slice_moebius(Cplx(-1, 0)));
}

IntegrationOptions tight() {
  IntegrationOptions opts;
  opts.abs_tol = opts.rel_tol = 1e-12;
  return opts;
}

// 1. max |phi_t(z) - e^{-t} z| and Jacobian deviation <= 1e-9 for the radial
//    field, n in {1,2,3}, t in [0,10], ||z|| <= 0.9.
void criterion_linear_exactness() {
  double worst_value = 0.0, worst_jac = 0.0;
  std::mt19937_64 rng(1001);
  for (int dim : {1, 2, 3}) {
    const HerglotzField g = HerglotzField::constant(MapDescriptor::linear_radial(dim));
    std::vector<CVec> points;
    for (int rep = 0; rep < 3; ++rep)
      points.push_back(oracles::random_ball_point(dim, 0.9, rng));
    points.push_back(0.9 * oracles::random_unit_vector(dim, rng));
    for (double t : {0.0, 0.5, 1.0, 2.0, 3.5, 5.0, 7.0, 10.0}) {
      const FlowResult flow = integrate_flow(g, 0.0, t, points, tight());
      for (size_t j = 0; j < points.size(); ++j) {
        worst_value = std::max(
            worst_value, (flow.values[j] - std::exp(-t) * points[j]).norm());
        worst_jac = std::max(worst_jac,
                             (flow.jacobians[j] -
                              std::exp(-t) * CMat::Identity(dim, dim))
                                 .norm());
      }
    }
  }
  report(1, "linear-field exactness",
         worst_value <= 1e-9 && worst_jac <= 1e-9,
         "max value err " + fmt(worst_value) + ", max jacobian err " +
             fmt(worst_jac) + " (tol 1e-9)");
}

// 2. adaptive flow vs the transfer-equation oracle, and the scaled limit of
//    the koebe field at z = 0.5.
void criterion_koebe_oracle() {
  double worst = 0.0;
  for (Cplx zeta : {Cplx(-1, 0), Cplx(1, 0), Cplx(0, 1)}) {
    const HerglotzField g =
        HerglotzField::constant(MapDescriptor::slice_moebius(zeta));
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      for (double x : {0.1, 0.3, 0.5, 0.7}) {
        const FlowResult flow = integrate_flow(g, 0.0, t, {pt1(x)}, tight());
        worst = std::max(worst, std::abs(flow.values[0][0] -
                                         koebe_oracle(zeta, 0.0, t, Cplx(x, 0))));
      }
    }
  }
  ScaledLimitOptions lo;
  lo.integ = tight();
  const ScaledLimit lim = scaled_limit(koebe_field(), 0.0, {pt1(0.5)}, lo);
  const double limit_err = std::abs(lim.values[0][0] - Cplx(2, 0));
  report(2, "koebe oracle equivalence",
         worst <= 1e-8 && limit_err <= 1e-6,
         "max flow err " + fmt(worst) + " (tol 1e-8), |f(0.5) - 2| = " +
             fmt(limit_err) + " (tol 1e-6)");
}

// 3. second coefficient of the flow jet at t = 1 and of the limit jet.
void criterion_jet_transport() {
  const HerglotzField g = koebe_field();
  const Jet jet = flow_jet(g, 0.0, 1.0, 2, tight());
  const double e1 = std::exp(-1.0);
  const double err_flow = std::abs(jet.coeff(0, {2}) - 2.0 * e1 * (1.0 - e1));

  ScaledLimitOptions lo;
  lo.integ = tight();
  const ScaledLimit lim = scaled_limit_jet(g, 0.0, 2, lo);
  const double err_limit = std::abs(lim.jet->coeff(0, {2}) - Cplx(2, 0));
  report(3, "jet transport",
         err_flow <= 1e-8 && err_limit <= 1e-6,
         "|a2(phi_1) - 2e^{-1}(1-e^{-1})| = " + fmt(err_flow) +
             " (tol 1e-8), |a2(f) - 2| = " + fmt(err_limit) + " (tol 1e-6)");
}

// 4. needle-variation ladders for three base/needle pairs at t in {T, T+1, inf}.
void criterion_variational_formula() {
  std::mt19937_64 rng(1004);
  struct Pair {
    HerglotzField base;
    MapDescriptor needle;
    std::vector<CVec> points;
    std::string name;
  };
  std::vector<Pair> pairs;
  pairs.push_back({HerglotzField::constant(MapDescriptor::linear_radial(1)),
                   MapDescriptor::slice_moebius(Cplx(1, 0)),
                   {pt1(0.5), pt1(0.2, 0.3)},
                   "linear+moebius"});
  pairs.push_back({koebe_field(),
                   MapDescriptor::linear_radial(1),
                   {pt1(0.5), pt1(-0.4, 0.1)},
                   "koebe+linear"});
  std::vector<MapDescriptor> parts{
      MapDescriptor::slice_moebius(oracles::random_unimodular(rng),
                                   oracles::random_unit_vector(2, rng)),
      MapDescriptor::slice_moebius(oracles::random_unimodular(rng),
                                   oracles::random_unit_vector(2, rng))};
  pairs.push_back({HerglotzField({0.0, 0.5}, parts),
                   MapDescriptor::slice_moebius(oracles::random_unimodular(rng),
                                                oracles::random_unit_vector(2, rng)),
                   {oracles::random_ball_point(2, 0.6, rng),
                    oracles::random_ball_point(2, 0.4, rng)},
                   "2-piece n=2+moebius"});

  const double T = 1.0;
  bool ok = true;
  double worst_ratio = 0.0, worst_terminal = 0.0;
  VariationCheckOptions opts;  // halving ladder 1e-1 .. ~1e-4
  for (const Pair& pair : pairs) {
    for (double t : {T, T + 1.0, kInf}) {
      const ResidualReport r =
          verify_variation(pair.base, pair.needle, 0.0, T, t, pair.points, opts);
      for (double ratio : r.decay_ratios) worst_ratio = std::max(worst_ratio, ratio);
      worst_terminal = std::max(worst_terminal, r.normalized_terminal);
      ok = ok && r.pass && r.normalized_terminal <= 1e-3;
    }
  }
  report(4, "variational formula",
         ok && worst_ratio <= 0.75,
         "max decay ratio " + fmt(worst_ratio) +
             " (tol 0.75), max normalized terminal residual " +
             fmt(worst_terminal) + " (tol 1e-3)");
}

// 5. two-parameter composition identity on random piecewise fields.
void criterion_semigroup() {
  std::mt19937_64 rng(1005);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const int dim = (rep % 2) + 1;
    std::vector<double> breakpoints{0.0};
    std::vector<MapDescriptor> parts{MapDescriptor::slice_moebius(
        oracles::random_unimodular(rng), oracles::random_unit_vector(dim, rng))};
    const int extra = 1 + static_cast<int>(oracles::uniform01(rng) * 2);
    for (int i = 0; i < extra; ++i) {
      breakpoints.push_back(breakpoints.back() + 0.3 + 0.5 * oracles::uniform01(rng));
      parts.push_back(MapDescriptor::slice_moebius(
          oracles::random_unimodular(rng), oracles::random_unit_vector(dim, rng)));
    }
    const HerglotzField g(std::move(breakpoints), std::move(parts));
    const double u = oracles::uniform01(rng);
    const double s = u + oracles::uniform01(rng);
    const double t = s + oracles::uniform01(rng);
    std::vector<CVec> points{oracles::random_ball_point(dim, 0.7, rng),
                             oracles::random_ball_point(dim, 0.5, rng)};
    worst = std::max(worst, evolution_map(g, u, s, t, points).residual);
  }
  report(5, "semigroup property", worst <= 1e-8,
         "max composition residual " + fmt(worst) + " (tol 1e-8)");
}

// 6. maximum principle, positive and negative cases.
std::vector<double> scan_grid() {
  std::vector<double> grid;
  for (double t = 0.0; t <= 4.0 + 1e-12; t += 0.5) grid.push_back(t);
  return grid;
}

PontryaginReport koebe_pontryagin() {
  return pontryagin_check(LinearFunctional::coefficient({2}), koebe_field(),
                          ControlFamily::slice_grid(), scan_grid(), 1e-3);
}

void criterion_maximum_principle(const PontryaginReport& positive) {
  bool argmax_ok = true;
  for (const PontryaginRow& row : positive.rows)
    argmax_ok = argmax_ok &&
                std::abs(row.maximizer.zeta - Cplx(-1, 0)) <= 2.0 * M_PI / 256;

  const PontryaginReport negative = pontryagin_check(
      LinearFunctional::coefficient({2}),
      HerglotzField::constant(MapDescriptor::linear_radial(1)),
      ControlFamily::slice_grid(), scan_grid(), 1e-3);

  report(6, "maximum principle",
         positive.pass && argmax_ok && !negative.pass &&
             negative.worst_violation >= 1.9,
         "koebe case worst slack " + fmt(positive.worst_violation) +
             " (tol 1e-3), argmax at zeta = -1; radial case violation " +
             fmt(negative.worst_violation) + " (>= 1.9)");
}

// 7. constancy of the scanned maximum on the certified scenario.
void criterion_constancy(const PontryaginReport& positive) {
  double worst = 0.0;
  for (const PontryaginRow& row : positive.rows)
    worst = std::max(worst, std::abs(row.m - (-2.0)));
  report(7, "hamiltonian constancy", worst <= 1e-3,
         "max |m(t) + 2| = " + fmt(worst) + " (tol 1e-3)");
}

// 8. the transported maximum approaches -Re L(F): certified at t = 0 for the
//    koebe scenario, and at t = 20 for five random scenarios with arbitrary
//    families.
void criterion_pommerenke() {
  const PommerenkeReport koebe = pommerenke_check(
      LinearFunctional::coefficient({2}), koebe_field(), ControlFamily::slice_grid());
  bool ok = koebe.zero_deviation <= 1e-3;
  double worst_limit = 0.0;

  std::mt19937_64 rng(1008);
  for (int rep = 0; rep < 5; ++rep) {
    const int dim = (rep % 2) + 1;
    std::vector<MapDescriptor> parts{
        MapDescriptor::slice_moebius(oracles::random_unimodular(rng),
                                     oracles::random_unit_vector(dim, rng)),
        MapDescriptor::slice_moebius(oracles::random_unimodular(rng),
                                     oracles::random_unit_vector(dim, rng))};
    const HerglotzField g({0.0, 0.7}, parts);

    std::vector<PointAtom> point_atoms{
        PointAtom{oracles::random_ball_point(dim, 0.5, rng), rep % dim,
                  Cplx(1.0, oracles::uniform01(rng) - 0.5)}};
    std::vector<CoeffAtom> coeff_atoms;
    if (rep % 2 == 0) {
      MultiIndex alpha(dim, 0);
      alpha[0] = 2;
      coeff_atoms.push_back(CoeffAtom{alpha, 0, Cplx(0.4, 0.3)});
    }
    const LinearFunctional l(dim, point_atoms, coeff_atoms);

    // any family will do for the limit identity: alternate between a
    // singleton and a coarse parametric grid
    const ControlFamily family =
        (rep % 2 == 0)
            ? ControlFamily::explicit_list({MapDescriptor::linear_radial(dim)})
            : ControlFamily::slice_grid({64, false, 1e-6, 16});
    const PommerenkeReport r = pommerenke_check(l, g, family, 20.0, 1e-4);
    worst_limit = std::max(worst_limit, r.limit_deviation);
    ok = ok && r.limit_ok;
  }
  report(8, "pommerenke identity", ok,
         "koebe |m(0) + Re L(F)| = " + fmt(koebe.zero_deviation) +
             " (tol 1e-3), max |m(20) + Re L(F)| = " + fmt(worst_limit) +
             " (tol 1e-4) over 5 random scenarios");
}

// 9. the strict-dissipativity screen fires on the radial field and stays
//    quiet on every pure slice-Moebius field.
void criterion_screen() {
  const ScreenResult radial =
      support_screen(HerglotzField::constant(MapDescriptor::linear_radial(1)), 0.5);
  bool ok = radial.fires && std::abs(radial.sup_value - (-1.0)) <= 1e-12;

  std::mt19937_64 rng(1009);
  double closest_to_zero = -1.0;
  for (int rep = 0; rep < 6; ++rep) {
    const int dim = (rep % 2) + 1;
    const Cplx zeta = (rep < 3) ? Cplx(rep == 0 ? -1 : (rep == 1 ? 1 : 0),
                                       rep == 2 ? 1 : 0)
                                : oracles::random_unimodular(rng);
    const HerglotzField g = HerglotzField::constant(MapDescriptor::slice_moebius(
        zeta, oracles::random_unit_vector(dim, rng)));
    const ScreenResult r = support_screen(g, 0.5);
    ok = ok && !r.fires;
    closest_to_zero = std::max(closest_to_zero, r.sup_value);
  }
  report(9, "support screen", ok,
         "radial sup = " + fmt(radial.sup_value) +
             " (fires), moebius sup approaches 0 from below (max " +
             fmt(closest_to_zero) + ", margin 1e-6)");
}

// 10. membership suite.
void criterion_membership() {
  std::mt19937_64 rng(1010);
  bool all_pass = true;
  for (int rep = 0; rep < 8; ++rep) {
    const int dim = (rep % 3) + 1;
    const MapDescriptor moeb = MapDescriptor::slice_moebius(
        oracles::random_unimodular(rng), oracles::random_unit_vector(dim, rng));
    all_pass = all_pass && check_class_membership(moeb).pass;
    std::vector<MapDescriptor> parts{moeb, MapDescriptor::linear_radial(dim)};
    const double w = oracles::uniform01(rng);
    const MapDescriptor combo = MapDescriptor::convex({w, 1 - w}, std::move(parts));
    all_pass = all_pass && check_class_membership(combo).pass;
  }

  Jet bad(1, 2);
  bad.set_coeff(0, {1}, Cplx(-1, 0));
  bad.set_coeff(0, {2}, Cplx(3, 0));
  const MembershipReport reject = check_class_membership(MapDescriptor::poly(bad));
  const bool reject_ok = !reject.pass && reject.worst_margin > 0.0;

  Jet z2(1, 2);
  z2.set_coeff(0, {2}, Cplx(1, 0));
  const double radius = membership_radius(z2, 1e-4);
  const double radius_err = std::abs(radius - 1.0);

  report(10, "membership suite",
         all_pass && reject_ok && radius_err <= 1e-3,
         "random descriptors pass, -z+3z^2 rejected with margin " +
             fmt(reject.worst_margin) + " > 0, |radius(z^2) - 1| = " +
             fmt(radius_err) + " (tol 1e-3)");
}

}  // namespace

int main() {
  criterion_linear_exactness();
  criterion_koebe_oracle();
  criterion_jet_transport();
  criterion_variational_formula();
  criterion_semigroup();
  const PontryaginReport positive = koebe_pontryagin();
  criterion_maximum_principle(positive);
  criterion_constancy(positive);
  criterion_pommerenke();
  criterion_screen();
  criterion_membership();
  if (failures == 0) {
    std::printf("acceptance: all criteria satisfied\n");
  } else {
    std::printf("acceptance: %d criterion(s) failed\n", failures);
  }
  return failures;
}
