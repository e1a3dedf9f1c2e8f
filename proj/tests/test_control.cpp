#include <doctest.h>

#include <cmath>

#include "loewner/control.hpp"
#include "oracles.hpp"

using namespace loewner;

namespace {

CVec pt1(double re, double im = 0.0) {
  CVec z(1);
  z[0] = Cplx(re, im);
  return z;
}

HerglotzField linear_field(int dim = 1) {
  return HerglotzField::constant(MapDescriptor::linear_radial(dim));
}

HerglotzField koebe_field() {
  return HerglotzField::constant(MapDescriptor::slice_moebius(Cplx(-1, 0)));
}

LinearFunctional a2_functional() { return LinearFunctional::coefficient({2}); }

std::vector<double> range_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  for (double t = lo; t <= hi + 1e-12; t += step) grid.push_back(t);
  return grid;
}

HerglotzField random_field(int dim, std::mt19937_64& rng) {
  std::vector<double> breakpoints{0.0, 0.4 + 0.4 * oracles::uniform01(rng)};
  std::vector<MapDescriptor> parts;
  for (int i = 0; i < 2; ++i)
    parts.push_back(MapDescriptor::slice_moebius(
        oracles::random_unimodular(rng), oracles::random_unit_vector(dim, rng)));
  return HerglotzField(std::move(breakpoints), std::move(parts));
}

}  // namespace

TEST_CASE("functional construction guards its atoms") {
  CHECK_THROWS_AS(LinearFunctional(1, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(LinearFunctional::point_eval(pt1(1.0)), std::invalid_argument);
  CHECK_THROWS_AS(LinearFunctional::coefficient({0}), std::invalid_argument);
}

TEST_CASE("functional evaluation on jets and descriptors") {
  // point evaluation of the identity jet
  const LinearFunctional at_half = LinearFunctional::point_eval(pt1(0.5));
  CHECK(std::abs(eval_functional(at_half, Jet::identity(1, 2)) - Cplx(0.5, 0)) <
        1e-15);

  // a2 of z/(1-z)^2 = sum m z^m
  Jet koebe_jet(1, 3);
  for (int m = 1; m <= 3; ++m) koebe_jet.set_coeff(0, {m}, Cplx(m, 0));
  CHECK(std::abs(eval_functional(a2_functional(), koebe_jet) - Cplx(2, 0)) < 1e-15);

  // a2 of -z vanishes
  CHECK(std::abs(eval_functional(a2_functional(),
                                 MapDescriptor::linear_radial(1))) < 1e-15);

  // missing jet data for a coefficient atom
  MapSample sample;
  CHECK_THROWS_AS(eval_functional(a2_functional(), sample), std::invalid_argument);
}

TEST_CASE("functional evaluation is complex-linear in the map") {
  std::mt19937_64 rng(301);
  const LinearFunctional l(1,
                           {PointAtom{pt1(0.4, 0.1), 0, Cplx(0.7, -0.3)}},
                           {CoeffAtom{{2}, 0, Cplx(0, 1)},
                            CoeffAtom{{3}, 0, Cplx(-1, 0.5)}});
  for (int rep = 0; rep < 4; ++rep) {
    const Jet a = oracles::random_jet(1, 3, rng);
    const Jet b = oracles::random_jet(1, 3, rng);
    const Cplx c(oracles::uniform01(rng) - 0.5, oracles::uniform01(rng) - 0.5);
    Jet combo = a;
    combo *= c;
    combo += b;
    const Cplx direct = eval_functional(l, combo);
    const Cplx split = c * eval_functional(l, a) + eval_functional(l, b);
    CHECK(std::abs(direct - split) < 1e-12);
  }
}

TEST_CASE("transported functional with the identity target") {
  // F = id, phi_t = e^{-t} z: L_t(-z) = -0.5 for every t
  const HerglotzField g = linear_field();
  const LinearFunctional l = LinearFunctional::point_eval(pt1(0.5));
  for (double t : {0.0, 0.7, 2.0, 6.0}) {
    const Cplx v = transported_functional(l, g, t, MapDescriptor::linear_radial(1));
    CHECK(std::abs(v - Cplx(-0.5, 0)) < 1e-9);
  }

  // closed form for the Moebius candidate at t = 1
  const Cplx w = std::exp(-1.0) * 0.5;
  const Cplx expected = -0.5 * (1.0 + w) / (1.0 - w);
  const Cplx v =
      transported_functional(l, g, 1.0, MapDescriptor::slice_moebius(Cplx(1, 0)));
  CHECK(std::abs(v - expected) < 1e-9);
  CHECK(std::abs(expected - Cplx(-0.725399673560564, 0)) < 1e-12);
}

TEST_CASE("transported coefficient functional on the koebe scenario") {
  // L_0(h_zeta) = a2(dF h_zeta) = -2 conj(zeta) - 4 with F = z/(1-z)^2
  const HerglotzField g = koebe_field();
  const LinearFunctional l = a2_functional();
  for (Cplx zeta : {Cplx(-1, 0), Cplx(1, 0), Cplx(0, 1)}) {
    const Cplx v =
        transported_functional(l, g, 0.0, MapDescriptor::slice_moebius(zeta));
    const Cplx expected = -2.0 * std::conj(zeta) - 4.0;
    CHECK(std::abs(v - expected) < 1e-6);
  }
  // at the generating candidate the value stays -2 for all t
  for (double t : {0.0, 1.0, 2.5}) {
    const Cplx v =
        transported_functional(l, g, t, MapDescriptor::slice_moebius(Cplx(-1, 0)));
    CHECK(std::abs(v - Cplx(-2, 0)) < 1e-5);
  }
}

TEST_CASE("transported functional is linear in the candidate") {
  const HerglotzField g = koebe_field();
  const LinearFunctional l(1, {PointAtom{pt1(0.3), 0, Cplx(1, 0)}},
                           {CoeffAtom{{2}, 0, Cplx(0.5, 0.5)}});
  ScaledLimitOptions lo;
  const FunctionalFrame frame = FunctionalFrame::build(l, g, lo);
  const TransportContext ctx = TransportContext::build(frame, g, 1.0);

  const MapDescriptor a = MapDescriptor::linear_radial(1);
  const MapDescriptor b = MapDescriptor::slice_moebius(Cplx(0, 1));
  std::vector<MapDescriptor> parts{a, b};
  const MapDescriptor mix = MapDescriptor::convex({0.25, 0.75}, parts);
  const Cplx direct = ctx.eval(mix);
  const Cplx split = 0.25 * ctx.eval(a) + 0.75 * ctx.eval(b);
  CHECK(std::abs(direct - split) < 1e-12);
}

TEST_CASE("hamiltonian scan on the certified koebe scenario") {
  const HerglotzField g = koebe_field();
  const HamiltonianScan scan = hamiltonian_scan(a2_functional(), g,
                                                ControlFamily::slice_grid(),
                                                range_grid(0.0, 4.0, 0.5));
  for (const ScanEntry& e : scan.entries) {
    CHECK(std::abs(e.m - (-2.0)) < 1e-3);
    CHECK(std::abs(e.maximizer.zeta - Cplx(-1, 0)) < 2.0 * M_PI / 256);
  }
  CHECK(scan.constancy_deviation < 1e-3);
}

TEST_CASE("hamiltonian scan over singleton families") {
  const HerglotzField g = linear_field();
  const LinearFunctional l = LinearFunctional::point_eval(pt1(0.5));
  const ControlFamily family =
      ControlFamily::explicit_list({MapDescriptor::linear_radial(1)});
  const HamiltonianScan scan =
      hamiltonian_scan(l, g, family, range_grid(0.0, 3.0, 1.0));
  for (const ScanEntry& e : scan.entries) CHECK(std::abs(e.m - (-0.5)) < 1e-9);
  CHECK(scan.constancy_deviation < 1e-9);
}

TEST_CASE("scans are scheduling-independent") {
  std::mt19937_64 rng(347);
  const HerglotzField g = random_field(2, rng);
  CVec z(2);
  z << Cplx(0.3, 0.1), Cplx(-0.2, 0.2);
  const LinearFunctional l(2, {PointAtom{z, 0, Cplx(1, 0)}},
                           {CoeffAtom{{2, 0}, 1, Cplx(0.5, -0.1)}});
  const ControlFamily family = ControlFamily::slice_grid({32, true, 1e-6, 8});
  const std::vector<double> grid{0.0, 0.3, 0.9, 1.7};

  IntegrationOptions serial, parallel;
  parallel.threads = 4;
  const HamiltonianScan a = hamiltonian_scan(l, g, family, grid, serial);
  const HamiltonianScan b = hamiltonian_scan(l, g, family, grid, parallel);
  REQUIRE(a.entries.size() == b.entries.size());
  for (size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].m == b.entries[i].m);
    CHECK(a.entries[i].maximizer.zeta == b.entries[i].maximizer.zeta);
    CHECK(a.entries[i].maximizer.index == b.entries[i].maximizer.index);
  }
}

TEST_CASE("scan rejects grids through interior breakpoints") {
  std::mt19937_64 rng(311);
  const HerglotzField g = random_field(1, rng);
  const double bp = g.breakpoints()[1];
  CHECK_THROWS_AS(hamiltonian_scan(a2_functional(), g, ControlFamily::slice_grid(),
                                   {0.0, bp}),
                  std::invalid_argument);
}

TEST_CASE("maximum principle holds for the koebe extremal") {
  const PontryaginReport r =
      pontryagin_check(a2_functional(), koebe_field(), ControlFamily::slice_grid(),
                       range_grid(0.0, 4.0, 0.5), 1e-3);
  CHECK(r.pass);
  CHECK(r.worst_violation <= 1e-3);
  for (const PontryaginRow& row : r.rows)
    CHECK(std::abs(row.maximizer.zeta - Cplx(-1, 0)) < 2.0 * M_PI / 256);
}

TEST_CASE("maximum principle fails for the radial field under the a2 functional") {
  const PontryaginReport r =
      pontryagin_check(a2_functional(), linear_field(), ControlFamily::slice_grid(),
                       range_grid(0.0, 4.0, 0.5), 1e-3);
  CHECK_FALSE(r.pass);
  CHECK(r.worst_violation >= 1.9);
  CHECK(r.worst_t == 0.0);  // m(t) = 2 e^{-t} peaks at the first grid time
}

TEST_CASE("singleton family containing the field passes trivially") {
  std::mt19937_64 rng(313);
  const HerglotzField g =
      HerglotzField::constant(MapDescriptor::slice_moebius(Cplx(0, 1)));
  const PontryaginReport r = pontryagin_check(
      a2_functional(), g, ControlFamily::explicit_list({g.piece_at(0.0)}),
      {0.0, 1.0, 2.0}, 1e-9);
  CHECK(r.pass);
  CHECK(std::abs(r.worst_violation) < 1e-9);
}

TEST_CASE("pommerenke identity on the koebe scenario") {
  const PommerenkeReport r = pommerenke_check(a2_functional(), koebe_field(),
                                              ControlFamily::slice_grid(), 20.0, 1e-4);
  CHECK(r.limit_ok);
  CHECK(std::abs(r.re_l_target - 2.0) < 1e-5);  // a2 of the koebe function
  CHECK(std::abs(r.m0 - (-2.0)) < 1e-3);
  CHECK(std::abs(r.m_limit - (-2.0)) < 1e-4);
  CHECK(r.zero_deviation < 1e-3);
}

TEST_CASE("pommerenke identity for the identity target and its own family") {
  const HerglotzField g = linear_field();
  const LinearFunctional l = LinearFunctional::point_eval(pt1(0.5));
  const ControlFamily family =
      ControlFamily::explicit_list({MapDescriptor::linear_radial(1)});
  const PommerenkeReport r = pommerenke_check(l, g, family, 20.0, 1e-4);
  CHECK(r.limit_ok);
  CHECK(std::abs(r.re_l_target - 0.5) < 1e-9);
  CHECK(std::abs(r.m0 + 0.5) < 1e-9);
  CHECK(r.zero_deviation < 1e-9);
}

TEST_CASE("transport limit is uniform over candidates") {
  // |L_t(h) + L(F)| -> 0 uniformly: by t = 20 every candidate agrees
  std::mt19937_64 rng(317);
  for (int rep = 0; rep < 2; ++rep) {
    const int dim = rep + 1;
    const HerglotzField g = random_field(dim, rng);
    LinearFunctional l = [&] {
      if (dim == 1)
        return LinearFunctional(1, {PointAtom{pt1(0.45, 0.1), 0, Cplx(1, 0)}},
                                {CoeffAtom{{2}, 0, Cplx(0.3, -0.2)}});
      CVec z(2);
      z << Cplx(0.3, 0.1), Cplx(-0.2, 0.25);
      return LinearFunctional(2, {PointAtom{z, 1, Cplx(1, 0)}},
                              {CoeffAtom{{1, 1}, 0, Cplx(0, 1)}});
    }();
    ScaledLimitOptions lo;
    const FunctionalFrame frame = FunctionalFrame::build(l, g, lo);
    const Cplx target = frame.eval_on_target();
    const TransportContext ctx = TransportContext::build(frame, g, 20.0);

    std::vector<MapDescriptor> candidates{
        MapDescriptor::linear_radial(dim),
        MapDescriptor::slice_moebius(oracles::random_unimodular(rng),
                                     oracles::random_unit_vector(dim, rng)),
        MapDescriptor::slice_moebius(oracles::random_unimodular(rng),
                                     oracles::random_unit_vector(dim, rng))};
    for (const MapDescriptor& h : candidates)
      CHECK(std::abs(ctx.eval(h) + target) < 1e-4);
  }
}

TEST_CASE("support screen fires exactly on strictly dissipative pieces") {
  const ScreenResult radial = support_screen(linear_field(), 0.5);
  CHECK(radial.fires);
  CHECK(std::abs(radial.sup_value - (-1.0)) < 1e-12);

  // pure slice-Moebius fields have supremum 0 approached at the boundary
  std::mt19937_64 rng(331);
  for (Cplx zeta : {Cplx(-1, 0), Cplx(1, 0), Cplx(0, 1), oracles::random_unimodular(rng)}) {
    const HerglotzField g = HerglotzField::constant(MapDescriptor::slice_moebius(zeta));
    const ScreenResult r = support_screen(g, 0.5);
    CHECK_FALSE(r.fires);
    CHECK(r.sup_value > -1e-6);
    CHECK(r.sup_value <= 1e-12);
  }

  // dimension two
  const HerglotzField g2 = HerglotzField::constant(MapDescriptor::slice_moebius(
      Cplx(0, 1), oracles::random_unit_vector(2, rng)));
  const ScreenResult r2 = support_screen(g2, 0.5);
  CHECK_FALSE(r2.fires);

  // a convex mixture with a radial part is strictly dissipative
  std::vector<MapDescriptor> parts{MapDescriptor::linear_radial(1),
                                   MapDescriptor::slice_moebius(Cplx(1, 0))};
  const HerglotzField mix =
      HerglotzField::constant(MapDescriptor::convex({0.5, 0.5}, parts));
  const ScreenResult rm = support_screen(mix, 0.5);
  CHECK(rm.fires);
  CHECK(rm.sup_value <= -0.5 + 1e-9);
}

TEST_CASE("nonconstancy probe finds polynomial witnesses") {
  const NonconstancyReport r =
      nonconstancy_probe(a2_functional(), koebe_field(), 0.0, 3);
  CHECK(r.witnessed);
  CHECK(r.max_abs >= 1.0 - 1e-6);
  // the quadratic monomial witnesses: L_0(z^2) = a2(dF z^2) = 1
  bool found = false;
  for (const ProbeEntry& p : r.probes) {
    if (p.alpha == MultiIndex{2}) {
      CHECK(std::abs(p.value - Cplx(1, 0)) < 1e-6);
      found = true;
    }
  }
  CHECK(found);

  // with the identity target: L_0(z^3) = 0 but z^2 still witnesses
  const NonconstancyReport lin =
      nonconstancy_probe(a2_functional(), linear_field(), 0.0, 3);
  CHECK(lin.witnessed);
  for (const ProbeEntry& p : lin.probes) {
    if (p.alpha == MultiIndex{3}) CHECK(std::abs(p.value) < 1e-9);
    if (p.alpha == MultiIndex{2}) CHECK(std::abs(p.value - Cplx(1, 0)) < 1e-9);
  }

  // a zero-weight functional has no witness
  const LinearFunctional zero(1, {}, {CoeffAtom{{2}, 0, Cplx(0, 0)}});
  const NonconstancyReport none = nonconstancy_probe(zero, linear_field(), 0.0, 3);
  CHECK_FALSE(none.witnessed);
  CHECK(none.max_abs < 1e-12);
}

TEST_CASE("nonconstancy probe in dimension two") {
  std::mt19937_64 rng(337);
  const HerglotzField g = random_field(2, rng);
  const LinearFunctional l = LinearFunctional::coefficient({1, 1});
  const NonconstancyReport r = nonconstancy_probe(l, g, 0.5, 2);
  CHECK(r.witnessed);
  CHECK(static_cast<int>(r.probes.size()) == 2 * 3);  // 3 quadratic monomials x 2 rows
}
