#pragma once

#include <variant>
#include <vector>

#include "loewner/jet.hpp"
#include "loewner/types.hpp"

namespace loewner {

class MapDescriptor;

/// z -> -z.
struct LinearRadial {};

/// z -> -z * (zeta + <z,u>) / (zeta - <z,u>) with |zeta| = 1, ||u|| = 1.
/// For n = 1, u = 1 this is the classical boundary family -z(zeta+z)/(zeta-z).
struct SliceMoebius {
  Cplx zeta;
  CVec u;
};

/// Polynomial map given by its jet (no constant term).
struct PolyJet {
  Jet jet;
};

/// Convex combination of descriptors of equal dimension.
struct ConvexCombo {
  std::vector<double> weights;
  std::vector<MapDescriptor> parts;
};

class MapDescriptor {
 public:
  using Payload = std::variant<LinearRadial, SliceMoebius, PolyJet, ConvexCombo>;

  static MapDescriptor linear_radial(int dim);
  static MapDescriptor slice_moebius(Cplx zeta, CVec u);
  static MapDescriptor slice_moebius(Cplx zeta);  // n = 1, u = 1
  static MapDescriptor poly(Jet jet);
  static MapDescriptor convex(std::vector<double> weights,
                              std::vector<MapDescriptor> parts);

  int dim() const { return dim_; }
  const Payload& payload() const { return payload_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&payload_);
  }

 private:
  MapDescriptor(int dim, Payload payload) : dim_(dim), payload_(std::move(payload)) {}
  int dim_;
  Payload payload_;
};

/// h(z); requires ||z|| < 1 and matching dimension.
CVec eval_map(const MapDescriptor& m, const CVec& z);

/// Exact holomorphic Jacobian dh_z (closed-form or term-wise, never differenced).
CMat jacobian_map(const MapDescriptor& m, const CVec& z);

/// h(z) + z, evaluated without cancellation; O(||z||^2) for normalized maps.
CVec eval_plus_identity(const MapDescriptor& m, const CVec& z);

/// dh_z + I, evaluated without cancellation; O(||z||) for normalized maps.
CMat jacobian_plus_identity(const MapDescriptor& m, const CVec& z);

/// Taylor coefficients of m at 0 up to total degree d.
Jet jet_from_closed_form(const MapDescriptor& m, int degree);

struct MembershipReport {
  bool pass = false;
  double worst_margin = 0.0;  // most positive sampled Re<h(z),z>/||z||^2
  CVec worst_point;
  bool normalization_ok = false;  // h(0) = 0 and dh_0 = -I within tolerance
  double tolerance = 0.0;
};

struct BallGrid {
  std::vector<double> radii;
  int directions = 64;  // angles for n = 1, sphere design size for n >= 2
};

BallGrid default_membership_grid();

/// Dense near-boundary radii for supremum-style scans.
BallGrid boundary_refined_grid();

/// Deterministic low-discrepancy unit vectors on the sphere of C^n
/// (Halton points pushed through Box-Muller and normalized).
std::vector<CVec> sphere_design(int dim, int count);

/// Sample points of the grid: each radius times each direction.
std::vector<CVec> grid_points(int dim, const BallGrid& grid);

/// Samples Re<h(z),z>/||z||^2 over the grid and checks h(0) = 0,
/// dh_0 = -I within tol. A pass is a semidecision; a fail with positive
/// margin is a certificate of non-membership.
MembershipReport check_class_membership(const MapDescriptor& m,
                                        const std::vector<double>& radii,
                                        int directions_per_radius, double tol);

MembershipReport check_class_membership(const MapDescriptor& m,
                                        const BallGrid& grid, double tol);

MembershipReport check_class_membership(const MapDescriptor& m);

/// Largest delta (bisection, membership sampled on a boundary-refined grid)
/// such that -z + eps*P stays in the sampled class for all eps in [0, delta].
/// P must have no constant and no linear term. Returns +infinity when no
/// sampled violation occurs up to the search cap.
double membership_radius(const Jet& p, double tol);

}  // namespace loewner
