#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loewner/loewner.hpp"
#include "loewner/variation.hpp"

namespace loewner {

/// Weighted point evaluation of one component.
struct PointAtom {
  CVec z;
  int component = 0;  // 0-based
  Cplx weight{1.0, 0.0};
};

/// Weighted Taylor coefficient of one component.
struct CoeffAtom {
  MultiIndex alpha;
  int component = 0;
  Cplx weight{1.0, 0.0};
};

/// Discrete-measure linear functional L(g) = sum w * g_k(z) + sum w * a_alpha(g_k).
class LinearFunctional {
 public:
  LinearFunctional(int dim, std::vector<PointAtom> point_atoms,
                   std::vector<CoeffAtom> coeff_atoms);

  static LinearFunctional point_eval(CVec z, int component = 0,
                                     Cplx weight = Cplx(1, 0));
  static LinearFunctional coefficient(MultiIndex alpha, int component = 0,
                                      Cplx weight = Cplx(1, 0));

  int dim() const { return dim_; }
  const std::vector<PointAtom>& point_atoms() const { return point_atoms_; }
  const std::vector<CoeffAtom>& coeff_atoms() const { return coeff_atoms_; }
  int max_coeff_degree() const;

 private:
  int dim_;
  std::vector<PointAtom> point_atoms_;
  std::vector<CoeffAtom> coeff_atoms_;
};

/// Evaluation data for a map: values aligned with the functional's point
/// atoms, plus a jet for coefficient atoms.
struct MapSample {
  std::vector<CVec> point_values;
  std::optional<Jet> jet;
};

Cplx eval_functional(const LinearFunctional& l, const MapSample& g);
Cplx eval_functional(const LinearFunctional& l, const MapDescriptor& g);
/// Point atoms evaluate the truncated polynomial, exact for polynomial maps.
Cplx eval_functional(const LinearFunctional& l, const Jet& g);

/// Declared control subfamily over which Hamiltonian values are maximized.
/// Values of m(t) computed over a strict subfamily are lower bounds for the
/// full-class maximum; equality is certified only when the true maximizer
/// lies in the family.
class ControlFamily {
 public:
  struct SliceGrid {
    int zeta_count = 256;
    bool refine = true;         // golden-section refinement in arg(zeta)
    double refine_tol = 1e-6;   // in radians
    int u_count = 64;           // sphere design size for n >= 2
  };
  struct ExplicitList {
    std::vector<MapDescriptor> items;
  };

  static ControlFamily slice_grid() { return slice_grid(SliceGrid{}); }
  static ControlFamily slice_grid(SliceGrid spec);
  static ControlFamily explicit_list(std::vector<MapDescriptor> items);

  bool is_grid() const { return grid_.has_value(); }
  const SliceGrid& grid() const { return *grid_; }
  const std::vector<MapDescriptor>& items() const { return items_; }

 private:
  std::optional<SliceGrid> grid_;
  std::vector<MapDescriptor> items_;
};

/// Cached t-independent data of the target map F = f^G at the functional's
/// atoms: values, Jacobians, and the jet needed by coefficient atoms.
/// Built once per scenario; read-only afterwards.
struct FunctionalFrame {
  LinearFunctional functional;
  std::vector<CVec> atom_points;     // deduplicated point-atom locations
  std::vector<int> atom_slot;        // point atom -> index into atom_points
  std::vector<CVec> f_values;        // F at atom_points
  std::vector<CMat> f_jacobians;     // dF at atom_points
  std::optional<Jet> f_jet;          // jet of F (degree = max coeff degree)
  double horizon = 0.0;

  static FunctionalFrame build(const LinearFunctional& l, const HerglotzField& g,
                               const ScaledLimitOptions& opts = {});

  /// L(F).
  Cplx eval_on_target() const;
};

/// Per-time transport data: everything needed to evaluate the transported
/// functional L_t(h) = L(dF [d phi_t]^{-1} h(phi_t)) on arbitrary h.
class TransportContext {
 public:
  static TransportContext build(const FunctionalFrame& frame, const HerglotzField& g,
                                double t, const IntegrationOptions& opts = {});

  double time() const { return t_; }

  /// L_t(h); h may be any descriptor, membership is not required.
  Cplx eval(const MapDescriptor& h) const;

 private:
  struct PointData {
    CMat f_jac;
    Eigen::PartialPivLU<CMat> lu;  // of d(e^t phi_t)
    CVec v;                        // e^t phi_t(z)
    CVec w;                        // phi_t(z)
  };
  const FunctionalFrame* frame_ = nullptr;
  double t_ = 0.0;
  double exp_t_ = 1.0;
  std::vector<PointData> points_;
  std::optional<MatrixJet> transport_mat_;  // dF-jet * inv(d(e^t phi_t)-jet)
  std::optional<Jet> scaled_jet_;           // jet of e^t phi_t
};

Cplx transported_functional(const LinearFunctional& l, const HerglotzField& g,
                            double t, const MapDescriptor& h,
                            const IntegrationOptions& opts = {},
                            const ScaledLimitOptions& limit_opts = {});

struct Maximizer {
  int index = -1;            // grid index or list index
  Cplx zeta{1.0, 0.0};       // slice-grid families
  CVec u;
  std::string label;
  Cplx value{0.0, 0.0};      // L_t at the maximizer
};

struct ScanEntry {
  double t = 0.0;
  double m = 0.0;            // max over the family of Re L_t
  Maximizer maximizer;
};

struct HamiltonianScan {
  std::vector<ScanEntry> entries;
  double constancy_deviation = 0.0;  // max |m(t) - m(t_0)|
};

HamiltonianScan hamiltonian_scan(const LinearFunctional& l, const HerglotzField& g,
                                 const ControlFamily& family,
                                 const std::vector<double>& t_grid,
                                 const IntegrationOptions& opts = {},
                                 const ScaledLimitOptions& limit_opts = {});

struct PontryaginRow {
  double t = 0.0;
  double m = 0.0;
  double field_value = 0.0;  // Re L_t(G(.,t))
  double slack = 0.0;        // m - field_value
  Maximizer maximizer;
};

struct PontryaginReport {
  bool pass = false;
  double slack_allowed = 0.0;
  double worst_violation = 0.0;  // max over t of m(t) - Re L_t(G_t)
  double worst_t = 0.0;
  Maximizer worst_witness;
  std::vector<PontryaginRow> rows;
};

/// Checks Re L_t(G(.,t)) >= m(t) - slack on every grid time.
PontryaginReport pontryagin_check(const LinearFunctional& l, const HerglotzField& g,
                                  const ControlFamily& family,
                                  const std::vector<double>& t_grid, double slack,
                                  const IntegrationOptions& opts = {},
                                  const ScaledLimitOptions& limit_opts = {});

struct PommerenkeReport {
  double t_limit = 0.0;
  double m0 = 0.0;          // max Re L_0 over the family
  double m_limit = 0.0;     // max Re L_{t_limit} over the family
  double re_l_target = 0.0; // Re L(F)
  double limit_deviation = 0.0;  // |m(t_limit) + Re L(F)|, small for any family
  double zero_deviation = 0.0;   // |m(0) + Re L(F)|, certified only when the
                                 // family contains the true maximizer
  bool limit_ok = false;
  double tol = 0.0;
};

PommerenkeReport pommerenke_check(const LinearFunctional& l, const HerglotzField& g,
                                  const ControlFamily& family, double t_limit = 20.0,
                                  double tol = 1e-4,
                                  const IntegrationOptions& opts = {},
                                  const ScaledLimitOptions& limit_opts = {});

struct ScreenResult {
  double T = 0.0;
  double sup_value = 0.0;  // grid-plus-refinement supremum of Re<G(z,T),z>/||z||^2
  bool fires = false;      // sup < -margin: the slice beyond T is not extremal
  CVec sup_point;
  double margin = 0.0;
};

/// Supremum screen for the strict-dissipativity criterion at time T. The
/// refinement only pushes the estimate upward, so a firing screen is sound.
ScreenResult support_screen(const HerglotzField& g, double T,
                            const BallGrid& grid = boundary_refined_grid(),
                            double margin = 1e-6);

struct ProbeEntry {
  MultiIndex alpha;
  int component = 0;
  Cplx value{0.0, 0.0};
};

struct NonconstancyReport {
  std::vector<ProbeEntry> probes;
  double max_abs = 0.0;
  bool witnessed = false;
  ProbeEntry witness;
};

/// Evaluates L_t on monomial perturbations z^alpha e_k, 2 <= |alpha| <= degree.
/// A nonzero value witnesses non-constancy of L_t on the control class, since
/// -z + eps P stays in the class for small eps.
NonconstancyReport nonconstancy_probe(const LinearFunctional& l,
                                      const HerglotzField& g, double t, int degree,
                                      double witness_threshold = 1e-8,
                                      const IntegrationOptions& opts = {},
                                      const ScaledLimitOptions& limit_opts = {});

}  // namespace loewner
