#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace loewner {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

/// Hermitian inner product on C^n, linear in the first slot:
/// inner(a, b) = sum_k a_k * conj(b_k).
inline Cplx inner(const CVec& a, const CVec& b) { return b.dot(a); }

/// Raised when an adaptive computation cannot meet its contract
/// (step budget exhausted, horizon cap hit, near-singular Jacobian).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Right division A * B^{-1} through an LU solve (no explicit inverse).
CMat right_solve(const CMat& a, const CMat& b);

/// Solve B x = y with a pivoted LU and a singularity guard.
CVec guarded_solve(const CMat& b, const CVec& y);

}  // namespace loewner
