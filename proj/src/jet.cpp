#include "loewner/jet.hpp"

#include <algorithm>
#include <mutex>

namespace loewner {

int total_degree(const MultiIndex& alpha) {
  int d = 0;
  for (int a : alpha) d += a;
  return d;
}

namespace {

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  const int da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  return a < b;
}

void enumerate(int dim, int degree, int pos, int remaining, MultiIndex& cur,
               std::vector<MultiIndex>& out) {
  if (pos == dim) {
    if (total_degree(cur) >= 1) out.push_back(cur);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    cur[pos] = e;
    enumerate(dim, degree, pos + 1, remaining - e, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

JetBasis::JetBasis(int dim, int degree) : dim_(dim), degree_(degree) {
  require(dim >= 1, "jet dimension must be >= 1");
  require(degree >= 1, "jet degree must be >= 1");
  MultiIndex cur(dim, 0);
  enumerate(dim, degree, 0, degree, cur, indices_);
  std::sort(indices_.begin(), indices_.end(), graded_lex_less);
  for (int i = 0; i < size(); ++i) lookup_[indices_[i]] = i;

  product_.assign(size(), std::vector<int>(size(), -1));
  for (int a = 0; a < size(); ++a) {
    for (int b = 0; b < size(); ++b) {
      if (total_degree(indices_[a]) + total_degree(indices_[b]) > degree_) continue;
      MultiIndex sum(dim_);
      for (int i = 0; i < dim_; ++i) sum[i] = indices_[a][i] + indices_[b][i];
      product_[a][b] = find(sum);
    }
  }
}

int JetBasis::find(const MultiIndex& alpha) const {
  auto it = lookup_.find(alpha);
  return it == lookup_.end() ? -1 : it->second;
}

std::shared_ptr<const JetBasis> JetBasis::get(int dim, int degree) {
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetBasis>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(dim, degree);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto basis = std::make_shared<const JetBasis>(dim, degree);
  cache[key] = basis;
  return basis;
}

Jet::Jet(int dim, int degree)
    : basis_(JetBasis::get(dim, degree)), table_(CMat::Zero(dim, basis_->size())) {}

Jet Jet::identity(int dim, int degree) {
  Jet j(dim, degree);
  for (int k = 0; k < dim; ++k) {
    MultiIndex e(dim, 0);
    e[k] = 1;
    j.set_coeff(k, e, Cplx(1, 0));
  }
  return j;
}

Cplx Jet::coeff(int component, const MultiIndex& alpha) const {
  require(component >= 0 && component < dim(), "component out of range");
  const int d = total_degree(alpha);
  require(static_cast<int>(alpha.size()) == dim(), "multi-index dimension mismatch");
  require(d >= 1 && d <= degree(), "multi-index degree outside [1, degree]");
  const int col = basis_->find(alpha);
  return col < 0 ? Cplx(0, 0) : table_(component, col);
}

void Jet::set_coeff(int component, const MultiIndex& alpha, Cplx value) {
  require(component >= 0 && component < dim(), "component out of range");
  const int col = basis_->find(alpha);
  require(col >= 0, "multi-index outside jet basis");
  table_(component, col) = value;
}

void Jet::add_coeff(int component, const MultiIndex& alpha, Cplx value) {
  const int col = basis_->find(alpha);
  require(col >= 0, "multi-index outside jet basis");
  table_(component, col) += value;
}

CVec Jet::eval(const CVec& z) const {
  require(z.size() == dim(), "point dimension mismatch");
  CVec out = CVec::Zero(dim());
  for (int col = 0; col < basis_->size(); ++col) {
    const MultiIndex& alpha = basis_->index(col);
    Cplx mono(1, 0);
    for (int i = 0; i < dim(); ++i)
      for (int p = 0; p < alpha[i]; ++p) mono *= z[i];
    out += mono * table_.col(col);
  }
  return out;
}

CMat Jet::jacobian(const CVec& z) const {
  require(z.size() == dim(), "point dimension mismatch");
  CMat out = CMat::Zero(dim(), dim());
  for (int col = 0; col < basis_->size(); ++col) {
    const MultiIndex& alpha = basis_->index(col);
    for (int m = 0; m < dim(); ++m) {
      if (alpha[m] == 0) continue;
      Cplx mono(static_cast<double>(alpha[m]), 0);
      for (int i = 0; i < dim(); ++i) {
        const int p = (i == m) ? alpha[i] - 1 : alpha[i];
        for (int q = 0; q < p; ++q) mono *= z[i];
      }
      out.col(m) += mono * table_.col(col);
    }
  }
  return out;
}

Jet Jet::truncated(int new_degree) const {
  Jet out(dim(), new_degree);
  for (int col = 0; col < basis_->size(); ++col) {
    const MultiIndex& alpha = basis_->index(col);
    if (total_degree(alpha) > new_degree) continue;
    const int dst = out.basis().find(alpha);
    out.table_.col(dst) = table_.col(col);
  }
  return out;
}

double Jet::max_abs_coeff() const {
  return table_.size() == 0 ? 0.0 : table_.cwiseAbs().maxCoeff();
}

Jet& Jet::operator+=(const Jet& other) {
  require(dim() == other.dim() && degree() == other.degree(), "jet shape mismatch");
  table_ += other.table_;
  return *this;
}

Jet& Jet::operator-=(const Jet& other) {
  require(dim() == other.dim() && degree() == other.degree(), "jet shape mismatch");
  table_ -= other.table_;
  return *this;
}

Jet& Jet::operator*=(Cplx factor) {
  table_ *= factor;
  return *this;
}

namespace {

// Truncated product of two constant-free coefficient rows over a basis.
Eigen::RowVectorXcd poly_mul(const JetBasis& basis, const Eigen::RowVectorXcd& a,
                             const Eigen::RowVectorXcd& b) {
  Eigen::RowVectorXcd out = Eigen::RowVectorXcd::Zero(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    if (a[i] == Cplx(0, 0)) continue;
    for (int j = 0; j < basis.size(); ++j) {
      if (b[j] == Cplx(0, 0)) continue;
      const int t = basis.product(i, j);
      if (t >= 0) out[t] += a[i] * b[j];
    }
  }
  return out;
}

}  // namespace

Jet jet_compose(const Jet& outer, const Jet& inner) {
  return jet_compose(outer, inner, std::min(outer.degree(), inner.degree()));
}

Jet jet_compose(const Jet& outer, const Jet& inner, int degree) {
  require(outer.dim() == inner.dim(), "jet dimension mismatch");
  require(degree >= 1 && degree <= std::min(outer.degree(), inner.degree()),
          "composition degree outside valid range");
  const int n = outer.dim();
  const Jet in = inner.degree() == degree ? inner : inner.truncated(degree);
  Jet out(n, degree);
  const JetBasis& basis = out.basis();

  // powers[j][p-1] = coefficients of (inner_j)^p, valuation >= p
  std::vector<std::vector<Eigen::RowVectorXcd>> powers(n);
  for (int j = 0; j < n; ++j) {
    powers[j].push_back(in.table().row(j));
    for (int p = 2; p <= degree; ++p)
      powers[j].push_back(poly_mul(basis, powers[j].back(), in.table().row(j)));
  }

  for (int col = 0; col < outer.basis().size(); ++col) {
    const MultiIndex& alpha = outer.basis().index(col);
    if (total_degree(alpha) > degree) continue;
    bool any = false;
    for (int k = 0; k < n; ++k) any = any || outer.table()(k, col) != Cplx(0, 0);
    if (!any) continue;

    Eigen::RowVectorXcd mono;
    bool first = true;
    for (int j = 0; j < n; ++j) {
      if (alpha[j] == 0) continue;
      const Eigen::RowVectorXcd& pw = powers[j][alpha[j] - 1];
      mono = first ? pw : poly_mul(basis, mono, pw);
      first = false;
    }
    for (int k = 0; k < n; ++k) {
      const Cplx c = outer.table()(k, col);
      if (c != Cplx(0, 0)) out.table().row(k) += c * mono;
    }
  }
  return out;
}

Cplx coefficient(const Jet& j, const MultiIndex& alpha, int component) {
  return j.coeff(component, alpha);
}

MatrixJet::MatrixJet(int dim, int degree) : basis_(JetBasis::get(dim, degree)) {
  terms_.assign(basis_->size() + 1, CMat::Zero(dim, dim));
}

MatrixJet MatrixJet::identity(int dim, int degree) {
  MatrixJet m(dim, degree);
  m.constant() = CMat::Identity(dim, dim);
  return m;
}

MatrixJet MatrixJet::operator*(const MatrixJet& other) const {
  require(dim() == other.dim(), "matrix jet dimension mismatch");
  const int deg = std::min(degree(), other.degree());
  const MatrixJet a = degree() == deg ? *this : truncated(deg);
  const MatrixJet b = other.degree() == deg ? other : other.truncated(deg);
  MatrixJet out(dim(), deg);
  const JetBasis& basis = out.basis();
  out.constant() = a.constant() * b.constant();
  for (int col = 0; col < basis.size(); ++col)
    out.term(col) = a.constant() * b.term(col) + a.term(col) * b.constant();
  for (int i = 0; i < basis.size(); ++i) {
    for (int j = 0; j < basis.size(); ++j) {
      const int t = basis.product(i, j);
      if (t >= 0) out.term(t) += a.term(i) * b.term(j);
    }
  }
  return out;
}

Jet MatrixJet::apply(const Jet& v) const {
  require(dim() == v.dim(), "matrix jet / jet dimension mismatch");
  // The result carries the vector's degree: v has no constant term, so its
  // degree-d coefficients only ever meet matrix terms of degree <= d - 1.
  const int deg = v.degree();
  const MatrixJet m = degree() == deg ? *this : truncated(deg);
  const Jet& w = v;
  Jet out(dim(), deg);
  const JetBasis& basis = out.basis();
  for (int col = 0; col < basis.size(); ++col)
    out.table().col(col) = m.constant() * w.table().col(col);
  for (int i = 0; i < basis.size(); ++i) {
    if (m.term(i).isZero(0.0)) continue;
    for (int j = 0; j < basis.size(); ++j) {
      const int t = basis.product(i, j);
      if (t >= 0) out.table().col(t) += m.term(i) * w.table().col(j);
    }
  }
  return out;
}

MatrixJet MatrixJet::inverse() const {
  Eigen::PartialPivLU<CMat> lu(constant());
  if (lu.rcond() < 1e-14)
    throw numerical_error("matrix jet constant term is numerically singular");
  const CMat c_inv = lu.inverse();

  // M = M0 (I + N) with N constant-free, so M^{-1} = (sum (-N)^q) M0^{-1},
  // exact through the truncation degree.
  MatrixJet n(dim(), degree());
  for (int col = 0; col < basis_->size(); ++col) n.term(col) = c_inv * term(col);

  MatrixJet acc = MatrixJet::identity(dim(), degree());
  MatrixJet pw = MatrixJet::identity(dim(), degree());
  for (int q = 1; q <= degree(); ++q) {
    pw = pw * n;
    const double sign = (q % 2 == 0) ? 1.0 : -1.0;
    acc.constant() += sign * pw.constant();
    for (int col = 0; col < basis_->size(); ++col) acc.term(col) += sign * pw.term(col);
  }
  MatrixJet out(dim(), degree());
  out.constant() = acc.constant() * c_inv;
  for (int col = 0; col < basis_->size(); ++col) out.term(col) = acc.term(col) * c_inv;
  return out;
}

MatrixJet MatrixJet::truncated(int new_degree) const {
  MatrixJet out(dim(), new_degree);
  out.constant() = constant();
  for (int col = 0; col < basis_->size(); ++col) {
    const MultiIndex& alpha = basis_->index(col);
    if (total_degree(alpha) > new_degree) continue;
    out.term(out.basis().find(alpha)) = term(col);
  }
  return out;
}

MatrixJet jacobian_jet(const Jet& j) {
  const int n = j.dim();
  const int deg = std::max(1, j.degree() - 1);
  MatrixJet out(n, deg);
  for (int col = 0; col < j.basis().size(); ++col) {
    const MultiIndex& alpha = j.basis().index(col);
    for (int m = 0; m < n; ++m) {
      if (alpha[m] == 0) continue;
      MultiIndex beta = alpha;
      beta[m] -= 1;
      const double factor = static_cast<double>(alpha[m]);
      if (total_degree(beta) == 0) {
        out.constant().col(m) += factor * j.table().col(col);
      } else if (total_degree(beta) <= deg) {
        const int dst = out.basis().find(beta);
        out.term(dst).col(m) += factor * j.table().col(col);
      }
    }
  }
  return out;
}

}  // namespace loewner
