#include "raman/hilbert.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "raman/error.hpp"

namespace raman {

namespace {

constexpr double kHermitianTol = 1e-10;

// Flattened offsets of every multi-index over `modes` (in `space` strides).
std::vector<Eigen::Index> offsets_over(const HilbertSpace& space,
                                       const std::vector<std::size_t>& modes) {
  std::vector<Eigen::Index> out{0};
  for (std::size_t k : modes) {
    std::vector<Eigen::Index> next;
    next.reserve(out.size() * space.dim(k));
    for (Eigen::Index base : out)
      for (int n = 0; n < space.dim(k); ++n) next.push_back(base + n * space.stride(k));
    out = std::move(next);
  }
  return out;
}

void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* what) {
  if (!(a == b)) throw DimensionError(std::string(what) + ": operands live on different spaces");
}

}  // namespace

HilbertSpace::HilbertSpace(std::vector<ModeSpec> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) throw DimensionError("HilbertSpace needs at least one mode");
  for (const auto& m : modes_)
    if (m.dim < 2)
      throw DimensionError("mode '" + m.label + "' has truncation " + std::to_string(m.dim) +
                           " (need >= 2)");
  strides_.assign(modes_.size(), 1);
  for (std::size_t k = modes_.size(); k-- > 0;) {
    strides_[k] = total_dim_;
    total_dim_ *= modes_[k].dim;
  }
}

HilbertSpace HilbertSpace::subspace(std::span<const std::size_t> keep) const {
  if (keep.empty()) throw DimensionError("subspace: no modes kept");
  std::vector<std::size_t> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DimensionError("subspace: duplicate mode index");
  std::vector<ModeSpec> sub;
  for (std::size_t k : sorted) {
    if (k >= modes_.size()) throw DimensionError("subspace: mode index out of range");
    sub.push_back(modes_[k]);
  }
  return HilbertSpace(std::move(sub));
}

Op::Op(HilbertSpace space, Matrix matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != space_.total_dim() || matrix_.cols() != space_.total_dim())
    throw DimensionError("Op: matrix is " + std::to_string(matrix_.rows()) + "x" +
                         std::to_string(matrix_.cols()) + ", space has dimension " +
                         std::to_string(space_.total_dim()));
}

Op operator+(const Op& a, const Op& b) {
  require_same_space(a.space_, b.space_, "Op +");
  return Op(a.space_, a.matrix_ + b.matrix_);
}

Op operator-(const Op& a, const Op& b) {
  require_same_space(a.space_, b.space_, "Op -");
  return Op(a.space_, a.matrix_ - b.matrix_);
}

Op operator*(const Op& a, const Op& b) {
  require_same_space(a.space_, b.space_, "Op *");
  return Op(a.space_, a.matrix_ * b.matrix_);
}

Op operator*(cplx s, const Op& a) { return Op(a.space_, s * a.matrix_); }

DensityMatrix::DensityMatrix(HilbertSpace space, Matrix matrix, DensityTolerance tol)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != space_.total_dim() || matrix_.cols() != space_.total_dim())
    throw DimensionError("DensityMatrix: matrix does not match space dimension");
  const double herm = hermiticity_error(matrix_);
  if (herm > tol.hermitian)
    throw InvalidArgument("DensityMatrix: not Hermitian (max |rho - rho^dagger| = " +
                          std::to_string(herm) + ")");
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > tol.trace)
    throw InvalidArgument("DensityMatrix: trace " + std::to_string(tr) + " != 1");
  const double lmin = min_eigenvalue();
  if (lmin < tol.min_eigenvalue)
    throw InvalidArgument("DensityMatrix: negative eigenvalue " + std::to_string(lmin));
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(matrix_), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

Matrix annihilation_op(int dim) {
  if (dim < 2) throw DimensionError("annihilation_op: dim must be >= 2, got " + std::to_string(dim));
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix number_op(int dim) {
  if (dim < 2) throw DimensionError("number_op: dim must be >= 2");
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron(std::span<const Matrix> factors) {
  if (factors.empty()) return Matrix::Identity(1, 1);
  Matrix out = factors[0];
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

Op embed(const Matrix& local, std::size_t mode_index, const HilbertSpace& space) {
  if (mode_index >= space.num_modes())
    throw DimensionError("embed: mode index " + std::to_string(mode_index) + " out of range");
  const int d = space.dim(mode_index);
  if (local.rows() != d || local.cols() != d)
    throw DimensionError("embed: local operator is " + std::to_string(local.rows()) + "x" +
                         std::to_string(local.cols()) + " but mode '" +
                         space.mode(mode_index).label + "' has dimension " + std::to_string(d));
  // Build directly: M[(i), (j)] = local[i_k, j_k] when all other levels agree.
  const Eigen::Index before = space.total_dim() / (space.stride(mode_index) * d);
  const Eigen::Index after = space.stride(mode_index);
  Matrix m = Matrix::Zero(space.total_dim(), space.total_dim());
  for (Eigen::Index b = 0; b < before; ++b)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const cplx v = local(i, j);
        if (v == cplx{}) continue;
        const Eigen::Index row0 = (b * d + i) * after;
        const Eigen::Index col0 = (b * d + j) * after;
        for (Eigen::Index a = 0; a < after; ++a) m(row0 + a, col0 + a) = v;
      }
  return Op(space, std::move(m));
}

Op identity(const HilbertSpace& space) {
  return Op(space, Matrix::Identity(space.total_dim(), space.total_dim()));
}

cplx expectation(const DensityMatrix& rho, const Op& op) {
  require_same_space(rho.space(), op.space(), "expectation");
  // tr(rho A) = sum_ij rho_ij A_ji
  return (rho.matrix().array() * op.matrix().transpose().array()).sum();
}

Matrix partial_trace(const Matrix& rho, const HilbertSpace& space,
                     std::span<const std::size_t> keep) {
  const HilbertSpace reduced = space.subspace(keep);  // validates `keep`
  std::vector<std::size_t> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < space.num_modes(); ++k)
    if (!std::binary_search(kept.begin(), kept.end(), k)) traced.push_back(k);

  const auto keep_off = offsets_over(space, kept);
  const auto trace_off = offsets_over(space, traced);
  const auto n = static_cast<Eigen::Index>(keep_off.size());
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      cplx acc{};
      for (Eigen::Index t : trace_off) acc += rho(keep_off[i] + t, keep_off[j] + t);
      out(i, j) = acc;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  if (keep.empty()) throw DimensionError("partial_trace: keep set is empty");
  const HilbertSpace reduced = rho.space().subspace(keep);
  if (reduced.num_modes() == rho.space().num_modes()) return rho;
  return DensityMatrix(reduced, partial_trace(rho.matrix(), rho.space(), keep));
}

Matrix partial_transpose(const DensityMatrix& rho, std::size_t mode) {
  const HilbertSpace& space = rho.space();
  if (space.num_modes() != 2)
    throw DimensionError("partial_transpose: expected a two-mode space, got " +
                         std::to_string(space.num_modes()) + " modes");
  if (mode > 1) throw DimensionError("partial_transpose: mode index out of range");
  const Matrix& m = rho.matrix();
  const Eigen::Index n = space.total_dim();
  const Eigen::Index s = space.stride(mode);
  Matrix out(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      const Eigen::Index lr = space.level(r, mode);
      const Eigen::Index lc = space.level(c, mode);
      out(r + (lc - lr) * s, c + (lr - lc) * s) = m(r, c);
    }
  return out;
}

double hermiticity_error(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("hermiticity_error: matrix not square");
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

RealVector hermitian_eigenvalues(const Matrix& h) {
  const double err = hermiticity_error(h);
  if (err > kHermitianTol)
    throw InvalidArgument("matrix is not Hermitian (max |A - A^dagger| = " + std::to_string(err) +
                          ")");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double trace_norm(const Matrix& h) { return hermitian_eigenvalues(h).cwiseAbs().sum(); }

RealVector thermal_populations(int dim, double nbar) {
  if (dim < 2) throw DimensionError("thermal_populations: dim must be >= 2");
  if (!(nbar >= 0.0)) throw InvalidArgument("thermal_populations: nbar must be >= 0");
  RealVector p(dim);
  const double x = nbar / (1.0 + nbar);
  double w = 1.0;
  for (int n = 0; n < dim; ++n, w *= x) p(n) = w;
  return p / p.sum();
}

Matrix thermal_state(int dim, double nbar) {
  return thermal_populations(dim, nbar).cast<cplx>().asDiagonal();
}

Matrix fock_state(int dim, int n) {
  if (n < 0 || n >= dim) throw DimensionError("fock_state: level out of range");
  Matrix m = Matrix::Zero(dim, dim);
  m(n, n) = 1.0;
  return m;
}

}  // namespace raman
