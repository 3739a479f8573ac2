#pragma once

// Dense operator algebra on truncated multimode Fock spaces.
//
// Basis states are flattened row-major over the mode list: the first mode is
// the slowest-varying index, the last mode the fastest. Every operator built on
// a given HilbertSpace uses that order.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace raman {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

struct ModeSpec {
  std::string label;
  int dim = 2;

  bool operator==(const ModeSpec&) const = default;
};

class HilbertSpace {
 public:
  explicit HilbertSpace(std::vector<ModeSpec> modes);

  std::size_t num_modes() const { return modes_.size(); }
  const ModeSpec& mode(std::size_t k) const { return modes_.at(k); }
  const std::vector<ModeSpec>& modes() const { return modes_; }
  int dim(std::size_t k) const { return modes_.at(k).dim; }
  Eigen::Index total_dim() const { return total_dim_; }

  /// Distance in the flattened index between consecutive Fock levels of mode k.
  Eigen::Index stride(std::size_t k) const { return strides_.at(k); }

  /// Fock level of mode k in the flattened basis state `index`.
  int level(Eigen::Index index, std::size_t k) const {
    return static_cast<int>((index / strides_[k]) % modes_[k].dim);
  }

  /// Space made of the listed modes, in ascending mode order.
  HilbertSpace subspace(std::span<const std::size_t> keep) const;

  bool operator==(const HilbertSpace& other) const { return modes_ == other.modes_; }

 private:
  std::vector<ModeSpec> modes_;
  std::vector<Eigen::Index> strides_;
  Eigen::Index total_dim_ = 1;
};

/// An operator on the full tensor-product space.
class Op {
 public:
  Op(HilbertSpace space, Matrix matrix);

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return matrix_; }

  Op adjoint() const { return Op(space_, matrix_.adjoint()); }

  friend Op operator+(const Op& a, const Op& b);
  friend Op operator-(const Op& a, const Op& b);
  friend Op operator*(const Op& a, const Op& b);
  friend Op operator*(cplx s, const Op& a);

 private:
  HilbertSpace space_;
  Matrix matrix_;
};

/// Tolerances a matrix must meet to be accepted as a density matrix.
struct DensityTolerance {
  double hermitian = 1e-10;
  double trace = 1e-9;
  double min_eigenvalue = -1e-9;
};

/// Hermitian, unit-trace, positive-semidefinite matrix on a HilbertSpace.
/// The invariants are checked on construction.
class DensityMatrix {
 public:
  DensityMatrix(HilbertSpace space, Matrix matrix, DensityTolerance tol = {});

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return matrix_; }

  double min_eigenvalue() const;

 private:
  HilbertSpace space_;
  Matrix matrix_;
};

/// Lowering operator truncated to `dim` Fock levels.
Matrix annihilation_op(int dim);

/// Number operator diag(0, 1, ..., dim-1).
Matrix number_op(int dim);

/// I ⊗ ... ⊗ local ⊗ ... ⊗ I with `local` acting on mode `mode_index`.
Op embed(const Matrix& local, std::size_t mode_index, const HilbertSpace& space);

Op identity(const HilbertSpace& space);

/// tr(rho · op).
cplx expectation(const DensityMatrix& rho, const Op& op);

/// Reduced state on the modes in `keep`. Keeping every mode returns rho unchanged.
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep);

/// Raw partial trace, for matrices that are not (yet) valid states.
Matrix partial_trace(const Matrix& rho, const HilbertSpace& space,
                     std::span<const std::size_t> keep);

/// Transposes the indices of `mode` in a two-mode state.
Matrix partial_transpose(const DensityMatrix& rho, std::size_t mode);

/// Sum of absolute eigenvalues of a Hermitian matrix.
double trace_norm(const Matrix& h);

/// Largest |A - A^dagger| element.
double hermiticity_error(const Matrix& a);

/// Hermitian part (A + A^dagger)/2.
Matrix symmetrized(const Matrix& a);

/// Thermal Fock distribution with mean occupation `nbar`, renormalized to `dim` levels.
RealVector thermal_populations(int dim, double nbar);

/// Diagonal thermal density matrix on a single mode.
Matrix thermal_state(int dim, double nbar);

/// |n><n| on a single mode.
Matrix fock_state(int dim, int n);

/// Kronecker product of the factors, first factor slowest.
Matrix kron(std::span<const Matrix> factors);
Matrix kron(const Matrix& a, const Matrix& b);

/// Hermitian eigenvalues in ascending order; throws if `h` is not Hermitian to 1e-10.
RealVector hermitian_eigenvalues(const Matrix& h);

}  // namespace raman
