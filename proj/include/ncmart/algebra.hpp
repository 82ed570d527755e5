#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ncmart/pexponent.hpp"

namespace ncmart {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

enum class TraceConvention {
  normalized,    // tau(x) = sum_i w_i tr(x_i) / d_i, a state
  unnormalized,  // tau(x) = sum_i tr(x_i), the plain matrix trace
};

// Finite von Neumann algebra presented as a direct sum of full matrix blocks
// M_{d_1} + ... + M_{d_k} carrying the faithful trace selected by the
// convention.  Under the normalized convention the weights are strictly
// positive and sum to one, so tau(1) = 1.  Algebras are immutable and shared;
// two elements interoperate only when they hold the same algebra object.
class TraceAlgebra : public std::enable_shared_from_this<TraceAlgebra> {
 public:
  static std::shared_ptr<const TraceAlgebra> make(
      std::vector<int> block_dims, std::vector<double> block_weights,
      TraceConvention convention = TraceConvention::normalized);

  // Single full matrix block M_n with weight one.
  static std::shared_ptr<const TraceAlgebra> full_matrix(
      int n, TraceConvention convention = TraceConvention::normalized);

  const std::vector<int>& block_dims() const { return dims_; }
  const std::vector<double>& block_weights() const { return weights_; }
  TraceConvention convention() const { return convention_; }

  int block_count() const { return static_cast<int>(dims_.size()); }
  // Side length of the block-diagonal matrix realization, sum of d_i.
  int total_dim() const { return total_dim_; }
  // Dimension as a complex vector space, sum of d_i^2.
  int vector_dim() const { return vector_dim_; }
  // Factor applied to the plain trace of block i: w_i/d_i or 1.
  double trace_scale(int block) const;

 private:
  TraceAlgebra(std::vector<int> dims, std::vector<double> weights,
               TraceConvention convention);

  std::vector<int> dims_;
  std::vector<double> weights_;
  TraceConvention convention_;
  int total_dim_ = 0;
  int vector_dim_ = 0;
};

using AlgebraPtr = std::shared_ptr<const TraceAlgebra>;

// Element of a TraceAlgebra: one dense complex matrix per block.  Value type;
// arithmetic throws if the operands belong to different algebra objects.
class Element {
 public:
  Element(AlgebraPtr algebra, std::vector<Matrix> blocks);

  const AlgebraPtr& algebra() const { return algebra_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  const Matrix& block(int i) const { return blocks_[i]; }
  Matrix& block(int i) { return blocks_[i]; }
  const std::vector<Matrix>& blocks() const { return blocks_; }

  bool same_algebra(const Element& other) const {
    return algebra_.get() == other.algebra_.get();
  }

  Element adjoint() const;

  Element& operator+=(const Element& rhs);
  Element& operator-=(const Element& rhs);
  Element& operator*=(Complex scalar);
  Element operator-() const;

  friend Element operator+(Element lhs, const Element& rhs) {
    lhs += rhs;
    return lhs;
  }
  friend Element operator-(Element lhs, const Element& rhs) {
    lhs -= rhs;
    return lhs;
  }
  friend Element operator*(Element lhs, Complex scalar) {
    lhs *= scalar;
    return lhs;
  }
  friend Element operator*(Complex scalar, Element rhs) {
    rhs *= scalar;
    return rhs;
  }
  friend Element operator*(Element lhs, double scalar) {
    lhs *= Complex(scalar, 0.0);
    return lhs;
  }
  friend Element operator*(double scalar, Element rhs) {
    rhs *= Complex(scalar, 0.0);
    return rhs;
  }
  friend Element operator*(const Element& lhs, const Element& rhs);

 private:
  AlgebraPtr algebra_;
  std::vector<Matrix> blocks_;
};

Element identity(const AlgebraPtr& algebra);
Element zero(const AlgebraPtr& algebra);
// e_{ij} inside the given block, zero elsewhere (0-based indices).
Element matrix_unit(const AlgebraPtr& algebra, int block, int i, int j);

// tau(x).
Complex trace(const Element& x);
// GNS inner product <x, y> = tau(y^* x), conjugate-linear in y.
Complex inner(const Element& x, const Element& y);
// sqrt(tau(x^* x)), the L^2 norm.
double norm_l2(const Element& x);
// Largest absolute entry across blocks; cheap exactness check.
double max_abs_entry(const Element& x);

// Hermitian parts (x + x^*)/2 and (x - x^*)/(2i).
Element hermitian_part(const Element& x);
Element antihermitian_part(const Element& x);

// |x| = (x^* x)^{1/2}, computed from the eigendecomposition of the
// hermitized x^* x with negative eigenvalues clamped to zero.
Element abs_op(const Element& x);

// Spectral calculus for hermitian PSD input: eigenvalues are clamped at zero
// and raised to the given power.  For negative powers the calculus is the
// pseudo-power: eigenvalues below rel_cutoff * lambda_max contribute zero.
Element psd_power(const Element& x, double power, double rel_cutoff = 1e-12);
Element psd_sqrt(const Element& x);

// Smallest eigenvalue of the hermitized element across blocks.
double min_herm_eigenvalue(const Element& x);

// ||x||_p = tau(|x|^p)^{1/p}; p = inf gives the operator norm.
double schatten_norm(const Element& x, PExponent p);
double operator_norm(const Element& x);

// ||x y||_r - ||x||_p ||y||_q for exponents with 1/r = 1/p + 1/q.
// Nonpositive up to rounding by the trace Holder inequality.
double holder_residual(const Element& x, const Element& y, PExponent p,
                       PExponent q, PExponent r);

}  // namespace ncmart
