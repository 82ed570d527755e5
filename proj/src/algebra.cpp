#include "ncmart/algebra.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace ncmart {

namespace {

Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

void check_same(const Element& a, const Element& b, const char* op) {
  if (!a.same_algebra(b)) {
    throw std::invalid_argument(std::string(op) +
                                ": operands belong to different algebras");
  }
}

// Eigendecomposition of the hermitized input with eigenvalues clamped at
// zero.  All spectral calculus below funnels through this.
struct ClampedSpectrum {
  Eigen::VectorXd values;
  Matrix vectors;
};

ClampedSpectrum clamped_spectrum(const Matrix& psd) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(psd));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed");
  }
  return {es.eigenvalues().cwiseMax(0.0), es.eigenvectors()};
}

}  // namespace

TraceAlgebra::TraceAlgebra(std::vector<int> dims, std::vector<double> weights,
                           TraceConvention convention)
    : dims_(std::move(dims)),
      weights_(std::move(weights)),
      convention_(convention) {
  if (dims_.empty()) {
    throw std::invalid_argument("TraceAlgebra: need at least one block");
  }
  if (dims_.size() != weights_.size()) {
    throw std::invalid_argument(
        "TraceAlgebra: block and weight counts differ");
  }
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] <= 0) {
      throw std::invalid_argument("TraceAlgebra: block dimensions must be >= 1");
    }
    if (!(weights_[i] > 0.0)) {
      throw std::invalid_argument("TraceAlgebra: weights must be positive");
    }
    weight_sum += weights_[i];
    total_dim_ += dims_[i];
    vector_dim_ += dims_[i] * dims_[i];
  }
  if (std::abs(weight_sum - 1.0) > 1e-12) {
    throw std::invalid_argument("TraceAlgebra: weights must sum to one");
  }
}

AlgebraPtr TraceAlgebra::make(std::vector<int> block_dims,
                              std::vector<double> block_weights,
                              TraceConvention convention) {
  return AlgebraPtr(new TraceAlgebra(std::move(block_dims),
                                     std::move(block_weights), convention));
}

AlgebraPtr TraceAlgebra::full_matrix(int n, TraceConvention convention) {
  return make({n}, {1.0}, convention);
}

double TraceAlgebra::trace_scale(int block) const {
  if (convention_ == TraceConvention::unnormalized) return 1.0;
  return weights_[block] / static_cast<double>(dims_[block]);
}

Element::Element(AlgebraPtr algebra, std::vector<Matrix> blocks)
    : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {
  if (!algebra_) {
    throw std::invalid_argument("Element: null algebra");
  }
  if (static_cast<int>(blocks_.size()) != algebra_->block_count()) {
    throw std::invalid_argument("Element: wrong number of blocks");
  }
  for (int i = 0; i < algebra_->block_count(); ++i) {
    const int d = algebra_->block_dims()[i];
    if (blocks_[i].rows() != d || blocks_[i].cols() != d) {
      throw std::invalid_argument("Element: block " + std::to_string(i) +
                                  " has wrong shape");
    }
  }
}

Element Element::adjoint() const {
  std::vector<Matrix> out;
  out.reserve(blocks_.size());
  for (const Matrix& b : blocks_) out.push_back(b.adjoint());
  return Element(algebra_, std::move(out));
}

Element& Element::operator+=(const Element& rhs) {
  check_same(*this, rhs, "operator+");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += rhs.blocks_[i];
  return *this;
}

Element& Element::operator-=(const Element& rhs) {
  check_same(*this, rhs, "operator-");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= rhs.blocks_[i];
  return *this;
}

Element& Element::operator*=(Complex scalar) {
  for (Matrix& b : blocks_) b *= scalar;
  return *this;
}

Element Element::operator-() const {
  std::vector<Matrix> out;
  out.reserve(blocks_.size());
  for (const Matrix& b : blocks_) out.push_back(-b);
  return Element(algebra_, std::move(out));
}

Element operator*(const Element& lhs, const Element& rhs) {
  check_same(lhs, rhs, "operator*");
  std::vector<Matrix> out;
  out.reserve(lhs.blocks_.size());
  for (std::size_t i = 0; i < lhs.blocks_.size(); ++i) {
    out.push_back(lhs.blocks_[i] * rhs.blocks_[i]);
  }
  return Element(lhs.algebra_, std::move(out));
}

Element identity(const AlgebraPtr& algebra) {
  std::vector<Matrix> blocks;
  blocks.reserve(algebra->block_count());
  for (int d : algebra->block_dims()) {
    blocks.push_back(Matrix::Identity(d, d));
  }
  return Element(algebra, std::move(blocks));
}

Element zero(const AlgebraPtr& algebra) {
  std::vector<Matrix> blocks;
  blocks.reserve(algebra->block_count());
  for (int d : algebra->block_dims()) {
    blocks.push_back(Matrix::Zero(d, d));
  }
  return Element(algebra, std::move(blocks));
}

Element matrix_unit(const AlgebraPtr& algebra, int block, int i, int j) {
  if (block < 0 || block >= algebra->block_count()) {
    throw std::invalid_argument("matrix_unit: block out of range");
  }
  const int d = algebra->block_dims()[block];
  if (i < 0 || i >= d || j < 0 || j >= d) {
    throw std::invalid_argument("matrix_unit: index out of range");
  }
  Element e = zero(algebra);
  e.block(block)(i, j) = Complex(1.0, 0.0);
  return e;
}

Complex trace(const Element& x) {
  Complex sum(0.0, 0.0);
  for (int i = 0; i < x.block_count(); ++i) {
    sum += x.algebra()->trace_scale(i) * x.block(i).trace();
  }
  return sum;
}

Complex inner(const Element& x, const Element& y) {
  check_same(x, y, "inner");
  Complex sum(0.0, 0.0);
  for (int i = 0; i < x.block_count(); ++i) {
    // tr(y_i^* x_i) without forming the product.
    sum += x.algebra()->trace_scale(i) *
           (y.block(i).conjugate().cwiseProduct(x.block(i))).sum();
  }
  return sum;
}

double norm_l2(const Element& x) {
  double sum = 0.0;
  for (int i = 0; i < x.block_count(); ++i) {
    sum += x.algebra()->trace_scale(i) * x.block(i).squaredNorm();
  }
  return std::sqrt(std::max(sum, 0.0));
}

double max_abs_entry(const Element& x) {
  double m = 0.0;
  for (int i = 0; i < x.block_count(); ++i) {
    if (x.block(i).size() > 0) {
      m = std::max(m, x.block(i).cwiseAbs().maxCoeff());
    }
  }
  return m;
}

Element hermitian_part(const Element& x) {
  std::vector<Matrix> out;
  out.reserve(x.block_count());
  for (int i = 0; i < x.block_count(); ++i) out.push_back(hermitize(x.block(i)));
  return Element(x.algebra(), std::move(out));
}

Element antihermitian_part(const Element& x) {
  std::vector<Matrix> out;
  out.reserve(x.block_count());
  const Complex half_over_i(0.0, -0.5);
  for (int i = 0; i < x.block_count(); ++i) {
    out.push_back(half_over_i * (x.block(i) - x.block(i).adjoint()));
  }
  return Element(x.algebra(), std::move(out));
}

Element abs_op(const Element& x) {
  std::vector<Matrix> out;
  out.reserve(x.block_count());
  for (int i = 0; i < x.block_count(); ++i) {
    const Matrix& b = x.block(i);
    ClampedSpectrum s = clamped_spectrum(b.adjoint() * b);
    out.push_back(s.vectors * s.values.cwiseSqrt().asDiagonal() *
                  s.vectors.adjoint());
  }
  return Element(x.algebra(), std::move(out));
}

Element psd_power(const Element& x, double power, double rel_cutoff) {
  std::vector<Matrix> out;
  out.reserve(x.block_count());
  for (int i = 0; i < x.block_count(); ++i) {
    ClampedSpectrum s = clamped_spectrum(x.block(i));
    const double lambda_max = s.values.size() ? s.values.maxCoeff() : 0.0;
    const double cutoff = lambda_max * rel_cutoff;
    Eigen::VectorXd powered(s.values.size());
    for (int j = 0; j < s.values.size(); ++j) {
      const double lambda = s.values[j];
      if (power >= 0.0) {
        powered[j] = (lambda == 0.0 && power == 0.0) ? 0.0
                                                     : std::pow(lambda, power);
      } else {
        // Pseudo-power: drop the (numerical) kernel.
        powered[j] = (lambda > cutoff && lambda > 0.0)
                         ? std::pow(lambda, power)
                         : 0.0;
      }
    }
    out.push_back(s.vectors * powered.asDiagonal() * s.vectors.adjoint());
  }
  return Element(x.algebra(), std::move(out));
}

Element psd_sqrt(const Element& x) { return psd_power(x, 0.5); }

double min_herm_eigenvalue(const Element& x) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.block_count(); ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(x.block(i)));
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("eigendecomposition failed");
    }
    m = std::min(m, es.eigenvalues().minCoeff());
  }
  return m;
}

double schatten_norm(const Element& x, PExponent p) {
  // Singular values per block, from the clamped spectrum of x^* x.
  if (p.is_inf()) {
    double top = 0.0;
    for (int i = 0; i < x.block_count(); ++i) {
      const Matrix& b = x.block(i);
      ClampedSpectrum s = clamped_spectrum(b.adjoint() * b);
      if (s.values.size()) top = std::max(top, std::sqrt(s.values.maxCoeff()));
    }
    return top;
  }
  const double pv = p.value();
  double sum = 0.0;
  for (int i = 0; i < x.block_count(); ++i) {
    const Matrix& b = x.block(i);
    ClampedSpectrum s = clamped_spectrum(b.adjoint() * b);
    double block_sum = 0.0;
    for (int j = 0; j < s.values.size(); ++j) {
      block_sum += std::pow(std::sqrt(s.values[j]), pv);
    }
    sum += x.algebra()->trace_scale(i) * block_sum;
  }
  if (sum <= 0.0) return 0.0;
  return std::pow(sum, 1.0 / pv);
}

double operator_norm(const Element& x) {
  return schatten_norm(x, PExponent::inf());
}

double holder_residual(const Element& x, const Element& y, PExponent p,
                       PExponent q, PExponent r) {
  check_same(x, y, "holder_residual");
  const double lhs_recip = r.reciprocal();
  const double rhs_recip = p.reciprocal() + q.reciprocal();
  if (std::abs(lhs_recip - rhs_recip) > 1e-12) {
    throw std::invalid_argument(
        "holder_residual: exponents must satisfy 1/r = 1/p + 1/q");
  }
  return schatten_norm(x * y, r) - schatten_norm(x, p) * schatten_norm(y, q);
}

}  // namespace ncmart
