#include "ncmart/expectation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "ncmart/rng.hpp"

namespace ncmart {

namespace {

constexpr double kDropTol = 1e-8;  // relative Gram-Schmidt pruning threshold

void check_parent(const AlgebraPtr& parent, const std::vector<Element>& xs,
                  const char* who) {
  for (const Element& x : xs) {
    if (x.algebra().get() != parent.get()) {
      throw std::invalid_argument(std::string(who) +
                                  ": element from a different parent algebra");
    }
  }
}

// Modified Gram-Schmidt accumulator.  Directions whose remainder falls below
// drop_tol * batch_scale are treated as dependent and dropped.
class OrthoSpan {
 public:
  explicit OrthoSpan(double batch_scale) : scale_(std::max(batch_scale, 1e-300)) {}

  bool add(Element v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const Element& b : basis_) {
        v -= inner(v, b) * b;
      }
    }
    const double n = norm_l2(v);
    if (n <= kDropTol * scale_) return false;
    basis_.push_back(v * (1.0 / n));
    return true;
  }

  void rescale(double batch_scale) { scale_ = std::max(batch_scale, scale_); }

  std::vector<Element>& basis() { return basis_; }
  const std::vector<Element>& basis() const { return basis_; }

 private:
  double scale_;
  std::vector<Element> basis_;
};

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

// Orthonormal basis of a whole algebra: matrix units scaled to unit L^2 norm.
std::vector<Element> matrix_unit_basis(const AlgebraPtr& a) {
  std::vector<Element> basis;
  basis.reserve(a->vector_dim());
  for (int blk = 0; blk < a->block_count(); ++blk) {
    const double scale = 1.0 / std::sqrt(a->trace_scale(blk));
    for (int i = 0; i < a->block_dims()[blk]; ++i) {
      for (int j = 0; j < a->block_dims()[blk]; ++j) {
        basis.push_back(matrix_unit(a, blk, i, j) * scale);
      }
    }
  }
  return basis;
}

}  // namespace

Subalgebra::Subalgebra(AlgebraPtr parent,
                       std::vector<Element> orthonormal_basis) {
  if (!parent) throw std::invalid_argument("Subalgebra: null parent");
  if (orthonormal_basis.empty()) {
    throw std::invalid_argument("Subalgebra: basis must be nonempty");
  }
  check_parent(parent, orthonormal_basis, "Subalgebra");
  auto data = std::make_shared<Data>();
  data->parent = std::move(parent);
  data->basis = std::move(orthonormal_basis);
  data_ = std::move(data);
}

void Subalgebra::validate(double tol, int pair_budget) const {
  const std::vector<Element>& b = basis();
  const int n = dim();

  auto fail = [](const std::string& what, double residual) {
    throw std::runtime_error("Subalgebra::validate: " + what + " residual " +
                             std::to_string(residual));
  };

  // Unit membership.
  Element one = identity(parent());
  Element pone = cond_exp(*this, one);
  const double unit_res = norm_l2(one - pone);
  if (unit_res > tol) fail("unit membership", unit_res);

  // Orthonormality and closure, exhaustively when affordable.
  std::vector<std::pair<int, int>> pairs;
  if (static_cast<long>(n) * n <= pair_budget) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) pairs.emplace_back(i, j);
    }
  } else {
    Rng rng(42);
    for (int k = 0; k < pair_budget; ++k) {
      pairs.emplace_back(rng.uniform_int(n), rng.uniform_int(n));
    }
  }
  for (const auto& [i, j] : pairs) {
    const Complex g = inner(b[i], b[j]);
    const double expected = (i == j) ? 1.0 : 0.0;
    const double gram_res = std::abs(g - Complex(expected, 0.0));
    if (gram_res > tol) fail("orthonormality", gram_res);
    Element prod = b[i] * b[j];
    const double prod_res = norm_l2(prod - cond_exp(*this, prod));
    if (prod_res > tol) fail("product closure", prod_res);
  }
  for (int i = 0; i < n; ++i) {
    Element adj = b[i].adjoint();
    const double adj_res = norm_l2(adj - cond_exp(*this, adj));
    if (adj_res > tol) fail("adjoint closure", adj_res);
  }
}

Subalgebra generate_subalgebra(const AlgebraPtr& parent,
                               const std::vector<Element>& generators) {
  check_parent(parent, generators, "generate_subalgebra");

  double scale = 1.0;  // the unit has norm one
  for (const Element& g : generators) scale = std::max(scale, norm_l2(g));
  OrthoSpan span(scale);
  span.add(identity(parent));
  for (const Element& g : generators) span.add(g);

  const long max_rounds =
      static_cast<long>(parent->vector_dim()) * parent->vector_dim() + 2;
  for (long round = 0; round < max_rounds; ++round) {
    const std::size_t before = span.basis().size();
    std::vector<Element> batch;
    batch.reserve(before + before * before);
    for (std::size_t i = 0; i < before; ++i) {
      batch.push_back(span.basis()[i].adjoint());
    }
    for (std::size_t i = 0; i < before; ++i) {
      for (std::size_t j = 0; j < before; ++j) {
        batch.push_back(span.basis()[i] * span.basis()[j]);
      }
    }
    double batch_scale = 0.0;
    for (const Element& c : batch) batch_scale = std::max(batch_scale, norm_l2(c));
    span.rescale(batch_scale);
    for (Element& c : batch) span.add(std::move(c));
    if (span.basis().size() == before) {
      return Subalgebra(parent, std::move(span.basis()));
    }
    if (static_cast<int>(span.basis().size()) > parent->vector_dim()) {
      throw std::runtime_error(
          "generate_subalgebra: span exceeded the parent dimension");
    }
  }
  throw std::runtime_error(
      "generate_subalgebra: closure did not stabilize within the iteration "
      "budget");
}

Element cond_exp(const Subalgebra& s, const Element& x) {
  if (x.algebra().get() != s.parent().get()) {
    throw std::invalid_argument("cond_exp: element from a different parent");
  }
  Element out = zero(s.parent());
  for (const Element& b : s.basis()) {
    out += inner(x, b) * b;
  }
  return out;
}

Filtration::Filtration(AlgebraPtr parent, std::vector<Subalgebra> levels) {
  if (!parent) throw std::invalid_argument("Filtration: null parent");
  if (levels.empty()) {
    throw std::invalid_argument("Filtration: need at least one level");
  }
  for (std::size_t n = 0; n < levels.size(); ++n) {
    if (levels[n].parent().get() != parent.get()) {
      throw std::invalid_argument("Filtration: level " + std::to_string(n) +
                                  " has a different parent");
    }
    if (n > 0 && levels[n].dim() < levels[n - 1].dim()) {
      throw std::invalid_argument("Filtration: level dimensions decrease");
    }
  }
  auto data = std::make_shared<Data>();
  data->terminal_is_full = levels.back().dim() == parent->vector_dim();
  data->parent = std::move(parent);
  data->levels = std::move(levels);
  data_ = std::move(data);
}

void Filtration::validate(double tol) const {
  for (int n = 0; n + 1 < depth(); ++n) {
    for (const Element& b : level(n).basis()) {
      const double res = norm_l2(b - cond_exp(level(n + 1), b));
      if (res > tol) {
        throw std::runtime_error("Filtration::validate: level " +
                                 std::to_string(n) +
                                 " not contained in its successor, residual " +
                                 std::to_string(res));
      }
    }
  }
}

AlgebraPtr tensor_algebra(const AlgebraPtr& a, const AlgebraPtr& b) {
  if (a->convention() != TraceConvention::normalized ||
      b->convention() != TraceConvention::normalized) {
    throw std::invalid_argument(
        "tensor_algebra: factors must carry the normalized trace");
  }
  std::vector<int> dims;
  std::vector<double> weights;
  dims.reserve(a->block_count() * b->block_count());
  for (int i = 0; i < a->block_count(); ++i) {
    for (int j = 0; j < b->block_count(); ++j) {
      dims.push_back(a->block_dims()[i] * b->block_dims()[j]);
      weights.push_back(a->block_weights()[i] * b->block_weights()[j]);
    }
  }
  return TraceAlgebra::make(std::move(dims), std::move(weights));
}

Element tensor_embed(const Element& x, const Element& y,
                     const AlgebraPtr& product) {
  const AlgebraPtr& a = x.algebra();
  const AlgebraPtr& b = y.algebra();
  if (product->block_count() != a->block_count() * b->block_count()) {
    throw std::invalid_argument(
        "tensor_embed: product algebra does not match the factors");
  }
  std::vector<Matrix> blocks;
  blocks.reserve(product->block_count());
  for (int i = 0; i < a->block_count(); ++i) {
    for (int j = 0; j < b->block_count(); ++j) {
      blocks.push_back(kron(x.block(i), y.block(j)));
    }
  }
  return Element(product, std::move(blocks));
}

Filtration tensor_filtration(const std::vector<AlgebraPtr>& factors) {
  if (factors.empty()) {
    throw std::invalid_argument("tensor_filtration: need at least one factor");
  }
  const int k = static_cast<int>(factors.size());

  // Partial products A_0 (x) ... (x) A_n for every n.
  std::vector<AlgebraPtr> partial(k);
  partial[0] = factors[0];
  for (int n = 1; n < k; ++n) {
    partial[n] = tensor_algebra(partial[n - 1], factors[n]);
  }
  const AlgebraPtr& full = partial[k - 1];

  // tail_algebra[n] is the product of factors n+1..k-1; absent for the last
  // level.  Any pairwise nesting yields the same lexicographic block order.
  std::vector<AlgebraPtr> tail_algebra(k);
  {
    std::vector<AlgebraPtr> suffix(k);
    suffix[k - 1] = factors[k - 1];
    for (int n = k - 2; n >= 0; --n) {
      suffix[n] = tensor_algebra(factors[n], suffix[n + 1]);
    }
    for (int n = 0; n + 1 < k; ++n) tail_algebra[n] = suffix[n + 1];
  }

  // Orthonormal bases of the partial products, built level by level:
  // basis(partial[n]) = basis(partial[n-1]) (x) basis(factors[n]).
  std::vector<std::vector<Element>> partial_basis(k);
  partial_basis[0] = matrix_unit_basis(factors[0]);
  for (int n = 1; n < k; ++n) {
    const std::vector<Element> factor_basis = matrix_unit_basis(factors[n]);
    partial_basis[n].reserve(partial_basis[n - 1].size() *
                             factor_basis.size());
    for (const Element& left : partial_basis[n - 1]) {
      for (const Element& right : factor_basis) {
        partial_basis[n].push_back(tensor_embed(left, right, partial[n]));
      }
    }
  }

  // Level n: partial basis tensored with the identity tail.  The product
  // trace makes these exactly orthonormal in the full algebra.
  std::vector<Subalgebra> levels;
  levels.reserve(k);
  for (int n = 0; n < k; ++n) {
    std::vector<Element> basis;
    basis.reserve(partial_basis[n].size());
    if (n == k - 1) {
      basis = partial_basis[n];
    } else {
      // Embed partial[n] (x) tail into the full product.  The full algebra
      // equals tensor_algebra(partial[n], tail_algebra[n]) up to block
      // ordering; build it directly to keep the block order of `full`.
      AlgebraPtr bridge = tensor_algebra(partial[n], tail_algebra[n]);
      if (bridge->block_count() != full->block_count() ||
          bridge->block_dims() != full->block_dims()) {
        throw std::runtime_error(
            "tensor_filtration: inconsistent block bookkeeping");
      }
      Element tail_one = identity(tail_algebra[n]);
      for (const Element& left : partial_basis[n]) {
        Element bridged = tensor_embed(left, tail_one, bridge);
        basis.push_back(Element(full, bridged.blocks()));
      }
    }
    levels.emplace_back(full, std::move(basis));
  }
  return Filtration(full, std::move(levels));
}

Filtration dyadic_filtration(int depth) {
  if (depth < 0 || depth > 16) {
    throw std::invalid_argument("dyadic_filtration: depth out of range");
  }
  const int atoms = 1 << depth;
  AlgebraPtr parent = TraceAlgebra::make(
      std::vector<int>(atoms, 1), std::vector<double>(atoms, 1.0 / atoms));

  std::vector<Subalgebra> levels;
  levels.reserve(depth + 1);
  for (int k = 0; k <= depth; ++k) {
    const int groups = 1 << k;
    const int group_size = atoms / groups;
    // Normalized indicator of each dyadic block: constant 2^{k/2}.
    const double height = std::sqrt(static_cast<double>(groups));
    std::vector<Element> basis;
    basis.reserve(groups);
    for (int g = 0; g < groups; ++g) {
      Element e = zero(parent);
      for (int a = g * group_size; a < (g + 1) * group_size; ++a) {
        e.block(a)(0, 0) = height;
      }
      basis.push_back(std::move(e));
    }
    levels.emplace_back(parent, std::move(basis));
  }
  return Filtration(parent, std::move(levels));
}

}  // namespace ncmart
