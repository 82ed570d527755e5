#pragma once

#include <memory>
#include <vector>

#include "ncmart/algebra.hpp"

namespace ncmart {

// Unital *-subalgebra of a parent TraceAlgebra, stored through a basis that
// is orthonormal for <x, y> = tau(y^* x).  The orthogonal projection onto the
// span is then the trace-preserving conditional expectation.  Cheap value
// handle; the basis is shared.
class Subalgebra {
 public:
  Subalgebra(AlgebraPtr parent, std::vector<Element> orthonormal_basis);

  const AlgebraPtr& parent() const { return data_->parent; }
  const std::vector<Element>& basis() const { return data_->basis; }
  int dim() const { return static_cast<int>(data_->basis.size()); }

  // Structural residuals: orthonormality of the basis, membership of the
  // unit, closure under adjoints and products.  Checks every pair when the
  // basis is small and a seeded sample of pairs above pair_budget; throws
  // std::runtime_error with the offending residual otherwise.
  void validate(double tol = 1e-8, int pair_budget = 4096) const;

 private:
  struct Data {
    AlgebraPtr parent;
    std::vector<Element> basis;
  };
  std::shared_ptr<const Data> data_;
};

// Smallest unital *-subalgebra containing the generators: the span is closed
// under adjoints and pairwise products until the dimension stabilizes, with
// modified Gram-Schmidt pruning directions below 1e-8 of the largest batch
// norm.  Intended for small parents; cost grows with the fourth power of the
// resulting dimension.
Subalgebra generate_subalgebra(const AlgebraPtr& parent,
                               const std::vector<Element>& generators);

// E_S(x): orthogonal projection of x onto S, represented in the parent.
// Trace-preserving, unital, positive, and an S-bimodule map.
Element cond_exp(const Subalgebra& s, const Element& x);

// Increasing sequence of subalgebras of one parent.  The terminal level may
// or may not span the whole parent; the flag records which.
class Filtration {
 public:
  Filtration(AlgebraPtr parent, std::vector<Subalgebra> levels);

  const AlgebraPtr& parent() const { return data_->parent; }
  int depth() const { return static_cast<int>(data_->levels.size()); }
  const Subalgebra& level(int n) const { return data_->levels[n]; }
  bool terminal_is_full() const { return data_->terminal_is_full; }

  // Inclusion residuals between consecutive levels.
  void validate(double tol = 1e-8) const;

 private:
  struct Data {
    AlgebraPtr parent;
    std::vector<Subalgebra> levels;
    bool terminal_is_full = false;
  };
  std::shared_ptr<const Data> data_;
};

// Direct sum structure of the tensor product of two block algebras: blocks
// are Kronecker pairs in row-major order, weights multiply.  Both factors
// must carry the normalized trace.
AlgebraPtr tensor_algebra(const AlgebraPtr& a, const AlgebraPtr& b);

// x (x) y inside tensor_algebra(a, b).
Element tensor_embed(const Element& x, const Element& y,
                     const AlgebraPtr& product);

// Filtration M_0 c M_1 c ... where M_n comprises the first n + 1 tensor
// factors acting on the left, with identity on the rest.  One level per
// factor; the last level is the whole product.
Filtration tensor_filtration(const std::vector<AlgebraPtr>& factors);

// Classical dyadic filtration at the given depth: the parent is the diagonal
// algebra on 2^depth uniform atoms and level k holds the functions constant
// on dyadic blocks of length 2^{depth-k}.  Levels 0..depth.
Filtration dyadic_filtration(int depth);

}  // namespace ncmart
