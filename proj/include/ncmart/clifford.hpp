#pragma once

#include <utility>
#include <vector>

#include "ncmart/algebra.hpp"
#include "ncmart/expectation.hpp"
#include "ncmart/martingale.hpp"
#include "ncmart/sequences.hpp"

namespace ncmart {

// Clifford algebra with d generators, realized on antisymmetric Fock space
// over C^d (dimension 2^d).  Basis vectors are occupation subsets encoded as
// bitmasks, mode i on bit i - 1; the vacuum is the empty subset at index 0.
struct CliffordAlgebra {
  int d = 0;
  AlgebraPtr ambient;           // single block of size 2^d, normalized trace
  std::vector<Element> fields;  // Phi(e_1), ..., Phi(e_d)
  int vacuum_index = 0;
};

// Creation operators with the antisymmetric sign rule
// c_i |S> = (-1)^{#occupied below i} |S + i>, annihilators as adjoints,
// fields Phi(e_i) = c_i + c_i^*.  Hermitian unitaries with
// {Phi(e_i), Phi(e_j)} = 2 delta_ij.
CliffordAlgebra build_fock(int d);

// The same algebra through spin-chain words Z x ... x Z x X x 1 x ... x 1
// (mode 1 on the most significant factor).  Satisfies the same relations;
// the matrices differ from build_fock's by a basis permutation, so moment
// agreement between the two is a nontrivial check.
CliffordAlgebra jordan_wigner(int d);

// Phi(v) = sum v_i Phi(e_i) for real coefficients.  Hermitian with
// Phi(v)^2 = |v|^2 and {Phi(u), Phi(v)} = 2 <u, v>.
Element field(const CliffordAlgebra& c, const std::vector<double>& v);

// Product Phi(e_{m_1}) ... Phi(e_{m_k}); modes are 1-based.
Element clifford_word(const CliffordAlgebra& c, const std::vector<int>& modes);

// <x vac, vac>: the vacuum expectation, which coincides with the normalized
// trace on the algebra the fields generate.
Complex vacuum_expectation(const CliffordAlgebra& c, const Element& x);

// (even, odd) parts under the grading automorphism G(x) = P x P with P the
// particle-number parity.  G is a trace-preserving *-automorphism, G^2 = id.
std::pair<Element, Element> grading(const CliffordAlgebra& c, const Element& x);

// Levels n = 0..d, level n spanned by the 2^n products of distinct fields
// from the first n modes.  These words are exactly orthonormal, so no
// closure iteration is needed; the span equals the generated subalgebra.
Filtration clifford_filtration(const CliffordAlgebra& c);

// phi_n = dx_n Phi(e_n) for n >= 1 (valid since Phi(e_n)^2 = 1).  Each
// phi_n must lie in level n - 1; a residual above tol reports an
// adaptedness violation.  Row norms of (dx_n) and (phi_n) agree exactly;
// column norms agree within factors 1/2 and 2.
OperatorSequence extract_phi(const CliffordAlgebra& c, const Martingale& m,
                             double tol = 1e-9);

}  // namespace ncmart
