#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ncmart/algebra.hpp"

namespace ncmart {

// Finite, nonempty sequence of elements of one algebra.
class OperatorSequence {
 public:
  OperatorSequence(AlgebraPtr algebra, std::vector<Element> items);

  const AlgebraPtr& algebra() const { return algebra_; }
  int length() const { return static_cast<int>(items_.size()); }
  const Element& item(int n) const { return items_[n]; }
  Element& item(int n) { return items_[n]; }
  const std::vector<Element>& items() const { return items_; }

 private:
  AlgebraPtr algebra_;
  std::vector<Element> items_;
};

// Items from `from` onward (used to drop a leading term).
OperatorSequence tail(const OperatorSequence& a, int from);

// Column Gram sum  a_n^* a_n  and row Gram sum  a_n a_n^*, hermitized.
Element column_gram(const OperatorSequence& a);
Element row_gram(const OperatorSequence& a);

// || (sum a_n^* a_n)^{1/2} ||_p and the row analogue.
double column_norm(const OperatorSequence& a, PExponent p);
double row_norm(const OperatorSequence& a, PExponent p);

// max of column and row norms; the natural sequence norm for p >= 2.
double intersection_norm(const OperatorSequence& a, PExponent p);

// Splitting of a target sequence into a column part and a row part.
struct Decomposition {
  OperatorSequence a_part;
  OperatorSequence b_part;
};

double decomposition_residual(const OperatorSequence& target,
                              const Decomposition& d);

struct SumNormConfig {
  int iterations = 500;
  double step = 0.5;            // initial relative step of the subgradient walk
  int random_restarts = 1;
  std::uint64_t seed = 7001;
  double stop_gap = 1e-12;      // certified gap at which iteration stops early
};

struct SumNormResult {
  double value = 0.0;        // best decomposition objective found (upper bound)
  double lower_bound = 0.0;  // best dual certificate (valid lower bound)
  double gap = 0.0;          // (value - lower_bound) / max(value, tiny)
  Decomposition decomposition;
};

// Optional linear projection applied to candidate column parts; used to
// restrict decompositions (martingale differences, adapted processes).  Must
// fix the target sequence itself.
using SequenceProjection = std::function<OperatorSequence(const OperatorSequence&)>;

// inf { ||y||_column,p + ||z||_row,p : a = y + z } for 1 <= p <= 2, by
// projected subgradient descent over y with a duality lower bound.  The
// infimum is approached from above; value and lower_bound bracket it.
SumNormResult sum_norm(const OperatorSequence& a, PExponent p,
                       const SumNormConfig& cfg = {});
SumNormResult sum_norm_constrained(const OperatorSequence& a, PExponent p,
                                   const SumNormConfig& cfg,
                                   const SequenceProjection& projection);

// Row-norm multiplier bound, valid for 2 <= p <= inf:
//   || (a_n A)_n ||_row,p  <=  max(||a||_col,2p, ||a||_row,2p) ||A||_2p.
// Returns lhs - rhs (nonpositive up to the tolerance when the bound holds).
double holder_multiplier_check(const OperatorSequence& a, const Element& A,
                               PExponent p);

// Fourth-power bound, valid for 1 <= p <= inf:
//   || (sum |a_n|^4)^{1/2} ||_p <= || (sum |a_n|^2)^{1/2} ||_2p
//                                  (sum ||a_n||_2p^2p)^{1/(2p)}.
// The last factor degrades to max_n ||a_n||_inf at p = inf.  Returns
// lhs - rhs.
double fourth_power_check(const OperatorSequence& a, PExponent p);

}  // namespace ncmart
