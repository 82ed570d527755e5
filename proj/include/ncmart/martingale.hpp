#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ncmart/expectation.hpp"
#include "ncmart/sequences.hpp"

namespace ncmart {

// Finite adapted sequence x_0, ..., x_N with E_m(x_n) = x_m for m <= n.
// Differences dx_n = x_n - x_{n-1} start from dx_0 = x_0.
class Martingale {
 public:
  // Validates adaptedness and the martingale property; tolerances are
  // relative to the largest term.
  Martingale(Filtration filtration, std::vector<Element> terms,
             double tol = 1e-8);

  const Filtration& filtration() const { return filtration_; }
  const AlgebraPtr& algebra() const { return filtration_.parent(); }
  int steps() const { return static_cast<int>(terms_.size()); }
  const Element& term(int n) const { return terms_[n]; }
  const Element& terminal() const { return terms_.back(); }

  Element difference(int n) const;
  OperatorSequence differences() const;

 private:
  Filtration filtration_;
  std::vector<Element> terms_;
};

// x_n = E_n(x_inf); one term per filtration level.
Martingale from_terminal(const Filtration& f, const Element& x_inf);

// Paths of the column and row square functions:
//   S_{C,n} = (sum_{k<=n} dx_k^* dx_k)^{1/2},  S_{R,n} the row analogue.
std::pair<OperatorSequence, OperatorSequence> square_functions(
    const Martingale& m);

// L^p norm of the martingale: the terminal term norm.  The maximum over the
// path coincides because conditional expectations are norm-one; asserted.
double martingale_norm(const Martingale& m, PExponent p);

struct HardyNorms {
  double h_c = 0.0;   // column norm of the difference sequence
  double h_r = 0.0;   // row norm
  double h = 0.0;     // Hardy norm: max for p >= 2, decomposition inf for p < 2
  PExponent p = 2.0;
  double gap = 0.0;   // sum-norm duality gap when p < 2, else zero
};

// For p < 2 the decomposition infimum runs over martingale difference pairs;
// candidates are forced through the projections D_n = E_n - E_{n-1}.
HardyNorms hardy_norm(const Martingale& m, PExponent p,
                      const SumNormConfig& cfg = {});

// (E_n a_n)_n.  Idempotent; fixes martingale difference sequences.
OperatorSequence stein_project(const Filtration& f, const OperatorSequence& a);

// y_0 = x_0, y_n = y_{n-1} + xi_{n-1} dx_n with predictable multipliers:
// xi.item(k) must lie in level k.  xi has one item fewer than m has terms.
Martingale transform(const Martingale& m, const OperatorSequence& xi);

// Operator norm of  |x_N|^2 - S_C^2 - sum_k (dx_k^* x_{k-1} + x_{k-1}^* dx_k);
// an exact algebraic identity, so the residual is rounding noise.
double doob_residual(const Martingale& m);

struct BmoNorms {
  double bmo_c = 0.0;
  double bmo_r = 0.0;
  double bmo = 0.0;
};

// bmo_c = (max_n || E_n |a - E_{n-1}a|^2 ||_oo)^{1/2} with E_{-1}a = 0;
// bmo_r applies the same to a^*.
BmoNorms bmo_norm(const Filtration& f, const Element& a);

// Largest deviation over n between E_n |a_N - a_{n-1}|^2 and the tail sum
// E_n (sum_{k>=n} |da_k|^2).  The identity is exact for the terminal part
// a_N, which is what both sides see.
double bmo_tail_residual(const Filtration& f, const Element& a);

// |tau(a^* x)| - sqrt(2) bmo_c(a) h1_c(x); nonpositive up to rounding.
double duality_check(const Filtration& f, const Element& a, const Element& x);

struct DualNormConfig {
  int iterations = 1000;
  int restarts = 8;
  double step = 0.25;
  std::uint64_t seed = 9100;
  double slack_factor = 0.1;  // one-sided search slack as a fraction of bmo_c
};

struct DualNormBand {
  double estimate = 0.0;   // lower-bound estimate of ||phi_a|| on the h1_c ball
  double band_low = 0.0;   // bmo_c / sqrt(3) minus the search slack
  double band_high = 0.0;  // sqrt(2) bmo_c plus rounding
};

// Estimates sup { |tau(a^* x)| : h1_c(x) <= 1 } by normalized gradient
// ascent over terminal elements with fixed-seed restarts.
DualNormBand dual_norm_band(const Filtration& f, const Element& a,
                            const DualNormConfig& cfg = {});

// ||x_N||_1 - sqrt(2) * (certified upper value of the difference sum norm).
double l1_corollary_check(const Martingale& m, const SumNormConfig& cfg = {});

}  // namespace ncmart
