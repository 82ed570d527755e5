#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "ncmart/clifford.hpp"
#include "ncmart/martingale.hpp"

namespace ncmart {

// Subdivision 0 = t_0 < t_1 < ... < t_n.  Cells shorter than 1e-9 time
// units are rejected: the representation map divides by cell lengths.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  int cells() const { return static_cast<int>(times_.size()) - 1; }
  double time(int i) const { return times_[i]; }
  double dt(int k) const { return times_[k + 1] - times_[k]; }
  double total() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }

 private:
  std::vector<double> times_;
};

// Fermionic Brownian motion sampled on a grid: mode k + 1 carries the
// normalized indicator of [t_k, t_{k+1}), so the increment
// dPhi_k = sqrt(dt_k) Phi(e_{k+1}) is hermitian with square dt_k and
// distinct increments anticommute.  Phi_{t_m} is the sum of the first m.
struct GridClifford {
  TimeGrid grid;
  CliffordAlgebra algebra;
  Filtration filtration;
  std::vector<Element> increments;
};

using GridCliffordPtr = std::shared_ptr<const GridClifford>;

GridCliffordPtr make_grid_clifford(TimeGrid grid);

// Phi_{t_m} = sum_{k<m} dPhi_k; m ranges over 0..cells.
Element brownian(const GridClifford& gc, int m);

// One value per cell, f(t_k) adapted to the level generated by the first k
// modes (scalars for k = 0).
class SimpleProcess {
 public:
  SimpleProcess(GridCliffordPtr carrier, std::vector<Element> values,
                double tol = 1e-9);

  const GridCliffordPtr& carrier() const { return carrier_; }
  const TimeGrid& grid() const { return carrier_->grid; }
  int cells() const { return static_cast<int>(values_.size()); }
  const Element& value(int k) const { return values_[k]; }

 private:
  GridCliffordPtr carrier_;
  std::vector<Element> values_;
};

// X_{t_m} = sum_{k<m} f(t_k) dPhi_k as a martingale over the grid Clifford
// filtration; term m lives at level m.
Martingale ito_integral(const SimpleProcess& f);

// | ||X_T||_2^2 - sum_k ||f(t_k)||_2^2 dt_k |; exact at grid scale.
double isometry_residual(const SimpleProcess& f);

// Column value || (sum_k f(t_k)^* f(t_k) dt_k)^{1/2} ||_p and the row
// analogue; combined by max for p >= 2 and by the adapted-decomposition
// infimum for p < 2.
HardyNorms process_hp_norm(const SimpleProcess& f, PExponent p,
                           const SumNormConfig& cfg = {});

// Ratios ( ||X_T||_p / hp(f), hp(f) / ||X_T||_p ); (1, 1) for f = 0.
std::pair<double, double> bg_equivalence_residuals(const SimpleProcess& f,
                                                   PExponent p);

// Coarsening projection: on each sigma-cell starting at fine index k0,
// output = sum_j theta_j E_{t_{k0}} f(s_j) with theta the length fractions;
// the result is constant on sigma-cells and adapted at their left ends.
// f's grid must refine sigma.
SimpleProcess q_sigma(const SimpleProcess& f, const TimeGrid& sigma);

// f(t_k) = dX_{k+1} dPhi_k / dt_k.  X must have one term per level; the
// start term is subtracted, so the round trip reproduces X - X_0.
SimpleProcess represent(const GridCliffordPtr& gc, const Martingale& x);

}  // namespace ncmart
