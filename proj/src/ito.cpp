#include "ncmart/ito.hpp"

#include <cmath>
#include <stdexcept>

namespace ncmart {

namespace {
constexpr double kMinCell = 1e-9;
constexpr double kTimeMatchTol = 1e-12;
}  // namespace

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw std::invalid_argument("grid needs two times");
  if (times_.front() != 0.0) throw std::invalid_argument("grid must start at 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (times_[i] - times_[i - 1] < kMinCell) {
      throw std::invalid_argument("grid cell below the minimum length");
    }
  }
}

GridCliffordPtr make_grid_clifford(TimeGrid grid) {
  CliffordAlgebra algebra = build_fock(grid.cells());
  Filtration filtration = clifford_filtration(algebra);
  std::vector<Element> increments;
  increments.reserve(grid.cells());
  for (int k = 0; k < grid.cells(); ++k) {
    increments.push_back(algebra.fields[k] * std::sqrt(grid.dt(k)));
  }
  return std::make_shared<GridClifford>(GridClifford{
      std::move(grid), std::move(algebra), std::move(filtration),
      std::move(increments)});
}

Element brownian(const GridClifford& gc, int m) {
  if (m < 0 || m > gc.grid.cells()) {
    throw std::invalid_argument("brownian index outside the grid");
  }
  Element out = zero(gc.algebra.ambient);
  for (int k = 0; k < m; ++k) out += gc.increments[k];
  return out;
}

SimpleProcess::SimpleProcess(GridCliffordPtr carrier,
                             std::vector<Element> values, double tol)
    : carrier_(std::move(carrier)), values_(std::move(values)) {
  if (!carrier_) throw std::invalid_argument("process needs a carrier");
  if (static_cast<int>(values_.size()) != carrier_->grid.cells()) {
    throw std::invalid_argument("one process value per grid cell required");
  }
  for (int k = 0; k < cells(); ++k) {
    if (values_[k].algebra().get() != carrier_->algebra.ambient.get()) {
      throw std::invalid_argument("process value outside the carrier algebra");
    }
    const Element proj = cond_exp(carrier_->filtration.level(k), values_[k]);
    const double scale = std::max(1.0, norm_l2(values_[k]));
    if (norm_l2(values_[k] - proj) > tol * scale) {
      throw std::invalid_argument("process value is not adapted at its cell");
    }
  }
}

Martingale ito_integral(const SimpleProcess& f) {
  const GridClifford& gc = *f.carrier();
  std::vector<Element> terms;
  terms.reserve(f.cells() + 1);
  Element acc = zero(gc.algebra.ambient);
  terms.push_back(acc);
  for (int k = 0; k < f.cells(); ++k) {
    acc = acc + f.value(k) * gc.increments[k];
    terms.push_back(acc);
  }
  return Martingale(gc.filtration, std::move(terms));
}

double isometry_residual(const SimpleProcess& f) {
  const Martingale x = ito_integral(f);
  const double lhs = std::pow(martingale_norm(x, 2.0), 2);
  double rhs = 0.0;
  for (int k = 0; k < f.cells(); ++k) {
    rhs += std::pow(norm_l2(f.value(k)), 2) * f.grid().dt(k);
  }
  return std::abs(lhs - rhs);
}

namespace {

OperatorSequence weighted_values(const SimpleProcess& f) {
  std::vector<Element> items;
  items.reserve(f.cells());
  for (int k = 0; k < f.cells(); ++k) {
    items.push_back(f.value(k) * std::sqrt(f.grid().dt(k)));
  }
  return OperatorSequence(f.carrier()->algebra.ambient, std::move(items));
}

}  // namespace

HardyNorms process_hp_norm(const SimpleProcess& f, PExponent p,
                           const SumNormConfig& cfg) {
  const OperatorSequence seq = weighted_values(f);
  HardyNorms out;
  out.p = p;
  out.h_c = column_norm(seq, p);
  out.h_r = row_norm(seq, p);
  if (p.is_inf() || p.value() >= 2.0) {
    out.h = std::max(out.h_c, out.h_r);
    out.gap = 0.0;
    return out;
  }
  const Filtration& filt = f.carrier()->filtration;
  SequenceProjection adapt = [&filt](const OperatorSequence& s) {
    std::vector<Element> items;
    items.reserve(s.length());
    for (int k = 0; k < s.length(); ++k) {
      items.push_back(cond_exp(filt.level(k), s.item(k)));
    }
    return OperatorSequence(s.algebra(), std::move(items));
  };
  const SumNormResult r = sum_norm_constrained(seq, p, cfg, adapt);
  out.h = r.value;
  out.gap = r.gap;
  return out;
}

std::pair<double, double> bg_equivalence_residuals(const SimpleProcess& f,
                                                   PExponent p) {
  if (!p.is_inf() && p.value() <= 1.0) {
    throw std::invalid_argument("equivalence ratios need p > 1");
  }
  const double hp = process_hp_norm(f, p).h;
  const double xn = martingale_norm(ito_integral(f), p);
  if (hp < 1e-14 && xn < 1e-14) return {1.0, 1.0};
  return {xn / hp, hp / xn};
}

SimpleProcess q_sigma(const SimpleProcess& f, const TimeGrid& sigma) {
  const TimeGrid& fine = f.grid();
  // Locate each sigma time in the fine grid; refinement means all are found.
  std::vector<int> anchor(sigma.cells() + 1, -1);
  for (int s = 0; s <= sigma.cells(); ++s) {
    for (int i = 0; i <= fine.cells(); ++i) {
      if (std::abs(sigma.time(s) - fine.time(i)) <= kTimeMatchTol) {
        anchor[s] = i;
        break;
      }
    }
    if (anchor[s] < 0) {
      throw std::invalid_argument("process grid does not refine sigma");
    }
  }
  if (anchor.back() != fine.cells()) {
    throw std::invalid_argument("sigma must end with the process grid");
  }
  const Filtration& filt = f.carrier()->filtration;
  std::vector<Element> out(f.cells(), zero(f.carrier()->algebra.ambient));
  for (int s = 0; s < sigma.cells(); ++s) {
    const int lo = anchor[s];
    const int hi = anchor[s + 1];
    Element avg = zero(f.carrier()->algebra.ambient);
    for (int j = lo; j < hi; ++j) {
      const double theta = fine.dt(j) / sigma.dt(s);
      avg += cond_exp(filt.level(lo), f.value(j)) * theta;
    }
    for (int j = lo; j < hi; ++j) out[j] = avg;
  }
  return SimpleProcess(f.carrier(), std::move(out));
}

SimpleProcess represent(const GridCliffordPtr& gc, const Martingale& x) {
  if (x.algebra().get() != gc->algebra.ambient.get()) {
    throw std::invalid_argument("martingale outside the carrier algebra");
  }
  if (x.steps() != gc->grid.cells() + 1) {
    throw std::invalid_argument("martingale must carry one term per level");
  }
  std::vector<Element> values;
  values.reserve(gc->grid.cells());
  for (int k = 0; k < gc->grid.cells(); ++k) {
    values.push_back(x.difference(k + 1) * gc->increments[k] *
                     (1.0 / gc->grid.dt(k)));
  }
  // The SimpleProcess constructor rejects non-adapted values, which is
  // exactly the failure mode of a non-grid martingale.
  return SimpleProcess(gc, std::move(values));
}

}  // namespace ncmart
