#include "ncmart/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "ncmart/rng.hpp"

namespace ncmart {

namespace {

constexpr double kTiny = 1e-300;

std::vector<Element> copy_items(const OperatorSequence& a) { return a.items(); }

double sequence_l2(const std::vector<Element>& items) {
  double sum = 0.0;
  for (const Element& x : items) {
    const double n = norm_l2(x);
    sum += n * n;
  }
  return std::sqrt(sum);
}

// Spectral data of a hermitized PSD Gram sum needed by the subgradient:
// tau(G^{p/2}) and the pseudo-power G^{p/2 - 1}.
struct GramCalculus {
  double trace_half_power = 0.0;
  Element power_minus_one;
};

GramCalculus gram_calculus(const Element& gram, double p) {
  GramCalculus out{0.0, zero(gram.algebra())};
  const double half = 0.5 * p;
  std::vector<Matrix> blocks;
  blocks.reserve(gram.block_count());
  for (int i = 0; i < gram.block_count(); ++i) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        Matrix(0.5 * (gram.block(i) + gram.block(i).adjoint())));
    Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
    const double lambda_max = lambda.size() ? lambda.maxCoeff() : 0.0;
    const double cutoff = lambda_max * 1e-12;
    Eigen::VectorXd powered(lambda.size());
    double local = 0.0;
    for (int j = 0; j < lambda.size(); ++j) {
      local += std::pow(lambda[j], half);
      powered[j] =
          (lambda[j] > cutoff && lambda[j] > 0.0)
              ? std::pow(lambda[j], half - 1.0)
              : 0.0;
    }
    out.trace_half_power += gram.algebra()->trace_scale(i) * local;
    blocks.push_back(es.eigenvectors() * powered.asDiagonal() *
                     es.eigenvectors().adjoint());
  }
  out.power_minus_one = Element(gram.algebra(), std::move(blocks));
  return out;
}

struct Objective {
  double value;
  double col_part;
  double row_part;
};

Objective evaluate(const OperatorSequence& a, const std::vector<Element>& y,
                   PExponent p) {
  std::vector<Element> z;
  z.reserve(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) z.push_back(a.item(n) - y[n]);
  OperatorSequence ys(a.algebra(), y);
  OperatorSequence zs(a.algebra(), std::move(z));
  Objective o{0.0, column_norm(ys, p), row_norm(zs, p)};
  o.value = o.col_part + o.row_part;
  return o;
}

// Gradient of col_p(y) + row_p(a - y) with respect to y under the real trace
// inner product.  With G = sum y^* y and t = tau(G^{p/2}),
//   d col_p(y) = t^{1/p - 1} Re tau(G^{p/2-1} y_n^* dy_n)
// so the gradient item is t^{1/p-1} y_n G^{p/2-1}; the row part is the
// mirror image H^{p/2-1} z_n with H = sum z z^* and flips sign through
// z = a - y.
std::vector<Element> gradient(const OperatorSequence& a,
                              const std::vector<Element>& y, double p) {
  const AlgebraPtr& alg = a.algebra();
  std::vector<Element> z;
  z.reserve(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) z.push_back(a.item(n) - y[n]);

  Element g = zero(alg);
  Element h = zero(alg);
  for (std::size_t n = 0; n < y.size(); ++n) {
    g += y[n].adjoint() * y[n];
    h += z[n] * z[n].adjoint();
  }
  GramCalculus gc = gram_calculus(g, p);
  GramCalculus hc = gram_calculus(h, p);
  const double gscale =
      gc.trace_half_power > kTiny
          ? std::pow(gc.trace_half_power, 1.0 / p - 1.0)
          : 0.0;
  const double hscale =
      hc.trace_half_power > kTiny
          ? std::pow(hc.trace_half_power, 1.0 / p - 1.0)
          : 0.0;

  std::vector<Element> grad;
  grad.reserve(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) {
    Element item = (y[n] * gc.power_minus_one) * gscale;
    item -= (hc.power_minus_one * z[n]) * hscale;
    grad.push_back(std::move(item));
  }
  return grad;
}

// Dual certificate: any sequence b with max(col_q(b), row_q(b)) <= 1 gives
// |sum tau(b_n^* a_n)| <= inf over decompositions, by the trace Holder
// inequality applied to each part.  Candidates are the aligned duals of the
// incumbent column and row parts and their convex mixes.
double dual_lower_bound(const OperatorSequence& a,
                        const std::vector<Element>& y, PExponent p,
                        const SequenceProjection* projection) {
  const AlgebraPtr& alg = a.algebra();
  const PExponent q = p.conjugate();
  const double pv = p.value();
  const double inv_q = 1.0 - 1.0 / pv;

  std::vector<Element> z;
  z.reserve(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) z.push_back(a.item(n) - y[n]);

  Element g = zero(alg);
  Element h = zero(alg);
  for (std::size_t n = 0; n < y.size(); ++n) {
    g += y[n].adjoint() * y[n];
    h += z[n] * z[n].adjoint();
  }
  GramCalculus gc = gram_calculus(g, pv);
  GramCalculus hc = gram_calculus(h, pv);

  std::vector<std::vector<Element>> candidates;
  if (gc.trace_half_power > kTiny) {
    const double scale = std::pow(gc.trace_half_power, -inv_q);
    std::vector<Element> b;
    b.reserve(y.size());
    for (const Element& yn : y) b.push_back((yn * gc.power_minus_one) * scale);
    candidates.push_back(std::move(b));
  }
  if (hc.trace_half_power > kTiny) {
    const double scale = std::pow(hc.trace_half_power, -inv_q);
    std::vector<Element> b;
    b.reserve(z.size());
    for (const Element& zn : z) b.push_back((hc.power_minus_one * zn) * scale);
    candidates.push_back(std::move(b));
  }
  if (candidates.size() == 2) {
    for (double t : {0.25, 0.5, 0.75}) {
      std::vector<Element> b;
      b.reserve(y.size());
      for (std::size_t n = 0; n < y.size(); ++n) {
        b.push_back(candidates[0][n] * t + candidates[1][n] * (1.0 - t));
      }
      candidates.push_back(std::move(b));
    }
  }
  if (projection) {
    const std::size_t fixed = candidates.size();
    for (std::size_t c = 0; c < fixed; ++c) {
      // The projection is an orthogonal map fixing a, so projecting the dual
      // keeps the pairing and can only help the constraint.
      candidates.push_back(
          (*projection)(OperatorSequence(alg, candidates[c])).items());
    }
  }

  double best = 0.0;
  for (const std::vector<Element>& b : candidates) {
    OperatorSequence bs(alg, b);
    const double m = std::max(column_norm(bs, q), row_norm(bs, q));
    if (m <= kTiny) continue;
    Complex pairing(0.0, 0.0);
    for (std::size_t n = 0; n < b.size(); ++n) {
      pairing += inner(a.item(n), b[n]);
    }
    best = std::max(best, std::abs(pairing) / m);
  }
  return best;
}

}  // namespace

OperatorSequence::OperatorSequence(AlgebraPtr algebra,
                                   std::vector<Element> items)
    : algebra_(std::move(algebra)), items_(std::move(items)) {
  if (!algebra_) throw std::invalid_argument("OperatorSequence: null algebra");
  if (items_.empty()) {
    throw std::invalid_argument("OperatorSequence: sequence must be nonempty");
  }
  for (const Element& x : items_) {
    if (x.algebra().get() != algebra_.get()) {
      throw std::invalid_argument(
          "OperatorSequence: item from a different algebra");
    }
  }
}

OperatorSequence tail(const OperatorSequence& a, int from) {
  if (from < 0 || from >= a.length()) {
    throw std::invalid_argument("tail: index out of range");
  }
  std::vector<Element> items(a.items().begin() + from, a.items().end());
  return OperatorSequence(a.algebra(), std::move(items));
}

Element column_gram(const OperatorSequence& a) {
  Element g = zero(a.algebra());
  for (const Element& x : a.items()) g += x.adjoint() * x;
  return hermitian_part(g);
}

Element row_gram(const OperatorSequence& a) {
  Element g = zero(a.algebra());
  for (const Element& x : a.items()) g += x * x.adjoint();
  return hermitian_part(g);
}

double column_norm(const OperatorSequence& a, PExponent p) {
  return schatten_norm(psd_sqrt(column_gram(a)), p);
}

double row_norm(const OperatorSequence& a, PExponent p) {
  return schatten_norm(psd_sqrt(row_gram(a)), p);
}

double intersection_norm(const OperatorSequence& a, PExponent p) {
  return std::max(column_norm(a, p), row_norm(a, p));
}

double decomposition_residual(const OperatorSequence& target,
                              const Decomposition& d) {
  if (target.length() != d.a_part.length() ||
      target.length() != d.b_part.length()) {
    throw std::invalid_argument("decomposition_residual: length mismatch");
  }
  double worst = 0.0;
  for (int n = 0; n < target.length(); ++n) {
    worst = std::max(worst, norm_l2(target.item(n) - d.a_part.item(n) -
                                    d.b_part.item(n)));
  }
  return worst;
}

SumNormResult sum_norm_constrained(const OperatorSequence& a, PExponent p,
                                   const SumNormConfig& cfg,
                                   const SequenceProjection& projection) {
  if (p.is_inf() || p.value() > 2.0) {
    throw std::invalid_argument("sum_norm: exponent must satisfy 1 <= p <= 2");
  }
  const AlgebraPtr& alg = a.algebra();
  const double scale = sequence_l2(a.items());

  auto project = [&](std::vector<Element> items) {
    if (!projection) return items;
    return projection(OperatorSequence(alg, std::move(items))).items();
  };

  if (projection) {
    std::vector<Element> fixed = project(copy_items(a));
    double res = 0.0;
    for (int n = 0; n < a.length(); ++n) {
      res = std::max(res, norm_l2(fixed[n] - a.item(n)));
    }
    if (res > 1e-9 * std::max(scale, 1.0)) {
      throw std::invalid_argument(
          "sum_norm: projection does not fix the target sequence");
    }
  }

  // Degenerate target: the zero decomposition is optimal and certified.
  if (scale == 0.0) {
    OperatorSequence zseq(alg, std::vector<Element>(a.length(), zero(alg)));
    return SumNormResult{0.0, 0.0, 0.0, Decomposition{zseq, zseq}};
  }

  // Starting points: all mass on the column part, all on the row part, and
  // the hermitian/antihermitian split, plus seeded random perturbations.
  std::vector<std::vector<Element>> starts;
  starts.push_back(copy_items(a));
  starts.push_back(std::vector<Element>(a.length(), zero(alg)));
  {
    std::vector<Element> herm;
    herm.reserve(a.length());
    for (const Element& x : a.items()) herm.push_back(hermitian_part(x));
    starts.push_back(project(std::move(herm)));
  }
  Rng rng(cfg.seed);
  for (int r = 0; r < cfg.random_restarts; ++r) {
    std::vector<Element> pert = copy_items(a);
    for (Element& x : pert) {
      for (int b = 0; b < x.block_count(); ++b) {
        for (Eigen::Index i = 0; i < x.block(b).rows(); ++i) {
          for (Eigen::Index j = 0; j < x.block(b).cols(); ++j) {
            x.block(b)(i, j) *= 0.5;
            x.block(b)(i, j) += 0.25 * scale * rng.complex_gaussian();
          }
        }
      }
    }
    starts.push_back(project(std::move(pert)));
  }

  std::vector<Element> best_y = starts.front();
  double best_value = evaluate(a, best_y, p).value;
  for (std::size_t s = 1; s < starts.size(); ++s) {
    const double v = evaluate(a, starts[s], p).value;
    if (v < best_value) {
      best_value = v;
      best_y = starts[s];
    }
  }

  double lower = dual_lower_bound(a, best_y, p, projection ? &projection : nullptr);
  auto gap_of = [&](double value, double lb) {
    return (value - lb) / std::max(value, 1e-30);
  };

  if (gap_of(best_value, lower) > cfg.stop_gap) {
    for (const std::vector<Element>& start : starts) {
      std::vector<Element> y = start;
      for (int it = 0; it < cfg.iterations; ++it) {
        std::vector<Element> grad = gradient(a, y, p.value());
        const double gnorm = sequence_l2(grad);
        if (gnorm <= kTiny) break;
        const double eta =
            cfg.step * scale / (gnorm * std::sqrt(static_cast<double>(it + 1)));
        for (std::size_t n = 0; n < y.size(); ++n) {
          y[n] -= grad[n] * eta;
        }
        y = project(std::move(y));
        const double v = evaluate(a, y, p).value;
        if (v < best_value) {
          best_value = v;
          best_y = y;
        }
      }
      lower = std::max(lower, dual_lower_bound(a, best_y, p,
                                               projection ? &projection : nullptr));
      if (gap_of(best_value, lower) <= cfg.stop_gap) break;
    }
  }

  // The incumbent is an upper bound by construction; the certificate can be
  // loose but never exceeds the value (clip rounding noise).
  lower = std::min(lower, best_value);

  std::vector<Element> best_z;
  best_z.reserve(best_y.size());
  for (std::size_t n = 0; n < best_y.size(); ++n) {
    best_z.push_back(a.item(n) - best_y[n]);
  }
  Decomposition split{OperatorSequence(alg, std::move(best_y)),
                      OperatorSequence(alg, std::move(best_z))};
  return SumNormResult{best_value, lower, gap_of(best_value, lower),
                       std::move(split)};
}

SumNormResult sum_norm(const OperatorSequence& a, PExponent p,
                       const SumNormConfig& cfg) {
  return sum_norm_constrained(a, p, cfg, nullptr);
}

namespace {
PExponent double_exponent(PExponent p) {
  return p.is_inf() ? PExponent::inf() : PExponent(2.0 * p.value());
}
}  // namespace

double holder_multiplier_check(const OperatorSequence& a, const Element& A,
                               PExponent p) {
  if (!p.is_inf() && p.value() < 2.0) {
    throw std::invalid_argument(
        "holder_multiplier_check: exponent must satisfy 2 <= p <= inf");
  }
  if (A.algebra().get() != a.algebra().get()) {
    throw std::invalid_argument("holder_multiplier_check: algebra mismatch");
  }
  const PExponent p2 = double_exponent(p);
  std::vector<Element> rows;
  rows.reserve(a.length());
  for (const Element& x : a.items()) rows.push_back(x * A);
  const double lhs = row_norm(OperatorSequence(a.algebra(), std::move(rows)), p);
  const double rhs = intersection_norm(a, p2) * schatten_norm(A, p2);
  return lhs - rhs;
}

double fourth_power_check(const OperatorSequence& a, PExponent p) {
  const PExponent p2 = double_exponent(p);
  Element quartic = zero(a.algebra());
  for (const Element& x : a.items()) {
    Element sq = x.adjoint() * x;
    quartic += sq * sq;
  }
  const double lhs = schatten_norm(psd_sqrt(hermitian_part(quartic)), p);

  double diag_factor = 0.0;
  if (p.is_inf()) {
    for (const Element& x : a.items()) {
      diag_factor = std::max(diag_factor, operator_norm(x));
    }
  } else {
    const double r = 2.0 * p.value();
    double sum = 0.0;
    for (const Element& x : a.items()) {
      sum += std::pow(schatten_norm(x, r), r);
    }
    diag_factor = std::pow(sum, 1.0 / r);
  }
  return lhs - column_norm(a, p2) * diag_factor;
}

}  // namespace ncmart
