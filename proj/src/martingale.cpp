#include "ncmart/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ncmart/rng.hpp"

namespace ncmart {

namespace {

double sequence_scale(const std::vector<Element>& terms) {
  double s = 0.0;
  for (const Element& x : terms) s = std::max(s, norm_l2(x));
  return std::max(s, 1.0);
}

}  // namespace

Martingale::Martingale(Filtration filtration, std::vector<Element> terms,
                       double tol)
    : filtration_(std::move(filtration)), terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("martingale needs terms");
  if (static_cast<int>(terms_.size()) > filtration_.depth()) {
    throw std::invalid_argument("more martingale terms than filtration levels");
  }
  const double scale = sequence_scale(terms_);
  for (std::size_t n = 0; n < terms_.size(); ++n) {
    if (terms_[n].algebra().get() != filtration_.parent().get()) {
      throw std::invalid_argument("martingale term outside the parent algebra");
    }
    const Element proj = cond_exp(filtration_.level(int(n)), terms_[n]);
    if (norm_l2(terms_[n] - proj) > tol * scale) {
      throw std::invalid_argument("martingale term is not adapted");
    }
    if (n + 1 < terms_.size()) {
      const Element back = cond_exp(filtration_.level(int(n)), terms_[n + 1]);
      if (norm_l2(back - terms_[n]) > tol * scale) {
        throw std::invalid_argument("martingale property fails");
      }
    }
  }
}

Element Martingale::difference(int n) const {
  if (n < 0 || n >= steps()) throw std::invalid_argument("difference index");
  if (n == 0) return terms_[0];
  return terms_[n] - terms_[n - 1];
}

OperatorSequence Martingale::differences() const {
  std::vector<Element> d;
  d.reserve(terms_.size());
  for (int n = 0; n < steps(); ++n) d.push_back(difference(n));
  return OperatorSequence(algebra(), std::move(d));
}

Martingale from_terminal(const Filtration& f, const Element& x_inf) {
  if (x_inf.algebra().get() != f.parent().get()) {
    throw std::invalid_argument("terminal element outside the parent algebra");
  }
  std::vector<Element> terms;
  terms.reserve(f.depth());
  for (int n = 0; n < f.depth(); ++n) {
    terms.push_back(cond_exp(f.level(n), x_inf));
  }
  return Martingale(f, std::move(terms));
}

std::pair<OperatorSequence, OperatorSequence> square_functions(
    const Martingale& m) {
  const AlgebraPtr& alg = m.algebra();
  std::vector<Element> col_path, row_path;
  Element col_sq = zero(alg);
  Element row_sq = zero(alg);
  for (int n = 0; n < m.steps(); ++n) {
    const Element d = m.difference(n);
    const Element da = d.adjoint();
    col_sq = col_sq + da * d;
    row_sq = row_sq + d * da;
    col_path.push_back(psd_sqrt(hermitian_part(col_sq)));
    row_path.push_back(psd_sqrt(hermitian_part(row_sq)));
  }
  return {OperatorSequence(alg, std::move(col_path)),
          OperatorSequence(alg, std::move(row_path))};
}

double martingale_norm(const Martingale& m, PExponent p) {
  const double last = schatten_norm(m.terminal(), p);
  double path_max = 0.0;
  for (int n = 0; n < m.steps(); ++n) {
    path_max = std::max(path_max, schatten_norm(m.term(n), p));
  }
  // Conditional expectations are norm-one, so the path maximum sits at the
  // terminal term; anything else indicates a broken filtration.
  if (path_max > last + 1e-9 * std::max(1.0, last)) {
    throw std::runtime_error("martingale path norm exceeds the terminal norm");
  }
  return last;
}

namespace {

// D_n = E_n - E_{n-1} applied itemwise; fixes martingale differences.
SequenceProjection difference_projection(const Filtration& f) {
  return [f](const OperatorSequence& s) {
    std::vector<Element> out;
    out.reserve(s.length());
    for (int n = 0; n < s.length(); ++n) {
      Element e = cond_exp(f.level(n), s.item(n));
      if (n > 0) e = e - cond_exp(f.level(n - 1), s.item(n));
      out.push_back(std::move(e));
    }
    return OperatorSequence(s.algebra(), std::move(out));
  };
}

}  // namespace

HardyNorms hardy_norm(const Martingale& m, PExponent p,
                      const SumNormConfig& cfg) {
  const OperatorSequence dx = m.differences();
  HardyNorms out;
  out.p = p;
  out.h_c = column_norm(dx, p);
  out.h_r = row_norm(dx, p);
  if (p.is_inf() || p.value() >= 2.0) {
    out.h = std::max(out.h_c, out.h_r);
    out.gap = 0.0;
    return out;
  }
  const SumNormResult r =
      sum_norm_constrained(dx, p, cfg, difference_projection(m.filtration()));
  out.h = r.value;
  out.gap = r.gap;
  return out;
}

OperatorSequence stein_project(const Filtration& f, const OperatorSequence& a) {
  if (a.algebra().get() != f.parent().get()) {
    throw std::invalid_argument("sequence outside the filtration parent");
  }
  if (a.length() > f.depth()) {
    throw std::invalid_argument("sequence longer than the filtration");
  }
  std::vector<Element> out;
  out.reserve(a.length());
  for (int n = 0; n < a.length(); ++n) {
    out.push_back(cond_exp(f.level(n), a.item(n)));
  }
  return OperatorSequence(a.algebra(), std::move(out));
}

Martingale transform(const Martingale& m, const OperatorSequence& xi) {
  if (xi.algebra().get() != m.algebra().get()) {
    throw std::invalid_argument("multiplier sequence outside the algebra");
  }
  if (xi.length() != m.steps() - 1) {
    throw std::invalid_argument("need one multiplier per difference past x_0");
  }
  const Filtration& f = m.filtration();
  for (int k = 0; k < xi.length(); ++k) {
    const Element proj = cond_exp(f.level(k), xi.item(k));
    const double scale = std::max(1.0, norm_l2(xi.item(k)));
    if (norm_l2(xi.item(k) - proj) > 1e-8 * scale) {
      throw std::invalid_argument("multiplier is not predictable");
    }
  }
  std::vector<Element> terms;
  terms.reserve(m.steps());
  terms.push_back(m.term(0));
  for (int n = 1; n < m.steps(); ++n) {
    terms.push_back(terms.back() + xi.item(n - 1) * m.difference(n));
  }
  return Martingale(f, std::move(terms));
}

double doob_residual(const Martingale& m) {
  const Element& xN = m.terminal();
  Element acc = xN.adjoint() * xN;
  for (int n = 0; n < m.steps(); ++n) {
    const Element d = m.difference(n);
    acc = acc - d.adjoint() * d;
    if (n > 0) {
      const Element& prev = m.term(n - 1);
      acc = acc - d.adjoint() * prev - prev.adjoint() * d;
    }
  }
  return operator_norm(acc);
}

namespace {

double bmo_column_squared(const Filtration& f, const Element& a) {
  double worst = 0.0;
  Element prev = zero(a.algebra());  // E_{-1} a = 0
  for (int n = 0; n < f.depth(); ++n) {
    const Element r = a - prev;
    const Element cond = cond_exp(f.level(n), r.adjoint() * r);
    worst = std::max(worst, operator_norm(cond));
    prev = cond_exp(f.level(n), a);
  }
  return worst;
}

}  // namespace

BmoNorms bmo_norm(const Filtration& f, const Element& a) {
  if (a.algebra().get() != f.parent().get()) {
    throw std::invalid_argument("element outside the filtration parent");
  }
  BmoNorms out;
  out.bmo_c = std::sqrt(bmo_column_squared(f, a));
  out.bmo_r = std::sqrt(bmo_column_squared(f, a.adjoint()));
  out.bmo = std::max(out.bmo_c, out.bmo_r);
  return out;
}

double bmo_tail_residual(const Filtration& f, const Element& a) {
  const Martingale m = from_terminal(f, a);
  const Element& aN = m.terminal();
  double worst = 0.0;
  for (int n = 0; n < m.steps(); ++n) {
    const Element r = aN - (n > 0 ? m.term(n - 1) : zero(a.algebra()));
    const Element lhs = cond_exp(f.level(n), r.adjoint() * r);
    Element tail_sq = zero(a.algebra());
    for (int k = n; k < m.steps(); ++k) {
      const Element d = m.difference(k);
      tail_sq = tail_sq + d.adjoint() * d;
    }
    const Element rhs = cond_exp(f.level(n), tail_sq);
    worst = std::max(worst, max_abs_entry(lhs - rhs));
  }
  return worst;
}

namespace {

double h1_column(const Filtration& f, const Element& x) {
  return column_norm(from_terminal(f, x).differences(), 1.0);
}

// Gradient of h1_c at x: sum_n D_n(dx_n G^{-1/2}) with G the column Gram of
// the differences; the pseudo-inverse drops the kernel.
Element h1_gradient(const Filtration& f, const Element& x) {
  const Martingale m = from_terminal(f, x);
  const OperatorSequence dx = m.differences();
  const Element g = column_gram(dx);
  const Element g_inv_sqrt = psd_power(hermitian_part(g), -0.5);
  Element grad = zero(x.algebra());
  for (int n = 0; n < dx.length(); ++n) {
    Element piece = dx.item(n) * g_inv_sqrt;
    piece = cond_exp(f.level(n), piece);
    if (n > 0) {
      piece = piece - cond_exp(f.level(n - 1), dx.item(n) * g_inv_sqrt);
    }
    grad = grad + piece;
  }
  return grad;
}

}  // namespace

double duality_check(const Filtration& f, const Element& a, const Element& x) {
  // Pairing through the terminal projection of a, so that only the parts the
  // filtration resolves enter on either side.
  const Element aN = cond_exp(f.level(f.depth() - 1), a);
  const double pairing = std::abs(trace(aN.adjoint() * x));
  const double bmo_c = bmo_norm(f, a).bmo_c;
  return pairing - std::sqrt(2.0) * bmo_c * h1_column(f, x);
}

DualNormBand dual_norm_band(const Filtration& f, const Element& a,
                            const DualNormConfig& cfg) {
  const double bmo_c = bmo_norm(f, a).bmo_c;
  DualNormBand out;
  out.band_low = bmo_c / std::sqrt(3.0) - cfg.slack_factor * bmo_c;
  out.band_high = std::sqrt(2.0) * bmo_c + 1e-9;
  if (bmo_c == 0.0) return out;

  const AlgebraPtr& alg = f.parent();
  const Martingale am = from_terminal(f, a);
  const Element& aN = am.terminal();
  const double scale = std::max(1.0, norm_l2(a));
  Rng rng(cfg.seed);

  std::vector<Element> starts;
  starts.push_back(am.terminal());
  for (int n = 0; n < am.steps(); ++n) starts.push_back(am.difference(n));
  for (int r = 0; r < cfg.restarts; ++r) {
    Element x = zero(alg);
    for (int b = 0; b < alg->block_count(); ++b) {
      Matrix& blk = x.block(b);
      for (int i = 0; i < blk.rows(); ++i) {
        for (int j = 0; j < blk.cols(); ++j) {
          blk(i, j) = scale * rng.complex_gaussian();
        }
      }
    }
    starts.push_back(std::move(x));
  }

  double best = 0.0;
  for (const Element& start : starts) {
    Element x = start;
    for (int it = 0; it < cfg.iterations; ++it) {
      const double h1 = h1_column(f, x);
      if (h1 < 1e-12 * scale) break;
      const Complex pairing = trace(aN.adjoint() * x);
      const double ratio = std::abs(pairing) / h1;
      best = std::max(best, ratio);
      // Align the phase so the pairing gradient is a_N itself, then ascend
      // the quotient |tau(a_N^* x)| / h1(x).
      const double mag = std::abs(pairing);
      const Complex phase = mag > 1e-15 ? std::conj(pairing) / mag : Complex(1.0);
      Element aligned = x * phase;
      const Element grad = aN - h1_gradient(f, aligned) * ratio;
      const double gnorm = norm_l2(grad);
      if (gnorm < 1e-14 * scale) break;
      const double eta =
          cfg.step * norm_l2(aligned) / (gnorm * std::sqrt(double(it + 1)));
      x = aligned + grad * eta;
    }
    const double h1 = h1_column(f, x);
    if (h1 > 1e-12 * scale) {
      best = std::max(best, std::abs(trace(aN.adjoint() * x)) / h1);
    }
  }
  out.estimate = best;
  return out;
}

double l1_corollary_check(const Martingale& m, const SumNormConfig& cfg) {
  const double lhs = schatten_norm(m.terminal(), 1.0);
  const SumNormResult r = sum_norm(m.differences(), 1.0, cfg);
  return lhs - std::sqrt(2.0) * r.value;
}

}  // namespace ncmart
