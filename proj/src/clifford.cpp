#include "ncmart/clifford.hpp"

#include <bit>
#include <stdexcept>

namespace ncmart {

namespace {

constexpr int kMaxModes = 8;  // dimension budget 2^8 = 256

void check_modes(int d) {
  if (d < 1 || d > kMaxModes) {
    throw std::invalid_argument("mode count out of the supported range");
  }
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

CliffordAlgebra build_fock(int d) {
  check_modes(d);
  const int dim = 1 << d;
  CliffordAlgebra c;
  c.d = d;
  c.ambient = TraceAlgebra::make({dim}, {1.0});
  c.vacuum_index = 0;
  for (int mode = 1; mode <= d; ++mode) {
    const int bit = 1 << (mode - 1);
    Matrix creator = Matrix::Zero(dim, dim);
    for (int mask = 0; mask < dim; ++mask) {
      if (mask & bit) continue;
      const int below = std::popcount(unsigned(mask & (bit - 1)));
      creator(mask | bit, mask) = (below % 2 == 0) ? 1.0 : -1.0;
    }
    Matrix phi = creator + creator.adjoint();
    c.fields.push_back(Element(c.ambient, {std::move(phi)}));
  }
  return c;
}

CliffordAlgebra jordan_wigner(int d) {
  check_modes(d);
  const int dim = 1 << d;
  CliffordAlgebra c;
  c.d = d;
  c.ambient = TraceAlgebra::make({dim}, {1.0});
  c.vacuum_index = 0;
  Matrix x(2, 2), z(2, 2), id2(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  id2 << 1, 0, 0, 1;
  for (int mode = 1; mode <= d; ++mode) {
    Matrix acc = Matrix::Identity(1, 1);
    for (int j = 1; j <= d; ++j) {
      acc = kron(acc, j < mode ? z : (j == mode ? x : id2));
    }
    c.fields.push_back(Element(c.ambient, {std::move(acc)}));
  }
  return c;
}

Element field(const CliffordAlgebra& c, const std::vector<double>& v) {
  if (static_cast<int>(v.size()) != c.d) {
    throw std::invalid_argument("coefficient vector length mismatch");
  }
  Element out = zero(c.ambient);
  for (int i = 0; i < c.d; ++i) out += c.fields[i] * v[i];
  return out;
}

Element clifford_word(const CliffordAlgebra& c, const std::vector<int>& modes) {
  Element out = identity(c.ambient);
  for (int m : modes) {
    if (m < 1 || m > c.d) throw std::invalid_argument("mode out of range");
    out = out * c.fields[m - 1];
  }
  return out;
}

Complex vacuum_expectation(const CliffordAlgebra& c, const Element& x) {
  if (x.algebra().get() != c.ambient.get()) {
    throw std::invalid_argument("element outside the Clifford ambient algebra");
  }
  return x.block(0)(c.vacuum_index, c.vacuum_index);
}

std::pair<Element, Element> grading(const CliffordAlgebra& c,
                                    const Element& x) {
  if (x.algebra().get() != c.ambient.get()) {
    throw std::invalid_argument("element outside the Clifford ambient algebra");
  }
  const int dim = 1 << c.d;
  // P|S> = (-1)^{|S|} |S>; for the spin-chain representation the product of
  // all Z factors has the same matrix in its own basis, so this works for
  // both constructions.
  Matrix conj = x.block(0);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      const int pi = std::popcount(unsigned(i)) & 1;
      const int pj = std::popcount(unsigned(j)) & 1;
      if (pi != pj) conj(i, j) = -conj(i, j);
    }
  }
  Element g(x.algebra(), {std::move(conj)});
  return {(x + g) * 0.5, (x - g) * 0.5};
}

namespace {

// All 2^d ordered products of distinct fields, indexed by mode mask; each
// word extends a shorter one by its highest mode, keeping indices ascending.
std::vector<Element> word_table(const CliffordAlgebra& c) {
  const int count = 1 << c.d;
  std::vector<Element> words;
  words.reserve(count);
  words.push_back(identity(c.ambient));
  for (int mask = 1; mask < count; ++mask) {
    const int high = 31 - std::countl_zero(unsigned(mask));
    words.push_back(words[mask & ~(1 << high)] * c.fields[high]);
  }
  return words;
}

}  // namespace

Filtration clifford_filtration(const CliffordAlgebra& c) {
  const std::vector<Element> words = word_table(c);
  std::vector<Subalgebra> levels;
  levels.reserve(c.d + 1);
  for (int n = 0; n <= c.d; ++n) {
    // Words over the first n modes are exactly the masks below 2^n.
    std::vector<Element> basis(words.begin(), words.begin() + (1 << n));
    levels.emplace_back(c.ambient, std::move(basis));
  }
  return Filtration(c.ambient, std::move(levels));
}

OperatorSequence extract_phi(const CliffordAlgebra& c, const Martingale& m,
                             double tol) {
  if (m.algebra().get() != c.ambient.get()) {
    throw std::invalid_argument("martingale outside the Clifford ambient");
  }
  if (m.steps() < 2) {
    throw std::invalid_argument("need at least one difference past x_0");
  }
  if (m.steps() > c.d + 1) {
    throw std::invalid_argument("more martingale terms than modes");
  }
  std::vector<Element> phis;
  phis.reserve(m.steps() - 1);
  for (int n = 1; n < m.steps(); ++n) {
    Element phi = m.difference(n) * c.fields[n - 1];
    const Element proj = cond_exp(m.filtration().level(n - 1), phi);
    const double scale = std::max(1.0, norm_l2(phi));
    if (norm_l2(phi - proj) > tol * scale) {
      throw std::runtime_error("phi_n adaptedness violation");
    }
    phis.push_back(std::move(phi));
  }
  return OperatorSequence(c.ambient, std::move(phis));
}

}  // namespace ncmart
