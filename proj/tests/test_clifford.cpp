#include "doctest.h"

#include <cmath>
#include <vector>

#include "ncmart/clifford.hpp"
#include "ncmart/rng.hpp"
#include "testutil.hpp"

using namespace ncmart;

namespace {

// Random real combination of the 2^d basis words: a generic element of the
// algebra the fields generate (a proper subalgebra of the ambient matrices).
Element random_span_element(const CliffordAlgebra& c, Rng& rng) {
  Element out = zero(c.ambient);
  const int count = 1 << c.d;
  for (int mask = 0; mask < count; ++mask) {
    std::vector<int> modes;
    for (int bit = 0; bit < c.d; ++bit) {
      if (mask & (1 << bit)) modes.push_back(bit + 1);
    }
    out += clifford_word(c, modes) * rng.uniform(-1.0, 1.0);
  }
  return out;
}

double car_residual(const CliffordAlgebra& c) {
  double worst = 0.0;
  for (int i = 0; i < c.d; ++i) {
    for (int j = i; j < c.d; ++j) {
      Element anti = c.fields[i] * c.fields[j] + c.fields[j] * c.fields[i];
      if (i == j) anti = anti - identity(c.ambient) * 2.0;
      worst = std::max(worst, max_abs_entry(anti));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("fock construction basics") {
  SUBCASE("single mode gives the flip matrix") {
    CliffordAlgebra c = build_fock(1);
    Matrix expect(2, 2);
    expect << 0, 1, 1, 0;
    CHECK(max_abs_entry(c.fields[0] - Element(c.ambient, {expect})) == 0.0);
  }
  SUBCASE("fields are hermitian unitaries") {
    CliffordAlgebra c = build_fock(3);
    for (const Element& phi : c.fields) {
      CHECK(max_abs_entry(phi - phi.adjoint()) == 0.0);
      CHECK(max_abs_entry(phi * phi - identity(c.ambient)) == 0.0);
    }
  }
  SUBCASE("canonical anticommutation relations up to eight modes") {
    for (int d : {2, 4, 8}) {
      CHECK(car_residual(build_fock(d)) <= 1e-12);
    }
  }
  SUBCASE("mode budget enforced") {
    CHECK_THROWS_AS(build_fock(9), std::invalid_argument);
    CHECK_THROWS_AS(build_fock(0), std::invalid_argument);
  }
}

TEST_CASE("vacuum expectation is the trace on the generated algebra") {
  CliffordAlgebra c = build_fock(4);
  SUBCASE("words have vanishing expectation except the unit") {
    const int count = 1 << c.d;
    for (int mask = 0; mask < count; ++mask) {
      std::vector<int> modes;
      for (int bit = 0; bit < c.d; ++bit) {
        if (mask & (1 << bit)) modes.push_back(bit + 1);
      }
      const Element w = clifford_word(c, modes);
      const Complex vac = vacuum_expectation(c, w);
      const Complex tr = trace(w);
      CHECK(std::abs(vac - tr) <= 1e-13);
      if (mask == 0) CHECK(std::abs(vac - Complex(1.0)) <= 1e-13);
    }
  }
  SUBCASE("odd word example") {
    CliffordAlgebra c3 = build_fock(3);
    CHECK(std::abs(vacuum_expectation(c3, clifford_word(c3, {1, 2, 3}))) <=
          1e-13);
  }
  SUBCASE("tracial on random span elements") {
    Rng rng(61);
    for (int trial = 0; trial < 20; ++trial) {
      Element x = random_span_element(c, rng);
      Element y = random_span_element(c, rng);
      CHECK(std::abs(vacuum_expectation(c, x * y) -
                     vacuum_expectation(c, y * x)) <= 1e-10);
      CHECK(std::abs(vacuum_expectation(c, x) - trace(x)) <= 1e-11);
    }
  }
}

TEST_CASE("field linear combinations") {
  CliffordAlgebra c = build_fock(2);
  SUBCASE("coordinate vector returns the generator") {
    CHECK(max_abs_entry(field(c, {1.0, 0.0}) - c.fields[0]) == 0.0);
  }
  SUBCASE("unit vector squares to one") {
    Element phi = field(c, {0.6, 0.8});
    CHECK(max_abs_entry(phi * phi - identity(c.ambient)) <= 1e-14);
  }
  SUBCASE("anticommutator reproduces the inner product") {
    Rng rng(62);
    CliffordAlgebra c4 = build_fock(4);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> u(4), v(4);
      double dot = 0.0;
      for (int i = 0; i < 4; ++i) {
        u[i] = rng.uniform(-1.0, 1.0);
        v[i] = rng.uniform(-1.0, 1.0);
        dot += u[i] * v[i];
      }
      const Element fu = field(c4, u);
      const Element fv = field(c4, v);
      const Element anti = fu * fv + fv * fu;
      CHECK(max_abs_entry(anti - identity(c4.ambient) * (2.0 * dot)) <= 1e-12);
    }
  }
  SUBCASE("perpendicular vectors anticommute") {
    const Element a = field(c, {1.0, 0.0});
    const Element b = field(c, {0.0, -2.0});
    CHECK(max_abs_entry(a * b + b * a) == 0.0);
  }
  SUBCASE("length mismatch rejected") {
    CHECK_THROWS_AS(field(c, {1.0}), std::invalid_argument);
  }
}

TEST_CASE("grading automorphism") {
  CliffordAlgebra c = build_fock(3);
  Rng rng(63);
  SUBCASE("single fields are odd, double products even") {
    auto [even1, odd1] = grading(c, c.fields[0]);
    CHECK(max_abs_entry(even1) == 0.0);
    CHECK(max_abs_entry(odd1 - c.fields[0]) == 0.0);
    const Element pair12 = c.fields[0] * c.fields[1];
    auto [even2, odd2] = grading(c, pair12);
    CHECK(max_abs_entry(odd2) == 0.0);
    CHECK(max_abs_entry(even2 - pair12) == 0.0);
  }
  SUBCASE("involutive, trace preserving, L2 orthogonal") {
    for (int trial = 0; trial < 10; ++trial) {
      Element x = testutil::random_element(c.ambient, rng);
      auto [even, odd] = grading(c, x);
      CHECK(max_abs_entry(even + odd - x) <= 1e-14);
      auto [ee, eo] = grading(c, even);
      CHECK(max_abs_entry(eo) <= 1e-14);
      const Element g = even - odd;
      CHECK(std::abs(trace(g) - trace(x)) <= 1e-13);
      CHECK(std::abs(inner(odd, even)) <= 1e-13);
    }
  }
  SUBCASE("norm bounds from the isometric grading") {
    const double inf = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 10; ++trial) {
      Element x = testutil::random_element(c.ambient, rng);
      auto [even, odd] = grading(c, x);
      for (double p : {1.0, 2.0, 4.0, inf}) {
        const double nx = schatten_norm(x, p);
        const double ne = schatten_norm(even, p);
        const double no = schatten_norm(odd, p);
        CHECK(std::max(ne, no) <= nx + 1e-10);
        CHECK(nx <= ne + no + 1e-10);
      }
    }
  }
  SUBCASE("odd parts below mode n anticommute with the nth field") {
    CliffordAlgebra c4 = build_fock(4);
    Filtration f = clifford_filtration(c4);
    for (int trial = 0; trial < 5; ++trial) {
      Element x = cond_exp(f.level(3), random_span_element(c4, rng));
      auto [even, odd] = grading(c4, x);
      const Element& phi4 = c4.fields[3];
      CHECK(max_abs_entry(odd * phi4 + phi4 * odd) <= 1e-10);
      CHECK(max_abs_entry(even * phi4 - phi4 * even) <= 1e-10);
    }
  }
}

TEST_CASE("clifford filtration structure") {
  CliffordAlgebra c = build_fock(3);
  Filtration f = clifford_filtration(c);
  CHECK(f.depth() == 4);
  CHECK_FALSE(f.terminal_is_full());
  CHECK(f.level(0).dim() == 1);
  CHECK(f.level(1).dim() == 2);
  CHECK(f.level(2).dim() == 4);
  CHECK(f.level(3).dim() == 8);
  for (int n = 0; n < f.depth(); ++n) f.level(n).validate(1e-10);
  f.validate(1e-10);
  SUBCASE("level one spans the unit and the first field") {
    Rng rng(64);
    Element x = testutil::random_element(c.ambient, rng);
    const Element e1 = cond_exp(f.level(1), x);
    const Element expect = identity(c.ambient) * trace(x) +
                           c.fields[0] * trace(c.fields[0].adjoint() * x);
    CHECK(max_abs_entry(e1 - expect) <= 1e-12);
  }
}

TEST_CASE("clifford martingales and the phi correspondence") {
  CliffordAlgebra c = build_fock(4);
  Filtration f = clifford_filtration(c);
  Rng rng(65);
  SUBCASE("single field gives unit phi") {
    Martingale m = from_terminal(f, c.fields[0]);
    OperatorSequence phi = extract_phi(c, m);
    CHECK(max_abs_entry(phi.item(0) - identity(c.ambient)) <= 1e-13);
  }
  SUBCASE("scaled later field") {
    Martingale m = from_terminal(f, c.fields[2] * 2.0);
    OperatorSequence phi = extract_phi(c, m);
    CHECK(max_abs_entry(phi.item(0)) <= 1e-13);  // dx_1 = 0
    CHECK(max_abs_entry(phi.item(1)) <= 1e-13);  // dx_2 = 0
    CHECK(max_abs_entry(phi.item(2) - identity(c.ambient) * 2.0) <= 1e-13);
  }
  SUBCASE("row norms agree exactly and column norms within factor two") {
    const double inf = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 10; ++trial) {
      Martingale m = from_terminal(f, random_span_element(c, rng));
      OperatorSequence phi = extract_phi(c, m);
      std::vector<Element> dpast;
      for (int n = 1; n < m.steps(); ++n) dpast.push_back(m.difference(n));
      OperatorSequence dx(c.ambient, std::move(dpast));
      CHECK(max_abs_entry(row_gram(dx) - row_gram(phi)) <= 1e-12);
      for (double p : {1.5, 2.0, 3.0, inf}) {
        CHECK(row_norm(dx, p) ==
              doctest::Approx(row_norm(phi, p)).epsilon(1e-10));
        const double cd = column_norm(dx, p);
        const double cp = column_norm(phi, p);
        CHECK(cd <= 2.0 * cp + 1e-9);
        CHECK(cd >= 0.5 * cp - 1e-9);
      }
    }
  }
  SUBCASE("BG_2 equality on clifford martingales") {
    for (int trial = 0; trial < 10; ++trial) {
      Martingale m = from_terminal(f, random_span_element(c, rng));
      double sum = 0.0;
      for (int n = 0; n < m.steps(); ++n) {
        sum += std::pow(norm_l2(m.difference(n)), 2);
      }
      const double lhs = martingale_norm(m, 2.0);
      CHECK(lhs * lhs == doctest::Approx(sum).epsilon(1e-10));
    }
  }
}

TEST_CASE("jordan-wigner representation") {
  SUBCASE("one mode coincides with fock") {
    CliffordAlgebra jw = jordan_wigner(1);
    CliffordAlgebra fk = build_fock(1);
    CHECK(max_abs_entry(jw.fields[0] -
                        Element(jw.ambient, {fk.fields[0].block(0)})) == 0.0);
  }
  SUBCASE("relations hold") {
    for (int d : {2, 4}) {
      CHECK(car_residual(jordan_wigner(d)) <= 1e-13);
    }
  }
  SUBCASE("matrices differ from fock while moments agree") {
    CliffordAlgebra jw = jordan_wigner(4);
    CliffordAlgebra fk = build_fock(4);
    double entry_gap = 0.0;
    for (int i = 0; i < 4; ++i) {
      entry_gap = std::max(entry_gap,
                           (jw.fields[i].block(0) - fk.fields[i].block(0))
                               .cwiseAbs()
                               .maxCoeff());
    }
    CHECK(entry_gap > 0.5);  // genuinely different matrices
    // All moments of word length <= 4, repeats allowed.
    std::vector<std::vector<int>> tuples{{}};
    for (int len = 1; len <= 4; ++len) {
      std::vector<std::vector<int>> next;
      for (const auto& t : tuples) {
        if (static_cast<int>(t.size()) != len - 1) continue;
        for (int m = 1; m <= 4; ++m) {
          auto ext = t;
          ext.push_back(m);
          next.push_back(ext);
        }
      }
      for (auto& t : next) tuples.push_back(std::move(t));
    }
    for (const auto& t : tuples) {
      const Complex a = trace(clifford_word(jw, t));
      const Complex b = trace(clifford_word(fk, t));
      CHECK(std::abs(a - b) <= 1e-12);
    }
  }
}
