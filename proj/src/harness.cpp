#include "ncmart/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ncmart/clifford.hpp"
#include "ncmart/rng.hpp"

namespace ncmart {

namespace {

int thread_count() {
  if (const char* env = std::getenv("NCMART_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void parallel_for(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto body = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace {

// ||sum_n eps_n a_n||_p^2 for the sign pattern encoded in mask bit n.
double signed_norm_squared(const OperatorSequence& a, unsigned mask,
                           PExponent p) {
  Element x = a.item(0) * ((mask & 1u) ? -1.0 : 1.0);
  for (int n = 1; n < a.length(); ++n) {
    x += a.item(n) * ((mask >> n & 1u) ? -1.0 : 1.0);
  }
  const double norm = schatten_norm(x, p);
  return norm * norm;
}

}  // namespace

KhintchineAverage khintchine_average(const OperatorSequence& a, PExponent p,
                                     SignMode mode, int samples,
                                     std::uint64_t seed) {
  const int n = a.length();
  KhintchineAverage out;
  if (mode == SignMode::exhaustive) {
    if (n > 16) {
      throw std::invalid_argument(
          "khintchine_average: exhaustive enumeration caps at 16 items");
    }
    const unsigned patterns = 1u << n;
    double total = 0.0;
    for (unsigned mask = 0; mask < patterns; ++mask) {
      total += signed_norm_squared(a, mask, p);
    }
    out.value = std::sqrt(total / patterns);
    out.patterns = static_cast<int>(patterns);
    return out;
  }
  if (samples < 2) {
    throw std::invalid_argument("khintchine_average: need at least 2 samples");
  }
  // Antithetic pairing: each draw is evaluated together with the pattern whose
  // back half is flipped, and the pair mean feeds a running mean/variance.
  Rng rng(seed);
  const unsigned flip = ((1u << n) - 1u) & ~((1u << (n / 2)) - 1u);
  double mean = 0.0;
  double m2 = 0.0;
  for (int s = 0; s < samples; ++s) {
    unsigned mask = 0;
    for (int b = 0; b < n; ++b) {
      if (rng.pm_one() < 0) mask |= 1u << b;
    }
    const double pair_mean = 0.5 * (signed_norm_squared(a, mask, p) +
                                    signed_norm_squared(a, mask ^ flip, p));
    const double delta = pair_mean - mean;
    mean += delta / (s + 1);
    m2 += delta * (pair_mean - mean);
  }
  const double variance = m2 / (samples - 1);
  out.value = std::sqrt(std::max(mean, 0.0));
  // Delta-method propagation of the standard error through the square root.
  const double se_mean = std::sqrt(std::max(variance, 0.0) / samples);
  out.std_error = out.value > 0.0 ? se_mean / (2.0 * out.value) : se_mean;
  out.patterns = samples;
  return out;
}

UnconditionalityResult unconditionality_ratio(const Martingale& m,
                                              PExponent p) {
  const int n = m.steps();
  if (n > 16) {
    throw std::invalid_argument(
        "unconditionality_ratio: enumeration caps at 16 differences");
  }
  const OperatorSequence diffs = m.differences();
  const double denom = martingale_norm(m, p);
  UnconditionalityResult out;
  out.signs.assign(n, 1);
  if (denom == 0.0) {
    out.ratio = 1.0;
    return out;
  }
  const unsigned patterns = 1u << n;
  for (unsigned mask = 0; mask < patterns; ++mask) {
    const double ratio = std::sqrt(signed_norm_squared(diffs, mask, p)) / denom;
    if (ratio > out.ratio) {
      out.ratio = ratio;
      for (int b = 0; b < n; ++b) out.signs[b] = (mask >> b & 1u) ? -1 : 1;
    }
  }
  return out;
}

std::pair<double, double> decoupling_residual(
    const std::vector<std::vector<Element>>& a, PExponent p) {
  const int n = static_cast<int>(a.size());
  if (n < 1 || n > 6) {
    throw std::invalid_argument("decoupling_residual: array side must be 1..6");
  }
  if (p.is_inf()) {
    throw std::invalid_argument(
        "decoupling_residual: averaging p-th powers needs finite p");
  }
  for (const auto& row : a) {
    if (static_cast<int>(row.size()) != n) {
      throw std::invalid_argument("decoupling_residual: array must be square");
    }
  }
  const AlgebraPtr& alg = a[0][0].algebra();
  const unsigned patterns = 1u << n;
  const double pv = p.value();
  double acc_upper = 0.0;
  double acc_full = 0.0;
  for (unsigned em = 0; em < patterns; ++em) {
    for (unsigned fm = 0; fm < patterns; ++fm) {
      Element upper = zero(alg);
      Element full = zero(alg);
      for (int i = 0; i < n; ++i) {
        const double ei = (em >> i & 1u) ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) {
          const double s = ei * ((fm >> j & 1u) ? -1.0 : 1.0);
          full += a[i][j] * s;
          if (i <= j) upper += a[i][j] * s;
        }
      }
      acc_upper += std::pow(schatten_norm(upper, p), pv);
      acc_full += std::pow(schatten_norm(full, p), pv);
    }
  }
  const double scale = static_cast<double>(patterns) * patterns;
  return {std::pow(acc_upper / scale, 1.0 / pv),
          std::pow(acc_full / scale, 1.0 / pv)};
}

ConstantTable constant_pipeline(int k_max) {
  if (k_max < 1 || k_max > 20) {
    throw std::invalid_argument("constant_pipeline: k_max must be 1..20");
  }
  ConstantTable table;
  table.note =
      "assumption: the doubling step is applied symmetrically, "
      "alpha_{2p} = beta_{2p} = (delta_p + sqrt(4 + delta_p^2)) / 2";
  const double inf = std::numeric_limits<double>::infinity();
  const double lg2 = std::log10(2.0);
  auto lin = [&](double lg) { return lg <= 308.0 ? std::pow(10.0, lg) : inf; };
  double beta = 1.0;
  double alpha = 1.0;
  double lg_beta = 0.0;
  double lg_alpha = 0.0;
  bool direct = true;  // linear recursion still inside double range
  for (int k = 1; k <= k_max; ++k) {
    const double p = std::ldexp(1.0, k);
    const double c = std::pow(2.0, 1.0 - 1.0 / p);
    const double lg_gamma = 3.0 * (lg_alpha + lg_beta);
    // log10(c + gamma); for huge gamma the addend is below double resolution.
    const double lg_sum = lg_gamma < 300.0
                              ? std::log10(c + std::pow(10.0, lg_gamma))
                              : lg_gamma;
    const double lg_delta = lg2 + lg_beta + lg_sum;

    ConstantRow row;
    row.p = p;
    row.log10_beta = lg_beta;
    row.log10_alpha = lg_alpha;
    row.log10_gamma = lg_gamma;
    row.log10_delta = lg_delta;
    double gamma_d = inf;
    double delta_d = inf;
    if (direct) {
      row.beta = beta;
      row.alpha = alpha;
      gamma_d = std::pow(alpha * beta, 3.0);
      if (std::isfinite(gamma_d)) delta_d = 2.0 * beta * (c + gamma_d);
    } else {
      row.beta = lin(lg_beta);
      row.alpha = lin(lg_alpha);
    }
    row.gamma = std::isfinite(gamma_d) ? gamma_d : lin(lg_gamma);
    row.delta = std::isfinite(delta_d) ? delta_d : lin(lg_delta);
    table.rows.push_back(row);

    // Advance the seeds; beyond delta ~ 1e150 the closed form collapses to
    // delta + 1/delta with error O(delta^{-3}), below double precision.
    double beta_next = inf;
    if (std::isfinite(delta_d)) {
      beta_next = delta_d > 1e150
                      ? delta_d + 1.0 / delta_d
                      : 0.5 * (delta_d + std::sqrt(4.0 + delta_d * delta_d));
    }
    double lg_next;
    if (lg_delta < 150.0) {
      const double d = std::pow(10.0, lg_delta);
      lg_next = std::log10(0.5 * (d + std::sqrt(4.0 + d * d)));
    } else {
      lg_next = lg_delta;
    }
    if (direct && std::isfinite(beta_next)) {
      beta = beta_next;
      alpha = beta_next;
      lg_next = std::log10(beta_next);
    } else {
      direct = false;
    }
    lg_beta = lg_next;
    lg_alpha = lg_next;
  }
  return table;
}

namespace {

Element diag_element(const AlgebraPtr& alg, const std::vector<double>& vals) {
  std::vector<Matrix> blocks;
  blocks.reserve(vals.size());
  for (double v : vals) blocks.push_back(Matrix::Constant(1, 1, Complex(v)));
  return Element(alg, std::move(blocks));
}

// Predictable +-1 sign transform of the coin martingale on the dyadic
// filtration: terminal value sum_k xi_{k-1} r_k with xi_{k-1} a random sign
// function of the first k - 1 coins.  Every such instance has a constant
// square function, which pins the p = 4 ratio at (3 - 2/depth)^{1/4}.
Element coin_transform(const AlgebraPtr& alg, int depth, Rng& rng) {
  const int atoms = 1 << depth;
  std::vector<std::vector<double>> sign_table(depth);
  for (int k = 1; k <= depth; ++k) {
    sign_table[k - 1].resize(std::size_t{1} << (k - 1));
    for (auto& s : sign_table[k - 1]) s = rng.pm_one();
  }
  std::vector<double> vals(atoms, 0.0);
  for (int a = 0; a < atoms; ++a) {
    for (int k = 1; k <= depth; ++k) {
      const double coin = (a >> (depth - k) & 1) ? -1.0 : 1.0;
      vals[a] += sign_table[k - 1][a >> (depth - k + 1)] * coin;
    }
  }
  return diag_element(alg, vals);
}

struct RatioPair {
  double alpha = 0.0;  // h / lp
  double beta = 0.0;   // lp / h
};

RatioPair evaluate_ratios(const Filtration& f, const Element& terminal,
                          PExponent p, const SumNormConfig& sum_cfg) {
  const Martingale m = from_terminal(f, terminal);
  const double lp = martingale_norm(m, p);
  if (lp < 1e-12) return {};
  const double h = hardy_norm(m, p, sum_cfg).h;
  if (h < 1e-12) return {};
  return {h / lp, lp / h};
}

// Accept-only coordinate search on the terminal element: each iteration
// perturbs one randomly chosen real coordinate by +-eta and keeps the better
// candidate when it improves the selected ratio.
double coordinate_ascent(const Filtration& f, Element x, double start,
                         bool maximize_beta, PExponent p,
                         const BgEstimateConfig& cfg, Rng& rng) {
  double best = start;
  const int blocks = x.block_count();
  for (int it = 0; it < cfg.ascent_iterations; ++it) {
    const int b = blocks == 1 ? 0 : rng.uniform_int(blocks);
    const int d = static_cast<int>(x.block(b).rows());
    const int r = rng.uniform_int(d);
    const int c = rng.uniform_int(d);
    const bool imag = rng.pm_one() < 0;
    const double eta = cfg.ascent_step * std::max(1.0, max_abs_entry(x)) /
                       std::sqrt(static_cast<double>(it + 1));
    bool accepted = false;
    for (const double sign : {1.0, -1.0}) {
      Element cand = x;
      cand.block(b)(r, c) += imag ? Complex(0.0, sign * eta)
                                  : Complex(sign * eta, 0.0);
      const RatioPair rp = evaluate_ratios(f, cand, p, cfg.sum_cfg);
      const double value = maximize_beta ? rp.beta : rp.alpha;
      if (value > best) {
        best = value;
        x = std::move(cand);
        accepted = true;
        break;
      }
    }
    (void)accepted;
  }
  return best;
}

}  // namespace

BgEstimate estimate_bg_constants(PExponent p, const BgEstimateConfig& cfg) {
  if (cfg.instances < 1) {
    throw std::invalid_argument("estimate_bg_constants: need instances >= 1");
  }
  std::vector<Filtration> families;
  std::vector<bool> dyadic_flag;
  if (cfg.use_dyadic) {
    families.push_back(dyadic_filtration(cfg.dyadic_depth));
    dyadic_flag.push_back(true);
  }
  if (cfg.use_tensor) {
    const AlgebraPtr m2 = TraceAlgebra::full_matrix(2);
    families.push_back(tensor_filtration({m2, m2, m2}));
    dyadic_flag.push_back(false);
  }
  if (cfg.use_clifford) {
    families.push_back(clifford_filtration(build_fock(cfg.clifford_modes)));
    dyadic_flag.push_back(false);
  }
  if (families.empty()) {
    throw std::invalid_argument("estimate_bg_constants: no family enabled");
  }

  BgEstimate out;
  out.instances = cfg.instances;
  for (int i = 0; i < cfg.instances; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    Rng rng(seed);
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
      const Filtration& f = families[fi];
      const AlgebraPtr& alg = f.parent();
      Element terminal = zero(alg);
      const int kind = i % 3;
      if (kind == 0) {
        terminal = random_gaussian_element(alg, rng);
      } else if (kind == 1) {
        terminal = hermitian_part(random_gaussian_element(alg, rng));
      } else if (dyadic_flag[fi]) {
        terminal = coin_transform(alg, cfg.dyadic_depth, rng);
      } else {
        // Predictable +-1 scalar transform of a random martingale.
        const Martingale base = from_terminal(f, random_gaussian_element(alg, rng));
        std::vector<Element> xi;
        for (int k = 0; k + 1 < base.steps(); ++k) {
          xi.emplace_back(identity(alg) * rng.pm_one());
        }
        terminal = transform(base, OperatorSequence(alg, std::move(xi)))
                       .terminal();
      }
      const RatioPair sweep = evaluate_ratios(f, terminal, p, cfg.sum_cfg);
      if (sweep.alpha == 0.0 && sweep.beta == 0.0) continue;
      Rng ascent_rng(seed ^ 0x9e3779b97f4a7c15ull);
      const double beta_val = coordinate_ascent(f, terminal, sweep.beta, true,
                                                p, cfg, ascent_rng);
      const double alpha_val = coordinate_ascent(f, terminal, sweep.alpha,
                                                 false, p, cfg, ascent_rng);
      if (beta_val > out.beta_hat) {
        out.beta_hat = beta_val;
        out.beta_seed = seed;
      }
      if (alpha_val > out.alpha_hat) {
        out.alpha_hat = alpha_val;
        out.alpha_seed = seed;
      }
    }
  }
  return out;
}

double stein_ratio(const Filtration& f, const OperatorSequence& a,
                   PExponent p) {
  const double denom = column_norm(a, p);
  if (denom == 0.0) return 0.0;
  return column_norm(stein_project(f, a), p) / denom;
}

Element random_gaussian_element(const AlgebraPtr& alg, Rng& rng) {
  std::vector<Matrix> blocks;
  blocks.reserve(alg->block_count());
  for (int b = 0; b < alg->block_count(); ++b) {
    const int d = alg->block_dims()[b];
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) m(i, j) = rng.complex_gaussian();
    }
    blocks.push_back(std::move(m));
  }
  return Element(alg, std::move(blocks));
}

CampaignResult run_campaign(
    const std::string& inequality, double p, int instances,
    std::uint64_t base_seed,
    const std::function<std::pair<double, double>(int, std::uint64_t)>& fn) {
  if (instances < 1) {
    throw std::invalid_argument("run_campaign: need instances >= 1");
  }
  std::vector<std::pair<double, double>> results(instances);
  parallel_for(instances, [&](int i) {
    results[i] = fn(i, base_seed + static_cast<std::uint64_t>(i));
  });
  CampaignResult out;
  out.inequality = inequality;
  out.p = p;
  out.instances = instances;
  out.worst_residual = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < instances; ++i) {
    if (results[i].first > out.worst_residual) {
      out.worst_residual = results[i].first;
      out.worst_seed = base_seed + static_cast<std::uint64_t>(i);
    }
    out.ratio_envelope = std::max(out.ratio_envelope, results[i].second);
  }
  return out;
}

}  // namespace ncmart
