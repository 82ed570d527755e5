#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ncmart/martingale.hpp"
#include "ncmart/pexponent.hpp"
#include "ncmart/rng.hpp"
#include "ncmart/sequences.hpp"

namespace ncmart {

// Deterministic parallel loop: fn(i) runs once for every i in [0, count) and
// must write only to slot i of any shared output.  Thread count comes from the
// NCMART_THREADS environment variable (hardware concurrency when unset).
void parallel_for(int count, const std::function<void(int)>& fn);

enum class SignMode { exhaustive, sampled };

struct KhintchineAverage {
  double value = 0.0;
  double std_error = 0.0;  // zero in exhaustive mode
  int patterns = 0;        // sign patterns enumerated, or sample pairs drawn
};

// (average over sign patterns of ||sum_n eps_n a_n||_p^2)^{1/2}.  Exhaustive
// enumeration covers all 2^N patterns and requires N <= 16; sampled mode draws
// antithetic pairs (eps, eps with the back half flipped) and reports the
// standard error of the pair means.
KhintchineAverage khintchine_average(const OperatorSequence& a, PExponent p,
                                     SignMode mode = SignMode::exhaustive,
                                     int samples = 2048,
                                     std::uint64_t seed = 8200);

struct UnconditionalityResult {
  double ratio = 0.0;
  std::vector<int> signs;  // +-1 pattern attaining the maximum
};

// max over eps in {+-1}^N of ||sum_n eps_n dx_n||_p / ||x_N||_p, enumerated
// exhaustively over the N = steps() differences (N <= 16 enforced).
UnconditionalityResult unconditionality_ratio(const Martingale& m, PExponent p);

// Decoupling comparison for a square array (a_ij), i, j < n <= 6, at finite p:
//   first  = (mean over (eps, eps') of ||sum_{i<=j} eps_i eps'_j a_ij||_p^p)^{1/p}
//   second = same with the sum over all (i, j).
// Both sign vectors range over {+-1}^n independently.
std::pair<double, double> decoupling_residual(
    const std::vector<std::vector<Element>>& a, PExponent p);

struct ConstantRow {
  double p = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  // log10 mirrors stay finite after the linear columns overflow to inf.
  double log10_beta = 0.0;
  double log10_alpha = 0.0;
  double log10_gamma = 0.0;
  double log10_delta = 0.0;
};

struct ConstantTable {
  std::vector<ConstantRow> rows;  // row k holds p = 2^(k+1)
  std::string note;               // records the symmetric-alpha assumption
};

// Constant recursion seeded at beta_2 = alpha_2 = 1:
//   gamma_p    = (alpha_p * beta_p)^3
//   delta_p    = 2 * beta_p * (2^(1 - 1/p) + gamma_p)
//   beta_{2p}  = (delta_p + sqrt(4 + delta_p^2)) / 2
//   alpha_{2p} = beta_{2p}   (symmetric doubling assumption, see note)
// Rows are produced for k_max <= 20 doublings.  Once values leave double
// range the linear columns report inf while the log10 columns stay finite;
// at that magnitude the log-space recursion is exact to double precision
// because the dropped corrections are O(1/delta^2) < 1e-300.
ConstantTable constant_pipeline(int k_max);

struct BgEstimateConfig {
  int instances = 120;            // random instances per enabled family
  std::uint64_t seed = 5000;      // instance i uses stream seed + i
  int ascent_iterations = 24;     // coordinate-wise polish of the best instance
  double ascent_step = 0.25;
  bool use_dyadic = true;
  bool use_tensor = true;
  bool use_clifford = true;
  int dyadic_depth = 3;
  int clifford_modes = 4;
  SumNormConfig sum_cfg{};        // forwarded to Hardy norms when p < 2
};

struct BgEstimate {
  double alpha_hat = 0.0;  // running max of ||x||_{H^p} / ||x||_p
  double beta_hat = 0.0;   // running max of ||x||_p / ||x||_{H^p}
  std::uint64_t alpha_seed = 0;
  std::uint64_t beta_seed = 0;
  int instances = 0;
};

// Empirical one-sided constants over random martingales drawn from the dyadic,
// tensor (three M_2 factors), and Clifford families.  The dyadic draw rotates
// in predictable +-1 transforms of the coin martingale, so beta_hat at p = 4
// dominates the scalar transform ratio.  A short coordinate-wise ascent on the
// best terminal element finishes each estimate; estimates grow monotonically
// with the instance budget for a fixed seed.
BgEstimate estimate_bg_constants(PExponent p, const BgEstimateConfig& cfg = {});

// ||(E_n a_n)_n||_{L^p(l^2_C)} / ||a||_{L^p(l^2_C)} for the Stein projection;
// returns 0 when the input column norm vanishes.
double stein_ratio(const Filtration& f, const OperatorSequence& a, PExponent p);

// Entrywise complex gaussian element; the shared instance generator for
// randomized campaigns.
Element random_gaussian_element(const AlgebraPtr& alg, Rng& rng);

struct CampaignResult {
  std::string inequality;
  double p = 0.0;
  int instances = 0;
  double worst_residual = 0.0;
  std::uint64_t worst_seed = 0;
  double ratio_envelope = 0.0;  // largest lhs/rhs ratio observed
};

// Runs fn(i) -> (residual, ratio) for i in [0, instances) in parallel and
// folds the results: worst residual with its seed, and the ratio envelope.
CampaignResult run_campaign(
    const std::string& inequality, double p, int instances,
    std::uint64_t base_seed,
    const std::function<std::pair<double, double>(int, std::uint64_t)>& fn);

}  // namespace ncmart
