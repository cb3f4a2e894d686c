#pragma once

#include <string>
#include <vector>

namespace tnl {

struct SampleStats {
  int n = 0;
  double mean = 0.0;
  double var = 0.0;       // unbiased
  double skewness = 0.0;  // m3 / m2^{3/2}
  double excess_kurtosis = 0.0;
  double se_mean = 0.0;
};
SampleStats sample_stats(const std::vector<double>& xs);

// OLS line fit y = a + b x with a 95% confidence interval on the slope from
// the t distribution with n-2 degrees of freedom.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};
SlopeFit ols_fit(const std::vector<double>& x, const std::vector<double>& y);
// Fit of log(y) against log(n).
SlopeFit ols_loglog(const std::vector<double>& n, const std::vector<double>& y);

// Positive decay exponent a of the squared-error law  E err^2 ~ n^{-a} for
// the admissible parameter combinations; throws std::invalid_argument naming
// the violated constraint otherwise.  Kinds:
//   transport_LLN      a = 2 delta (1 - 2 alpha / d),   0 < delta <= 1
//   transport_CLT      a = 2 [alpha ∧ (1-gamma)] (1 - 2 alpha / d), or with
//                      an explicit delta < alpha ∧ (1-gamma): 2 delta (1-alpha)
//   euler_CLT_Hminus1  a = alpha (1 - alpha)
//   euler_CLT          a = 2 gamma' (1 - alpha), gamma' = beta ∧ (alpha-beta)
//   euler_LLN          a = 2 - 2 alpha   (noise-intensity scaling)
// d = 2 throughout.
double theoretical_exponent(const std::string& kind, double alpha, double gamma_b,
                            double delta_or_beta);
std::string exponent_formula(const std::string& kind);

struct GaussianityReport {
  SampleStats stats;
  double qq_max_deviation = 0.0;  // sup |empirical CDF - fitted normal CDF|
  bool degenerate = false;        // (near-)constant sample
};
// Requires >= 500 samples.
GaussianityReport gaussianity_report(const std::vector<double>& xs);

// Standard normal CDF (used by the QQ/KS deviation).
double normal_cdf(double z);

// One decay-rate experiment: per-cutoff Monte-Carlo statistics of a squared
// error, the fitted log-log slope with CI, and the theoretical target.
struct RatePoint {
  int cutoff = 0;
  double epsilon = 0.0;
  double mean_sq_error = 0.0;   // MC mean of the per-path sup-in-time squared error
  double se = 0.0;              // standard error of that mean
  double mean_lln_sq = 0.0;     // transport runs also carry the LLN error
  double wasserstein_bound = 0.0;  // sqrt(mean_sq_error): coupling bound on d_2
  int paths = 0;
  int aborts = 0;
};
struct RateEstimate {
  std::string kind;
  std::vector<RatePoint> points;
  SlopeFit fit;          // log mean_sq_error vs log n
  SlopeFit fit_eps;      // log mean_sq_error vs log eps_n (auxiliary)
  double theory_exponent = 0.0;  // positive a, expected slope is -a
  std::string formula;
};

}  // namespace tnl
