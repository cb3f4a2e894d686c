#include "tnl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tnl {
namespace {

// two-sided 95% Student-t quantiles, df = 1..30; the normal quantile beyond
const double kT975[30] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                          2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                          2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                          2.060,  2.056, 2.052, 2.048, 2.045, 2.042};

double t_quantile_975(int df) {
  if (df < 1) throw std::invalid_argument("t quantile needs at least one degree of freedom");
  return df <= 30 ? kT975[df - 1] : 1.96;
}

}  // namespace

SampleStats sample_stats(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("sample statistics need at least one sample");
  SampleStats st;
  st.n = static_cast<int>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / st.n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - st.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= st.n;
  m3 /= st.n;
  m4 /= st.n;
  st.var = st.n > 1 ? m2 * st.n / (st.n - 1) : 0.0;
  if (m2 > 0.0) {
    st.skewness = m3 / std::pow(m2, 1.5);
    st.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  st.se_mean = st.n > 0 ? std::sqrt(st.var / st.n) : 0.0;
  return st;
}

SlopeFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("regression inputs differ in length");
  const int n = static_cast<int>(x.size());
  if (n < 3) throw std::invalid_argument("a slope confidence interval needs at least 3 points");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("regression abscissae are all equal");

  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.slope_se = std::sqrt(rss / (n - 2) / sxx);
  const double t = t_quantile_975(n - 2);
  fit.ci_low = fit.slope - t * fit.slope_se;
  fit.ci_high = fit.slope + t * fit.slope_se;
  return fit;
}

SlopeFit ols_loglog(const std::vector<double>& n, const std::vector<double>& y) {
  if (n.size() != y.size()) throw std::invalid_argument("regression inputs differ in length");
  std::vector<double> lx(n.size()), ly(y.size());
  for (size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("log-log regression needs strictly positive data");
    }
    lx[i] = std::log(n[i]);
    ly[i] = std::log(y[i]);
  }
  return ols_fit(lx, ly);
}

double theoretical_exponent(const std::string& kind, double alpha, double gamma_b,
                            double delta_or_beta) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw std::invalid_argument(
        "noise regularity alpha must lie strictly inside (0,1) for a positive decay rate");
  }
  const double one_minus_alpha = 1.0 - alpha;  // = 1 - 2 alpha / d at d = 2
  if (kind == "transport_LLN") {
    const double delta = delta_or_beta;
    if (!(delta > 0.0) || !(delta <= 1.0)) {
      throw std::invalid_argument(
          "the deviation norm index delta must lie in (0,1] for the transport law of large "
          "numbers");
    }
    return 2.0 * delta * one_minus_alpha;
  }
  if (kind == "transport_CLT") {
    if (!(gamma_b >= 0.0) || !(gamma_b < 1.0)) {
      throw std::invalid_argument(
          "the drift integrability exponent gamma = 2/p + 2/q must lie in [0,1)");
    }
    const double cap = std::min(alpha, 1.0 - gamma_b);
    double delta = delta_or_beta;
    if (delta <= 0.0) return 2.0 * cap * one_minus_alpha;
    if (!(delta < cap)) {
      throw std::invalid_argument(
          "the fluctuation norm index delta must stay strictly below min(alpha, 1-gamma)");
    }
    return 2.0 * delta * one_minus_alpha;
  }
  if (kind == "euler_CLT_Hminus1") {
    return alpha * one_minus_alpha;
  }
  if (kind == "euler_CLT") {
    const double beta = delta_or_beta;
    if (!(beta > 0.0) || !(beta < alpha)) {
      throw std::invalid_argument(
          "the interpolation index beta must lie strictly between 0 and alpha");
    }
    return 2.0 * std::min(beta, alpha - beta) * one_minus_alpha;
  }
  if (kind == "euler_LLN") {
    return 2.0 - 2.0 * alpha;
  }
  throw std::invalid_argument(
      "unknown rate kind '" + kind +
      "' (expected transport_LLN, transport_CLT, euler_CLT_Hminus1, euler_CLT, or euler_LLN)");
}

std::string exponent_formula(const std::string& kind) {
  if (kind == "transport_LLN") return "2 delta (1 - alpha)";
  if (kind == "transport_CLT") return "2 min(alpha, 1-gamma) (1 - alpha), or 2 delta (1 - alpha)";
  if (kind == "euler_CLT_Hminus1") return "alpha (1 - alpha)";
  if (kind == "euler_CLT") return "2 min(beta, alpha-beta) (1 - alpha)";
  if (kind == "euler_LLN") return "2 - 2 alpha";
  throw std::invalid_argument("unknown rate kind '" + kind + "'");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

GaussianityReport gaussianity_report(const std::vector<double>& xs) {
  if (xs.size() < 500) {
    throw std::invalid_argument("gaussianity diagnostics need at least 500 samples");
  }
  GaussianityReport rep;
  rep.stats = sample_stats(xs);
  const double sd = std::sqrt(rep.stats.var);
  if (!(sd > 1e-12 * std::max(1.0, std::abs(rep.stats.mean)))) {
    rep.degenerate = true;
    return rep;
  }
  std::vector<double> sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const int n = static_cast<int>(sorted.size());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = normal_cdf((sorted[i] - rep.stats.mean) / sd);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  rep.qq_max_deviation = d;
  return rep;
}

}  // namespace tnl
