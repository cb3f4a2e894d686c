#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "tnl/field.hpp"
#include "tnl/noise.hpp"
#include "tnl/ops.hpp"
#include "tnl/rng.hpp"

using namespace tnl;

namespace {

double brute_epsilon_lowpass(double alpha, int n) {
  double sum = 0.0;
  for (int k1 = -n; k1 <= n; ++k1) {
    for (int k2 = -n; k2 <= n; ++k2) {
      const double r2 = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
      if (r2 == 0.0 || r2 > static_cast<double>(n) * n) continue;
      sum += std::pow(r2, -alpha);
    }
  }
  return 2.0 / sum;
}

}  // namespace

TEST_CASE("intensity normalization matches brute lattice sums") {
  CHECK(std::abs(build_noise_model(0.5, 1).epsilon - 0.5) <= 1e-14);
  CHECK(std::abs(build_noise_model(1.0, 2).epsilon - 2.0 / 7.0) <= 1e-14);
  // Any alpha gives 1/2 at cutoff 1: four unit modes of weight 1.
  for (double alpha : {0.25, 0.6, 1.0}) {
    CHECK(std::abs(build_noise_model(alpha, 1).epsilon - 0.5) <= 1e-14);
  }
  for (double alpha : {0.25, 0.75}) {
    for (int n : {3, 7}) {
      const NoiseModel m = build_noise_model(alpha, n);
      CHECK(m.epsilon == doctest::Approx(brute_epsilon_lowpass(alpha, n)).epsilon(1e-14));
    }
  }
}

TEST_CASE("intensity times the weight sum is exactly the dimensional constant") {
  for (double alpha : {0.25, 0.5, 1.0}) {
    for (int n : {1, 4, 16}) {
      for (NoiseWindow w : {NoiseWindow::lowpass, NoiseWindow::band}) {
        const NoiseModel m = build_noise_model(alpha, n, w);
        double sum = 0.0;
        for (const auto& mode : m.modes) sum += mode.weight * mode.weight;
        CHECK(m.epsilon * sum == doctest::Approx(2.0).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("model construction rejects out-of-range parameters") {
  CHECK_THROWS(build_noise_model(0.0, 4));
  CHECK_THROWS(build_noise_model(-0.5, 4));
  CHECK_THROWS(build_noise_model(1.5, 4));
  CHECK_THROWS(build_noise_model(0.5, 0));
}

TEST_CASE("mode geometry: unit directions orthogonal to k, shared by the pair") {
  const NoiseModel m = build_noise_model(0.5, 6);
  std::map<std::pair<int, int>, std::pair<double, double>> dir;
  for (const auto& mode : m.modes) {
    // The stored components come from divide-then-multiply, so a·k carries a
    // one-ulp rounding residue; the sampled field's divergence is still exact.
    CHECK(std::abs(mode.a1 * mode.k1 + mode.a2 * mode.k2) < 1e-14);
    CHECK(std::abs(std::hypot(mode.a1, mode.a2) - 1.0) < 1e-14);
    const double r2 = static_cast<double>(mode.k1) * mode.k1 +
                      static_cast<double>(mode.k2) * mode.k2;
    CHECK(mode.weight == doctest::Approx(std::pow(r2, -0.25)).epsilon(1e-14));
    dir[{mode.k1, mode.k2}] = {mode.a1, mode.a2};
  }
  for (const auto& [k, a] : dir) {
    const auto it = dir.find({-k.first, -k.second});
    REQUIRE(it != dir.end());
    CHECK(a == it->second);  // a_{-k} = a_k makes the field real
  }
}

TEST_CASE("window selection: lowpass ball vs band annulus") {
  const int n = 4;
  const NoiseModel low = build_noise_model(0.5, n, NoiseWindow::lowpass);
  for (const auto& mode : low.modes) {
    const double r2 = static_cast<double>(mode.k1) * mode.k1 +
                      static_cast<double>(mode.k2) * mode.k2;
    CHECK(r2 >= 1.0);
    CHECK(r2 <= static_cast<double>(n) * n);
  }
  const NoiseModel band = build_noise_model(0.5, n, NoiseWindow::band);
  CHECK(band.max_mode() == 2 * n);
  for (const auto& mode : band.modes) {
    const double r2 = static_cast<double>(mode.k1) * mode.k1 +
                      static_cast<double>(mode.k2) * mode.k2;
    CHECK(r2 >= static_cast<double>(n) * n);
    CHECK(r2 <= 4.0 * n * n);
  }
}

TEST_CASE("intensity scales like the cutoff power law") {
  for (double alpha : {0.25, 0.5, 0.75}) {
    double lo = 1e300, hi = 0.0;
    for (int n : {8, 16, 32, 64}) {
      const double ratio =
          build_noise_model(alpha, n).epsilon / std::pow(n, 2.0 * alpha - 2.0);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    CHECK(hi / lo < 2.0);
  }
}

TEST_CASE("sampled increment: support, reality, divergence") {
  const TorusGrid g = make_grid(32);
  const NoiseModel m1 = build_noise_model(0.5, 1);
  BrownianDriver drv{9001};
  const VectorField dw = sample_noise_increment_at(m1, g, drv, 0, 1e-2);

  // Cutoff 1: only the four unit-shell modes carry coefficients.
  int nonzero = 0;
  for (int k1 = -g.n / 2; k1 < g.n / 2; ++k1) {
    for (int k2 = -g.n / 2; k2 < g.n / 2; ++k2) {
      const double mag = std::abs(dw.x.at(k1, k2)) + std::abs(dw.y.at(k1, k2));
      if (std::abs(k1) + std::abs(k2) == 1) {
        if (mag > 0.0) ++nonzero;
      } else {
        REQUIRE(mag == 0.0);
      }
    }
  }
  CHECK(nonzero == 4);
  CHECK(max_divergence(dw) == 0.0);
  CHECK(hermitian_residue(dw.x) == 0.0);
  CHECK(hermitian_residue(dw.y) == 0.0);
  double resid = 0.0;
  to_physical(dw.x, &resid);
  CHECK(resid < 1e-10);
  CHECK(std::abs(dw.x.mean()) == 0.0);
  CHECK_THROWS(sample_noise_increment_at(m1, g, drv, 1, 0.0));
}

TEST_CASE("sampled increments are pure functions of seed, mode and step") {
  const TorusGrid g = make_grid(16);
  const NoiseModel m = build_noise_model(0.75, 3);
  BrownianDriver a{512}, b{512}, c{513};
  const VectorField va = sample_noise_increment_at(m, g, a, 7, 1e-3);
  const VectorField vb = sample_noise_increment_at(m, g, b, 7, 1e-3);
  const VectorField vc = sample_noise_increment_at(m, g, c, 7, 1e-3);
  const VectorField vd = sample_noise_increment_at(m, g, a, 8, 1e-3);
  bool same = true, diff_seed = false, diff_step = false;
  for (size_t q = 0; q < va.x.c.size(); ++q) {
    same &= va.x.c[q] == vb.x.c[q] && va.y.c[q] == vb.y.c[q];
    diff_seed |= va.x.c[q] != vc.x.c[q];
    diff_step |= va.x.c[q] != vd.x.c[q];
  }
  CHECK(same);
  CHECK(diff_seed);
  CHECK(diff_step);
}

TEST_CASE("per-mode coefficient variance follows the radial weight") {
  const TorusGrid g = make_grid(16);
  const double alpha = 0.5, dt = 1.0;
  const NoiseModel m = build_noise_model(alpha, 2);
  const int samples = 10000;
  // Mode (1,1): weight^2 = |k|^{-2 alpha} = 1/2, direction a = (-1,1)/sqrt(2).
  double vxr = 0.0, vxi = 0.0, vyr = 0.0;
  for (int s = 0; s < samples; ++s) {
    BrownianDriver drv{derive_seed(31337, static_cast<uint64_t>(s))};
    const VectorField dw = sample_noise_increment_at(m, g, drv, 0, dt);
    const cplx cx = dw.x.at(1, 1), cy = dw.y.at(1, 1);
    vxr += cx.real() * cx.real();
    vxi += cx.imag() * cx.imag();
    vyr += cy.real() * cy.real();
  }
  vxr /= samples;
  vxi /= samples;
  vyr /= samples;
  const double w2 = std::pow(2.0, -alpha);  // weight^2 = (|k|^2)^{-alpha}, |k|^2 = 2
  const double expected = w2 * 0.5 * 0.5;  // a-component^2 = 1/2, half per real part
  CHECK(std::abs(vxr - expected) / expected < 0.05);
  CHECK(std::abs(vxi - expected) / expected < 0.05);
  CHECK(std::abs(vyr - expected) / expected < 0.05);
}

TEST_CASE("one driver couples nested cutoffs on the shared modes") {
  const TorusGrid g = make_grid(32);
  const NoiseModel small = build_noise_model(0.5, 4);
  const NoiseModel large = build_noise_model(0.5, 8);
  BrownianDriver d1{777}, d2{777};
  const VectorField ws = sample_noise_increment_at(small, g, d1, 3, 1e-3);
  const VectorField wl = sample_noise_increment_at(large, g, d2, 3, 1e-3);
  for (int k1 = -g.n / 2; k1 < g.n / 2; ++k1) {
    for (int k2 = -g.n / 2; k2 < g.n / 2; ++k2) {
      const double r2 = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
      const cplx dx = wl.x.at(k1, k2) - ws.x.at(k1, k2);
      const cplx dy = wl.y.at(k1, k2) - ws.y.at(k1, k2);
      if (r2 <= 16.0) {
        // Shared ball: identical coefficients, so the difference vanishes.
        REQUIRE(dx == cplx(0.0, 0.0));
        REQUIRE(dy == cplx(0.0, 0.0));
      } else if (r2 > 64.0) {
        REQUIRE(std::abs(dx) == 0.0);
        REQUIRE(std::abs(dy) == 0.0);
      }
    }
  }
}

TEST_CASE("band increments at doubled cutoffs live on disjoint shells") {
  const TorusGrid g = make_grid(64);
  const NoiseModel b4 = build_noise_model(0.5, 4, NoiseWindow::band);
  const NoiseModel b8 = build_noise_model(0.5, 8, NoiseWindow::band);
  BrownianDriver d1{99}, d2{99};
  const VectorField w4 = sample_noise_increment_at(b4, g, d1, 0, 1e-3);
  const VectorField w8 = sample_noise_increment_at(b8, g, d2, 0, 1e-3);
  // Supports are 4 <= |k| <= 8 and 8 <= |k| <= 16: only |k| = 8 can overlap.
  for (int k1 = -g.n / 2; k1 < g.n / 2; ++k1) {
    for (int k2 = -g.n / 2; k2 < g.n / 2; ++k2) {
      const double m4 = std::abs(w4.x.at(k1, k2)) + std::abs(w4.y.at(k1, k2));
      const double m8 = std::abs(w8.x.at(k1, k2)) + std::abs(w8.y.at(k1, k2));
      if (m4 > 0.0 && m8 > 0.0) {
        REQUIRE(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2 == 64.0);
      }
    }
  }
}

TEST_CASE("predicted integral variance: zero field, gradient field, MC match") {
  const TorusGrid g = make_grid(32);
  const NoiseModel m = build_noise_model(0.5, 3);
  const std::vector<VectorField> zeros(10, VectorField(g));
  CHECK(ito_integral_variance(m, zeros, 0.1) == 0.0);

  const std::vector<VectorField> grads(10, gradient(random_band_field(g, 1, 5, 3)));
  CHECK(ito_integral_variance(m, grads, 0.1) < 1e-20);

  // Constant-in-time single-mode divergence-free field over [0,1].  For
  // k = (1,0) the divergence-free direction is e_y, which is also the noise
  // direction a_k, so the pairing is nonzero.
  VectorField f(g);
  f.y.at(1, 0) = {0.0, 0.4};
  f.y.at(-1, 0) = {0.0, -0.4};
  f.divergence_free = true;
  const int steps = 20;
  const double dt = 1.0 / steps;
  const std::vector<VectorField> fseq(steps, f);
  const double predicted = ito_integral_variance(m, fseq, dt);
  double s1 = 0.0, s2 = 0.0;
  const int paths = 10000;
  for (int p = 0; p < paths; ++p) {
    BrownianDriver drv{derive_seed(2718, static_cast<uint64_t>(p))};
    double I = 0.0;
    for (int step = 0; step < steps; ++step) {
      const VectorField dw = sample_noise_increment_at(m, g, drv, step, dt);
      I += l2_inner(f.x, dw.x) + l2_inner(f.y, dw.y);
    }
    s1 += I;
    s2 += I * I;
  }
  const double var = s2 / paths - (s1 / paths) * (s1 / paths);
  CHECK(std::abs(var - predicted) / predicted < 0.05);
}

TEST_CASE("covariance operator: eigenvalue, kernel, symmetry, positivity") {
  const TorusGrid g = make_grid(32);
  // Divergence-free single mode with |k|^2 = 4 at alpha = 1: scaled by 1/4.
  VectorField f(g);
  f.x.at(0, 2) = {0.3, -0.2};
  f.x.at(0, -2) = {0.3, 0.2};
  f.divergence_free = true;
  const VectorField qf = covariance_apply(f, 1.0);
  CHECK(std::abs(qf.x.at(0, 2) - 0.25 * f.x.at(0, 2)) < 1e-15);
  CHECK(std::abs(qf.y.at(0, 2)) == 0.0);

  const VectorField grad = gradient(random_band_field(g, 1, 6, 21));
  const VectorField qg = covariance_apply(grad, 0.5);
  CHECK(sobolev_norm(qg.x, 0.0) + sobolev_norm(qg.y, 0.0) < 1e-14);

  for (int pair = 0; pair < 50; ++pair) {
    VectorField u(g), w(g);
    u.x = random_band_field(g, 1, 8, derive_seed(41, 4 * pair));
    u.y = random_band_field(g, 1, 8, derive_seed(41, 4 * pair + 1));
    w.x = random_band_field(g, 1, 8, derive_seed(41, 4 * pair + 2));
    w.y = random_band_field(g, 1, 8, derive_seed(41, 4 * pair + 3));
    const double lhs = l2_inner(covariance_apply(u, 0.5), w);
    const double rhs = l2_inner(u, covariance_apply(w, 0.5));
    REQUIRE(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    REQUIRE(l2_inner(covariance_apply(u, 0.5), u) >= 0.0);
  }

  VectorField with_mean(g);
  with_mean.x.at(0, 0) = {1.0, 0.0};
  CHECK_THROWS(covariance_apply(with_mean, 0.5));
}
