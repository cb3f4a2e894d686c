#include "tnl/field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tnl/rng.hpp"

namespace tnl {

void hermitian_symmetrize(SpectralField& f) {
  const int n = f.grid.n;
  for (int i = 0; i < n; ++i) {
    const int mi = f.grid.wrap(-f.grid.mode_of(i));
    for (int j = 0; j < n; ++j) {
      const int mj = f.grid.wrap(-f.grid.mode_of(j));
      const int a = i * n + j;
      const int b = mi * n + mj;
      if (a == b) {
        f.c[a] = cplx(f.c[a].real(), 0.0);
      } else if (a < b) {
        const cplx avg = 0.5 * (f.c[a] + std::conj(f.c[b]));
        f.c[a] = avg;
        f.c[b] = std::conj(avg);
      }
    }
  }
}

double hermitian_residue(const SpectralField& f) {
  const int n = f.grid.n;
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    const int mi = f.grid.wrap(-f.grid.mode_of(i));
    for (int j = 0; j < n; ++j) {
      const int mj = f.grid.wrap(-f.grid.mode_of(j));
      const cplx d = f.c[i * n + j] - std::conj(f.c[mi * n + mj]);
      worst = std::max(worst, std::abs(d));
      scale = std::max(scale, std::abs(f.c[i * n + j]));
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

void dealias(SpectralField& f) {
  const int n = f.grid.n;
  const int kmax = f.grid.kmax;
  for (int i = 0; i < n; ++i) {
    const int k1 = f.grid.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const int k2 = f.grid.mode_of(j);
      if (std::abs(k1) > kmax || std::abs(k2) > kmax) f.c[i * n + j] = cplx(0.0, 0.0);
    }
  }
}

double max_divergence(const VectorField& v) {
  const TorusGrid& g = v.grid();
  const double two_pi = 2.0 * std::numbers::pi;
  double worst = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < g.n; ++j) {
      const int k2 = g.mode_of(j);
      const cplx d = static_cast<double>(k1) * v.x.c[i * g.n + j] +
                     static_cast<double>(k2) * v.y.c[i * g.n + j];
      worst = std::max(worst, two_pi * std::abs(d));
    }
  }
  return worst;
}

SpectralField random_band_field(const TorusGrid& g, int klo, int khi, unsigned long long seed) {
  if (klo < 1 || khi < klo || khi > g.kmax) {
    throw std::invalid_argument("random band must satisfy 1 <= klo <= khi <= kmax");
  }
  SpectralField f(g);
  uint64_t counter = 0;
  double sumsq = 0.0;
  for (int k1 = 0; k1 <= khi; ++k1) {
    for (int k2 = (k1 == 0 ? 1 : -khi); k2 <= khi; ++k2) {
      const double r2 = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
      ++counter;  // advance the stream even for skipped modes: stable draws
      if (r2 < static_cast<double>(klo) * klo || r2 > static_cast<double>(khi) * khi) continue;
      const GaussPair z = gauss_at(seed, counter);
      const cplx a(z.z0, z.z1);
      f.at(k1, k2) = a;
      f.at(-k1, -k2) = std::conj(a);
      sumsq += 2.0 * std::norm(a);
    }
  }
  if (sumsq == 0.0) throw std::invalid_argument("random band contains no lattice modes");
  const double scale = 1.0 / std::sqrt(sumsq);
  for (auto& c : f.c) c *= scale;
  return f;
}

}  // namespace tnl
