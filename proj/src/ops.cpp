#include "tnl/ops.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tnl {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

std::vector<cplx>& tbuf(int which, size_t size) {
  thread_local std::vector<cplx> bufs[8];
  auto& b = bufs[which];
  if (b.size() < size) b.resize(size);
  return b;
}

double mode_r2(int k1, int k2) {
  return static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
}

bool has_mean(const SpectralField& f) {
  double scale = 0.0;
  for (const auto& c : f.c) scale = std::max(scale, std::abs(c));
  return std::abs(f.c[0]) > 1e-12 * std::max(1.0, scale);
}

// Spectral gradient coefficients of f written into gx, gy (Nyquist rows are
// zeroed: their odd derivative has no Hermitian representative).
void gradient_coeffs(const SpectralField& f, cplx* gx, cplx* gy) {
  const TorusGrid& g = f.grid;
  const int n = g.n;
  for (int i = 0; i < n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const int k2 = g.mode_of(j);
      const cplx v = f.c[i * n + j];
      if (std::abs(k1) * 2 == n || std::abs(k2) * 2 == n) {
        gx[i * n + j] = cplx(0.0, 0.0);
        gy[i * n + j] = cplx(0.0, 0.0);
      } else {
        const cplx iv(-v.imag() * kTwoPi, v.real() * kTwoPi);  // 2πi v
        gx[i * n + j] = static_cast<double>(k1) * iv;
        gy[i * n + j] = static_cast<double>(k2) * iv;
      }
    }
  }
}

}  // namespace

double sobolev_norm(const SpectralField& f, double s) {
  const TorusGrid& g = f.grid;
  double sum = std::norm(f.c[0]);  // mean mode carries weight 1
  for (int i = 0; i < g.n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < g.n; ++j) {
      const int k2 = g.mode_of(j);
      if (k1 == 0 && k2 == 0) continue;
      const double w = (s == 0.0) ? 1.0 : std::pow(mode_r2(k1, k2), s);
      sum += w * std::norm(f.c[i * g.n + j]);
    }
  }
  return std::sqrt(sum);
}

double sobolev_norm(const VectorField& v, double s) {
  const double a = sobolev_norm(v.x, s);
  const double b = sobolev_norm(v.y, s);
  return std::sqrt(a * a + b * b);
}

double l2_inner(const SpectralField& f, const SpectralField& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("inner product across different grids");
  double sum = 0.0;
  for (size_t i = 0; i < f.c.size(); ++i) {
    sum += f.c[i].real() * g.c[i].real() + f.c[i].imag() * g.c[i].imag();
  }
  return sum;
}

double l2_inner(const VectorField& f, const VectorField& g) {
  return l2_inner(f.x, g.x) + l2_inner(f.y, g.y);
}

VectorField leray_project(const VectorField& v) {
  const TorusGrid& g = v.grid();
  VectorField out(g);
  const int n = g.n;
  for (int i = 0; i < n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const int k2 = g.mode_of(j);
      const int idx = i * n + j;
      if (k1 == 0 && k2 == 0) {  // mean velocity passes through
        out.x.c[idx] = v.x.c[idx];
        out.y.c[idx] = v.y.c[idx];
        continue;
      }
      const double r2 = mode_r2(k1, k2);
      const cplx dot = static_cast<double>(k1) * v.x.c[idx] + static_cast<double>(k2) * v.y.c[idx];
      out.x.c[idx] = v.x.c[idx] - static_cast<double>(k1) * dot / r2;
      out.y.c[idx] = v.y.c[idx] - static_cast<double>(k2) * dot / r2;
    }
  }
  out.divergence_free = true;
  return out;
}

VectorField biot_savart(const SpectralField& xi) {
  if (has_mean(xi)) {
    throw std::invalid_argument("velocity reconstruction requires a mean-free vorticity");
  }
  const TorusGrid& g = xi.grid;
  VectorField u(g);
  const int n = g.n;
  for (int i = 0; i < n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const int k2 = g.mode_of(j);
      if (k1 == 0 && k2 == 0) continue;
      if (std::abs(k1) * 2 == n || std::abs(k2) * 2 == n) continue;  // keep realness
      const int idx = i * n + j;
      const double r2 = mode_r2(k1, k2);
      // û = ξ̂ k⊥ / (2πi |k|^2), k⊥ = (-k2, k1)
      const cplx base = xi.c[idx] / cplx(0.0, kTwoPi * r2);
      u.x.c[idx] = -static_cast<double>(k2) * base;
      u.y.c[idx] = static_cast<double>(k1) * base;
    }
  }
  u.divergence_free = true;
  return u;
}

SpectralField curl(const VectorField& v) {
  const TorusGrid& g = v.grid();
  SpectralField out(g);
  const int n = g.n;
  for (int i = 0; i < n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const int k2 = g.mode_of(j);
      if (std::abs(k1) * 2 == n || std::abs(k2) * 2 == n) continue;
      const int idx = i * n + j;
      const cplx w = static_cast<double>(k1) * v.y.c[idx] - static_cast<double>(k2) * v.x.c[idx];
      out.c[idx] = cplx(-w.imag() * kTwoPi, w.real() * kTwoPi);  // 2πi (k1 v̂2 - k2 v̂1)
    }
  }
  return out;
}

VectorField gradient(const SpectralField& f) {
  VectorField out(f.grid);
  gradient_coeffs(f, out.x.c.data(), out.y.c.data());
  return out;
}

std::vector<double> heat_table(const TorusGrid& g, double t) {
  if (t < 0.0) throw std::invalid_argument("heat semigroup is not defined for negative times");
  std::vector<double> table(g.size());
  for (int i = 0; i < g.n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < g.n; ++j) {
      const int k2 = g.mode_of(j);
      table[i * g.n + j] = std::exp(-kFourPiSq * mode_r2(k1, k2) * t);
    }
  }
  return table;
}

void heat_propagate_inplace(SpectralField& f, const std::vector<double>& table) {
  for (size_t i = 0; i < f.c.size(); ++i) f.c[i] *= table[i];
}

SpectralField heat_propagate(const SpectralField& f, double t) {
  SpectralField out = f;
  const auto table = heat_table(f.grid, t);
  heat_propagate_inplace(out, table);
  return out;
}

PhysVec to_physical(const VectorField& v) {
  PhysVec out;
  out.x = to_physical(v.x);
  out.y = to_physical(v.y);
  return out;
}

SpectralField transport_term_phys(const TorusGrid& g, const PhysVec& v, const SpectralField& f) {
  const int sz = g.size();
  auto& gx = tbuf(0, sz);
  auto& gy = tbuf(1, sz);
  auto& px = tbuf(2, sz);
  auto& py = tbuf(3, sz);
  gradient_coeffs(f, gx.data(), gy.data());
  fft::backward(g, gx.data(), px.data());
  fft::backward(g, gy.data(), py.data());
  auto& prod = tbuf(4, sz);
  for (int i = 0; i < sz; ++i) {
    prod[i] = cplx(v.x[i] * px[i].real() + v.y[i] * py[i].real(), 0.0);
  }
  SpectralField out(g);
  fft::forward(g, prod.data(), out.c.data());
  dealias(out);
  hermitian_symmetrize(out);
  return out;
}

SpectralField transport_term(const VectorField& v, const SpectralField& f) {
  if (!(v.grid() == f.grid)) throw std::invalid_argument("velocity/scalar grids differ");
  return transport_term_phys(f.grid, to_physical(v), f);
}

SpectralField divergence_form_term_phys(const TorusGrid& g, const PhysVec& v,
                                        const SpectralField& f) {
  const int sz = g.size();
  auto& fp = tbuf(0, sz);
  fft::backward(g, f.c.data(), fp.data());
  auto& px = tbuf(1, sz);
  auto& py = tbuf(2, sz);
  for (int i = 0; i < sz; ++i) {
    const double fv = fp[i].real();
    px[i] = cplx(v.x[i] * fv, 0.0);
    py[i] = cplx(v.y[i] * fv, 0.0);
  }
  auto& cx = tbuf(3, sz);
  auto& cy = tbuf(4, sz);
  fft::forward(g, px.data(), cx.data());
  fft::forward(g, py.data(), cy.data());
  SpectralField out(g);
  const int n = g.n;
  for (int i = 0; i < n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < n; ++j) {
      const int k2 = g.mode_of(j);
      if (std::abs(k1) * 2 == n || std::abs(k2) * 2 == n) continue;
      const int idx = i * n + j;
      const cplx s = static_cast<double>(k1) * cx[idx] + static_cast<double>(k2) * cy[idx];
      out.c[idx] = cplx(-s.imag() * kTwoPi, s.real() * kTwoPi);  // 2πi k·(vf)^
    }
  }
  dealias(out);
  hermitian_symmetrize(out);
  return out;
}

SpectralField divergence_form_term(const VectorField& v, const SpectralField& f) {
  return divergence_form_term_phys(f.grid, to_physical(v), f);
}

SpectralField fractional_laplacian_power(const SpectralField& f, double s) {
  if (s < 0.0 && has_mean(f)) {
    throw std::invalid_argument("negative Laplacian powers require a mean-free field");
  }
  const TorusGrid& g = f.grid;
  SpectralField out(g);
  for (int i = 0; i < g.n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < g.n; ++j) {
      const int k2 = g.mode_of(j);
      const int idx = i * g.n + j;
      if (k1 == 0 && k2 == 0) {
        out.c[idx] = f.c[idx];
      } else {
        out.c[idx] = f.c[idx] * std::pow(mode_r2(k1, k2), 0.5 * s);
      }
    }
  }
  return out;
}

SpectralField sobolev_metric_apply(const SpectralField& f, double s) {
  const TorusGrid& g = f.grid;
  SpectralField out(g);
  for (int i = 0; i < g.n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < g.n; ++j) {
      const int k2 = g.mode_of(j);
      const int idx = i * g.n + j;
      out.c[idx] = (k1 == 0 && k2 == 0) ? f.c[idx] : f.c[idx] * std::pow(mode_r2(k1, k2), s);
    }
  }
  return out;
}

VectorField sobolev_metric_apply(const VectorField& v, double s) {
  VectorField out(v.grid());
  out.x = sobolev_metric_apply(v.x, s);
  out.y = sobolev_metric_apply(v.y, s);
  out.divergence_free = v.divergence_free;
  return out;
}

SpectralField mollify(const SpectralField& f, double width) {
  if (width < 0.0) throw std::invalid_argument("mollifier width must be nonnegative");
  const TorusGrid& g = f.grid;
  SpectralField out(g);
  const double w2 = width * width;
  for (int i = 0; i < g.n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < g.n; ++j) {
      const int k2 = g.mode_of(j);
      out.c[i * g.n + j] = f.c[i * g.n + j] * std::exp(-w2 * mode_r2(k1, k2));
    }
  }
  return out;
}

double max_abs_physical(const SpectralField& f) {
  const PhysField p = to_physical(f);
  double m = 0.0;
  for (double v : p) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace tnl
