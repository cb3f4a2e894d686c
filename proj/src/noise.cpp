#include "tnl/noise.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tnl/rng.hpp"

namespace tnl {
namespace {

// Stream key for mode k: independent of model parameters so that drivers
// coupled by seed agree across windows and cutoffs.
uint64_t mode_key(int k1, int k2) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(k1)) << 32) |
         static_cast<uint64_t>(static_cast<uint32_t>(k2));
}

bool plus_lattice(int k1, int k2) { return k1 > 0 || (k1 == 0 && k2 > 0); }

}  // namespace

NoiseModel build_noise_model(double alpha, int cutoff, NoiseWindow window) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("noise regularity alpha must lie in (0,1]");
  }
  if (cutoff < 1) throw std::invalid_argument("noise cutoff must be a positive integer");
  NoiseModel m;
  m.alpha = alpha;
  m.cutoff = cutoff;
  m.window = window;
  const int lo2 = window == NoiseWindow::band ? cutoff * cutoff : 1;
  const int hi = m.max_mode();
  const int hi2 = hi * hi;
  double wsum = 0.0;
  for (int k1 = -hi; k1 <= hi; ++k1) {
    for (int k2 = -hi; k2 <= hi; ++k2) {
      const int r2 = k1 * k1 + k2 * k2;
      if (r2 < lo2 || r2 > hi2 || r2 == 0) continue;
      const double r = std::sqrt(static_cast<double>(r2));
      const double sign = plus_lattice(k1, k2) ? 1.0 : -1.0;
      NoiseMode mode;
      mode.k1 = k1;
      mode.k2 = k2;
      mode.a1 = sign * (-k2) / r;
      mode.a2 = sign * k1 / r;
      mode.weight = std::pow(r, -alpha);
      mode.plus_lattice = plus_lattice(k1, k2);
      m.modes.push_back(mode);
      wsum += mode.weight * mode.weight;
    }
  }
  if (m.modes.empty()) throw std::invalid_argument("noise window contains no lattice modes");
  m.epsilon = 2.0 / wsum;
  return m;
}

std::string noise_model_summary(const NoiseModel& m) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"alpha\":" << m.alpha << ",\"n\":" << m.cutoff << ",\"window\":\""
     << (m.window == NoiseWindow::band ? "band" : "lowpass") << "\",\"epsilon\":" << m.epsilon
     << ",\"mode_count\":" << m.modes.size() << "}";
  return os.str();
}

cplx BrownianDriver::increment(int k1, int k2, long step_index, double dt) const {
  if (!plus_lattice(k1, k2)) {
    return std::conj(increment(-k1, -k2, step_index, dt));
  }
  const uint64_t stream = derive_seed(seed, mode_key(k1, k2));
  const GaussPair z = gauss_at(stream, static_cast<uint64_t>(step_index));
  const double s = std::sqrt(0.5 * dt);
  return cplx(s * z.z0, s * z.z1);
}

VectorField sample_noise_increment_at(const NoiseModel& m, const TorusGrid& g,
                                      const BrownianDriver& d, long step_index, double dt) {
  if (m.max_mode() > g.kmax) {
    throw std::invalid_argument("noise modes would cross the dealiasing cutoff of this grid");
  }
  if (dt <= 0.0) {
    throw std::invalid_argument("noise increment needs a positive time step");
  }
  VectorField out(g);
  for (const auto& mode : m.modes) {
    if (!mode.plus_lattice) continue;  // the pair is written together
    const cplx db = d.increment(mode.k1, mode.k2, step_index, dt);
    const double r = std::sqrt(static_cast<double>(mode.k1) * mode.k1 +
                               static_cast<double>(mode.k2) * mode.k2);
    // a_k e_k ΔB has coefficient (ΔB w / r) (-k2, k1).  Masking the low
    // mantissa bits of the shared scalar makes both products, and therefore
    // k·û, exact in floating point: the divergence cancels to exactly zero.
    const double w_over_r = mode.weight / r;
    const cplx dkr(mask_low_bits(db.real() * w_over_r, 16),
                   mask_low_bits(db.imag() * w_over_r, 16));
    const int ip = g.index(mode.k1, mode.k2);
    const int im = g.index(-mode.k1, -mode.k2);
    out.x.c[ip] = -static_cast<double>(mode.k2) * dkr;
    out.y.c[ip] = static_cast<double>(mode.k1) * dkr;
    out.x.c[im] = std::conj(out.x.c[ip]);
    out.y.c[im] = std::conj(out.y.c[ip]);
  }
  out.divergence_free = true;
  return out;
}

VectorField sample_noise_increment(const NoiseModel& m, const TorusGrid& g, BrownianDriver& d,
                                   double dt) {
  VectorField out = sample_noise_increment_at(m, g, d, d.step, dt);
  d.advance(dt);
  return out;
}

VectorField window_restrict(const NoiseModel& m, const VectorField& full) {
  const TorusGrid& g = full.grid();
  if (m.max_mode() > g.kmax) {
    throw std::invalid_argument("restriction window exceeds the grid's dealiasing cutoff");
  }
  VectorField out(g);
  for (const auto& mode : m.modes) {
    const int idx = g.index(mode.k1, mode.k2);
    out.x.c[idx] = full.x.c[idx];
    out.y.c[idx] = full.y.c[idx];
  }
  out.divergence_free = full.divergence_free;
  return out;
}

double ito_integral_variance(const NoiseModel& m, const std::vector<VectorField>& f, double dt) {
  double var = 0.0;
  for (const auto& field : f) {
    const TorusGrid& g = field.grid();
    double step_sum = 0.0;
    for (const auto& mode : m.modes) {
      if (mode.k1 > g.kmax || mode.k1 < -g.kmax || mode.k2 > g.kmax || mode.k2 < -g.kmax) {
        throw std::invalid_argument("integrand grid does not resolve the noise modes");
      }
      const int idx = g.index(mode.k1, mode.k2);
      const cplx contraction = mode.a1 * field.x.c[idx] + mode.a2 * field.y.c[idx];
      step_sum += mode.weight * mode.weight * std::norm(contraction);
    }
    var += dt * step_sum;
  }
  return var;
}

VectorField covariance_apply(const VectorField& v, double alpha) {
  double scale = 0.0;
  for (const auto& c : v.x.c) scale = std::max(scale, std::abs(c));
  for (const auto& c : v.y.c) scale = std::max(scale, std::abs(c));
  const TorusGrid& g = v.grid();
  if (std::abs(v.x.c[0]) + std::abs(v.y.c[0]) > 1e-12 * std::max(1.0, scale)) {
    throw std::invalid_argument("covariance operator requires a mean-free field");
  }
  VectorField out = leray_project(v);
  for (int i = 0; i < g.n; ++i) {
    const int k1 = g.mode_of(i);
    for (int j = 0; j < g.n; ++j) {
      const int k2 = g.mode_of(j);
      const int idx = i * g.n + j;
      if (k1 == 0 && k2 == 0) {
        out.x.c[idx] = cplx(0.0, 0.0);
        out.y.c[idx] = cplx(0.0, 0.0);
        continue;
      }
      const double w = std::pow(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2,
                                -alpha);
      out.x.c[idx] *= w;
      out.y.c[idx] *= w;
    }
  }
  return out;
}

}  // namespace tnl
