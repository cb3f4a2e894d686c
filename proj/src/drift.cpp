#include "tnl/detpde.hpp"

#include <stdexcept>

namespace tnl {

VectorField drift_velocity(const DriftSpec& b, const TorusGrid& g) {
  VectorField v(g);
  switch (b.preset) {
    case DriftPreset::zero:
      v.divergence_free = true;
      return v;
    case DriftPreset::shear:
      // constant translation amplitude*(1,0)
      v.x.c[g.index(0, 0)] = cplx(b.amplitude, 0.0);
      v.divergence_free = true;
      return v;
    case DriftPreset::taylor_green: {
      // velocity whose vorticity is amplitude*sin(2πx1)sin(2πx2)
      SpectralField xi(g);
      const double a = -0.25 * b.amplitude;
      xi.c[g.index(1, 1)] = cplx(a, 0.0);
      xi.c[g.index(-1, -1)] = cplx(a, 0.0);
      xi.c[g.index(1, -1)] = cplx(-a, 0.0);
      xi.c[g.index(-1, 1)] = cplx(-a, 0.0);
      return biot_savart(xi);
    }
    case DriftPreset::custom: {
      for (const auto& c : b.custom) {
        if (std::abs(c.k1) > g.kmax || std::abs(c.k2) > g.kmax) {
          throw std::invalid_argument("custom drift mode lies beyond the dealiasing cutoff");
        }
        const int idx = g.index(c.k1, c.k2);
        v.x.c[idx] += b.amplitude * c.cx;
        v.y.c[idx] += b.amplitude * c.cy;
      }
      hermitian_symmetrize(v.x);
      hermitian_symmetrize(v.y);
      return leray_project(v);
    }
  }
  throw std::invalid_argument("unknown drift preset");
}

}  // namespace tnl
