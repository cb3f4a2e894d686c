#include "tnl/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace tnl {
namespace {

// FFTW planning is not thread-safe; fftw_execute_dft on distinct buffers is.
// Plans are created once per grid size under a lock with FFTW_UNALIGNED so
// they can run on any double-aligned buffer.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cplx> a(static_cast<size_t>(n) * n), b(static_cast<size_t>(n) * n);
  PlanPair p;
  p.fwd = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                           reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                           reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.fwd || !p.bwd) throw std::runtime_error("fftw plan creation failed");
  return cache.emplace(n, p).first->second;
}

std::vector<cplx>& scratch(int which, size_t size) {
  thread_local std::vector<cplx> bufs[4];
  auto& b = bufs[which];
  if (b.size() < size) b.resize(size);
  return b;
}

}  // namespace

namespace fft {

void backward(const TorusGrid& g, const cplx* in, cplx* out) {
  auto& p = plans_for(g.n);
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void forward(const TorusGrid& g, const cplx* in, cplx* out) {
  auto& p = plans_for(g.n);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double norm = 1.0 / g.size();
  for (int i = 0; i < g.size(); ++i) out[i] *= norm;
}

}  // namespace fft

PhysField to_physical(const SpectralField& f, double* imag_residue) {
  const int sz = f.grid.size();
  auto& buf = scratch(0, sz);
  fft::backward(f.grid, f.c.data(), buf.data());
  PhysField out(sz);
  double max_im = 0.0, max_re = 0.0;
  for (int i = 0; i < sz; ++i) {
    out[i] = buf[i].real();
    if (imag_residue) {
      max_im = std::max(max_im, std::abs(buf[i].imag()));
      max_re = std::max(max_re, std::abs(buf[i].real()));
    }
  }
  if (imag_residue) *imag_residue = max_im / std::max(1.0, max_re);
  return out;
}

SpectralField to_spectral(const TorusGrid& g, const PhysField& values) {
  if (static_cast<int>(values.size()) != g.size()) {
    throw std::invalid_argument("physical sample count does not match the grid");
  }
  auto& buf = scratch(1, values.size());
  for (size_t i = 0; i < values.size(); ++i) buf[i] = cplx(values[i], 0.0);
  SpectralField out(g);
  fft::forward(g, buf.data(), out.c.data());
  return out;
}

}  // namespace tnl
